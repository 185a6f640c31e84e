"""2D lattices, dual truncations, and the band-gap quasiperiodic Green's function.

The Green's function is evaluated as a spectral (dual-lattice) sum; the
slowly-converging complex part is split off as an absolutely convergent
remainder so existing summation machinery can handle the real part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_CONFIG, ComplexQuasimomentum, NumericsConfig, reduce_fractional
from .errors import InvalidGeometry, RayleighSingular


@dataclass(frozen=True)
class Lattice2D:
    """Lattice spanned by l1, l2 with dual basis a_i . l_j = 2 pi delta_ij."""

    l1: np.ndarray
    l2: np.ndarray

    def __post_init__(self):
        l1 = np.asarray(self.l1, dtype=float).reshape(2).copy()
        l2 = np.asarray(self.l2, dtype=float).reshape(2).copy()
        det = l1[0] * l2[1] - l1[1] * l2[0]
        if abs(det) < 1e-14 * max(np.linalg.norm(l1) * np.linalg.norm(l2), 1e-300):
            raise InvalidGeometry("lattice vectors are (nearly) linearly dependent")
        l1.flags.writeable = False
        l2.flags.writeable = False
        object.__setattr__(self, "l1", l1)
        object.__setattr__(self, "l2", l2)

    @classmethod
    def square(cls, L: float = 1.0) -> "Lattice2D":
        return cls(np.array([L, 0.0]), np.array([0.0, L]))

    @property
    def basis(self) -> np.ndarray:
        """Columns l1, l2."""
        return np.column_stack([self.l1, self.l2])

    @property
    def cell_area(self) -> float:
        return abs(float(np.linalg.det(self.basis)))

    @property
    def dual_basis(self) -> np.ndarray:
        """Rows are the dual vectors a1, a2."""
        return 2.0 * math.pi * np.linalg.inv(self.basis)

    def dual_points(self, n: int) -> np.ndarray:
        """All q = m1 a1 + m2 a2 with |m_i| <= n, in fixed (m1, m2) order."""
        if n < 0:
            raise ValueError("truncation order must be nonnegative")
        ms = np.arange(-n, n + 1)
        m1, m2 = np.meshgrid(ms, ms, indexing="ij")
        idx = np.column_stack([m1.ravel(), m2.ravel()])
        return idx.astype(float) @ self.dual_basis, idx

    def reduce(self, alpha) -> np.ndarray:
        """Reduce a momentum modulo the dual lattice, coefficients in (-1/2, 1/2]."""
        alpha = np.asarray(alpha, dtype=float).reshape(2)
        coeff = np.linalg.solve(self.dual_basis.T, alpha)
        reduced = np.array([reduce_fractional(c) for c in coeff])
        return reduced @ self.dual_basis


@dataclass(frozen=True)
class DualTruncation:
    """Square dual-lattice window [-n, n]^2; (2n+1)^2 points including q = 0."""

    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("truncation order must be nonnegative")

    def points(self, lat: Lattice2D):
        return lat.dual_points(self.n)


def _band_denominators(v: np.ndarray, beta: np.ndarray, k: float) -> np.ndarray:
    normsq = np.einsum("ij,ij->i", v, v)
    return k * k + beta @ beta - 2j * (v @ beta) - normsq


def _guard(denoms: np.ndarray, v: np.ndarray, idx, what: str, config: NumericsConfig):
    normsq = np.einsum("ij,ij->i", v, v)
    bad = np.abs(denoms) < config.rayleigh_guard * (normsq + 1.0)
    if np.any(bad):
        j = int(np.argmax(bad))
        raise RayleighSingular(
            f"{what} denominator vanishes at dual index {tuple(idx[j])}",
            offending=tuple(int(x) for x in idx[j]),
        )


def greens_gap(
    x,
    q: ComplexQuasimomentum,
    k: float,
    lat: Lattice2D,
    trunc: DualTruncation,
    config: NumericsConfig = DEFAULT_CONFIG,
) -> complex:
    """Truncated band-gap Green's function at point x.

    Sum over the dual window of e^{i(alpha+q).x} over the band-gap
    denominator k^2 + |beta|^2 - 2i beta.(alpha+q) - |alpha+q|^2, divided by
    the cell area. beta = 0 reduces to the classical quasiperiodic sum.
    """
    x = np.asarray(x, dtype=float).reshape(2)
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    points, idx = trunc.points(lat)
    v = q.alpha[None, :] + points
    denoms = _band_denominators(v, q.beta, k)
    _guard(denoms, v, idx, "band-gap", config)
    phases = np.exp(1j * (v @ x))
    return complex(np.sum(phases / denoms) / lat.cell_area)


def greens_remainder(
    x,
    q: ComplexQuasimomentum,
    k: float,
    lat: Lattice2D,
    trunc: DualTruncation,
    config: NumericsConfig = DEFAULT_CONFIG,
) -> complex:
    """Difference between the band-gap and the beta = 0 Green's functions.

    Absolutely convergent sum with numerator 2i beta.(alpha+q) - |beta|^2
    over the product of the band-gap and beta = 0 denominators; vanishes
    identically at beta = 0.
    """
    x = np.asarray(x, dtype=float).reshape(2)
    if np.all(q.beta == 0.0):
        return 0.0 + 0.0j
    points, idx = trunc.points(lat)
    v = q.alpha[None, :] + points
    normsq = np.einsum("ij,ij->i", v, v)
    denom_band = _band_denominators(v, q.beta, k)
    denom_real = k * k - normsq
    _guard(denom_band, v, idx, "band-gap", config)
    _guard(denom_real.astype(complex), v, idx, "beta = 0", config)
    numer = 2j * (v @ q.beta) - q.beta @ q.beta
    phases = np.exp(1j * (v @ x))
    return complex(np.sum(phases * numer / (denom_band * denom_real)) / lat.cell_area)


@dataclass(frozen=True)
class RayleighPoint:
    beta_magnitude: float
    dual_index: tuple
    dual_point: np.ndarray


def rayleigh_singularities(
    alpha,
    k: float,
    beta_dir,
    lat: Lattice2D,
    search_radius: float,
    perp_tol: float = 1e-10,
):
    """|beta| values along a decay direction where a sum denominator vanishes.

    Solves |alpha + q|^2 = k^2 + |beta|^2 with (alpha + q) perpendicular to
    beta over all dual points within range; returns points sorted by
    ascending |beta| (possibly empty).
    """
    alpha = np.asarray(alpha, dtype=float).reshape(2)
    beta_dir = np.asarray(beta_dir, dtype=float).reshape(2)
    norm = np.linalg.norm(beta_dir)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError("beta_dir must be a unit vector")
    beta_dir = beta_dir / norm
    rho = math.sqrt(search_radius**2 + k * k)
    sigma_min = np.linalg.svd(lat.dual_basis.T, compute_uv=False)[-1]
    m_max = int(math.ceil((rho + np.linalg.norm(alpha)) / sigma_min)) + 1
    points, idx = lat.dual_points(m_max)
    v = alpha[None, :] + points
    normsq = np.einsum("ij,ij->i", v, v)
    perp = np.abs(v @ beta_dir) < perp_tol
    above = normsq >= k * k
    found = []
    for j in np.nonzero(perp & above)[0]:
        mag = math.sqrt(max(normsq[j] - k * k, 0.0))
        if mag <= search_radius:
            found.append(
                RayleighPoint(mag, tuple(int(t) for t in idx[j]), points[j].copy())
            )
    found.sort(key=lambda p: p.beta_magnitude)
    return found


def truncation_convergence(
    x,
    q: ComplexQuasimomentum,
    k: float,
    lat: Lattice2D,
    n_list,
    n_ref: int,
    config: NumericsConfig = DEFAULT_CONFIG,
):
    """Truncation error of the remainder sum against a reference window.

    Returns ((n, error) table, fitted log-log order). The order is the
    negated slope of log error against log n; NaN when the errors vanish
    (beta = 0).
    """
    n_list = [int(n) for n in n_list]
    if n_ref <= max(n_list):
        raise ValueError("n_ref must exceed every entry of n_list")
    ref = greens_remainder(x, q, k, lat, DualTruncation(n_ref), config)
    table = []
    for n in n_list:
        val = greens_remainder(x, q, k, lat, DualTruncation(n), config)
        table.append((n, abs(val - ref)))
    errors = np.array([e for _, e in table])
    if np.all(errors < 1e-300):
        return table, float("nan")
    order = -float(np.polyfit(np.log(n_list), np.log(errors), 1)[0])
    return table, order
