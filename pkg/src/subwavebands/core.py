"""Shared spectral primitives.

Complex quasimomenta, Brillouin-zone reduction and paths, small dense
complex eigensolves, and the square-root map from capacitance eigenvalues
to resonant frequencies.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, NonFinite

_BZ_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class NumericsConfig:
    """All tunable tolerances in one record; pass explicitly to override."""

    eig_residual: float = 1e-10
    eig_dim_cap: int = 512
    rayleigh_guard: float = 1e-12
    slp_condition_cap: float = 1e12
    root_tol: float = 1e-9
    muller_tol: float = 1e-12
    muller_max_iter: int = 80
    realness_rtol: float = 1e-9


DEFAULT_CONFIG = NumericsConfig()


def _as_vector(value, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=float)).copy()
    if arr.ndim != 1 or arr.size not in (1, 2):
        raise ValueError(f"{name} must be a scalar or a 2-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"{name} contains non-finite entries")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ComplexQuasimomentum:
    """Bloch momentum ``alpha`` plus a real evanescence vector ``beta``.

    ``beta`` is the decay rate of the Floquet factor: a Bloch mode picks up
    ``exp(1j*alpha.dot(l)) * exp(-beta.dot(l))`` per lattice translation l.
    ``beta = 0`` is a propagating (bulk) mode.
    """

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        alpha = _as_vector(self.alpha, "alpha")
        beta = _as_vector(self.beta, "beta")
        if alpha.size != beta.size:
            raise ValueError("alpha and beta must have the same dimension")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def dim(self) -> int:
        return self.alpha.size

    @property
    def alpha_scalar(self) -> float:
        if self.dim != 1:
            raise ValueError("alpha_scalar is only defined for 1D quasimomenta")
        return float(self.alpha[0])

    @property
    def beta_scalar(self) -> float:
        if self.dim != 1:
            raise ValueError("beta_scalar is only defined for 1D quasimomenta")
        return float(self.beta[0])

    @property
    def is_propagating(self) -> bool:
        return bool(np.all(self.beta == 0.0))


def reduce_alpha_1d(alpha: float, L: float) -> float:
    """Reduce a 1D Bloch momentum to the zone (-pi/L, pi/L].

    Idempotent: reducing an already reduced value returns it bitwise
    unchanged (a small slack keeps the +pi/L edge from flipping sign).
    """
    if L <= 0:
        raise ValueError("L must be positive")
    x = alpha * L / (2.0 * math.pi)
    m = math.ceil(x - 0.5 - _BZ_EDGE_TOL)
    if m == 0:
        return float(alpha)
    return float(alpha - m * (2.0 * math.pi / L))


def reduce_fractional(coeff: float) -> float:
    """Reduce one lattice coefficient to (-1/2, 1/2] with edge slack."""
    m = math.ceil(coeff - 0.5 - _BZ_EDGE_TOL)
    return coeff if m == 0 else coeff - m


@dataclass(frozen=True)
class BrillouinPath:
    """Piecewise-linear path between labelled momentum points.

    Each segment is sampled linearly, endpoints included; shared vertices
    are emitted once.
    """

    vertices: tuple
    samples_per_segment: int = 16

    def __post_init__(self):
        verts = []
        for label, point in self.vertices:
            verts.append((str(label), _as_vector(point, f"vertex {label}")))
        if len(verts) < 2:
            raise ValueError("a path needs at least two vertices")
        if self.samples_per_segment < 1:
            raise ValueError("samples_per_segment must be >= 1")
        for (la, a), (lb, b) in zip(verts, verts[1:]):
            if np.array_equal(a, b):
                raise ValueError(f"consecutive path vertices {la}, {lb} coincide")
        object.__setattr__(self, "vertices", tuple(verts))

    def sample(self):
        """Return (points (M,d) array, arclength coordinate (M,), tick list).

        Ticks are (index-into-points, label) pairs for the vertices.
        """
        points = [self.vertices[0][1]]
        coords = [0.0]
        ticks = [(0, self.vertices[0][0])]
        pos = 0.0
        for (_, a), (lb, b) in zip(self.vertices, self.vertices[1:]):
            seg = b - a
            seg_len = float(np.linalg.norm(seg))
            for j in range(1, self.samples_per_segment + 1):
                t = j / self.samples_per_segment
                points.append(a + t * seg)
                coords.append(pos + t * seg_len)
            pos += seg_len
            ticks.append((len(points) - 1, lb))
        return np.asarray(points), np.asarray(coords), ticks


def eigs_complex(matrix, config: NumericsConfig = DEFAULT_CONFIG):
    """Eigenpairs of a small dense complex matrix, deterministically ordered.

    Pairs are sorted by ascending real part, ties by imaginary part, and
    eigenvectors are normalized to unit Euclidean norm. Raises
    :class:`NonFinite` on bad entries and :class:`ConvergenceFailure` if the
    QR iteration fails or the residual check ``|Mv - lv| <= tol*|M|`` fails.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    if m.shape[0] > config.eig_dim_cap:
        raise ValueError(f"dimension {m.shape[0]} exceeds cap {config.eig_dim_cap}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise NonFinite("matrix contains NaN or Inf entries")
    try:
        values, vectors = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"eigensolver did not converge: {exc}") from exc
    order = np.lexsort((values.imag, values.real))
    values = values[order]
    vectors = vectors[:, order]
    norm_m = np.linalg.norm(m, 2) if m.size else 0.0
    pairs = []
    for i in range(m.shape[0]):
        v = vectors[:, i]
        v = v / np.linalg.norm(v)
        residual = np.linalg.norm(m @ v - values[i] * v)
        if residual > config.eig_residual * max(norm_m, 1e-300):
            raise ConvergenceFailure(
                f"eigenpair {i} residual {residual:.3e} exceeds "
                f"{config.eig_residual:.1e} * |M|"
            )
        pairs.append((complex(values[i]), v))
    return pairs


def eigvals_complex(matrix, config: NumericsConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Sorted eigenvalues only (same ordering contract as eigs_complex)."""
    return np.array([lam for lam, _ in eigs_complex(matrix, config)])


def subwavelength_frequency(lam, delta: float) -> complex:
    """Map a capacitance eigenvalue to a resonant frequency sqrt(delta*lam).

    The branch with nonnegative imaginary part is chosen; nonnegative real
    eigenvalues map to the nonnegative real root.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    lam = complex(lam)
    if lam.imag == 0.0:
        if lam.real >= 0.0:
            return complex(math.sqrt(delta * lam.real), 0.0)
        return complex(0.0, math.sqrt(-delta * lam.real))
    w = cmath.sqrt(delta * lam)
    if w.imag < 0.0:
        w = -w
    return w


@dataclass(frozen=True)
class SubwavelengthBand:
    """One resonant branch: capacitance eigenvalue and its frequency."""

    eigenvalue: complex
    omega: complex
    branch_index: int

    @classmethod
    def from_eigenvalue(cls, lam, delta: float, branch_index: int) -> "SubwavelengthBand":
        return cls(complex(lam), subwavelength_frequency(lam, delta), branch_index)
