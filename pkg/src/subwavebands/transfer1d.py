"""Transfer-matrix analysis of a single-resonator cell at general frequency.

Builds the 2x2 transfer matrix across one resonator, the modified transfer
matrix over a full cell, and extracts the complex quasimomentum from its
eigenvalues.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_CONFIG, NumericsConfig, reduce_alpha_1d
from .errors import DegenerateEigenvalues

_STRUCTURE_TOL = 1e-10


@dataclass(frozen=True)
class TransferMatrix:
    """2x2 amplitude map across one resonator of half-length a.

    Satisfies det M = 1 and M22 = conj(M11), M21 = conj(M12) (checked on
    construction to 1e-10).
    """

    entries: np.ndarray
    k: float
    a: float
    n: float
    delta: float

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("transfer matrix must be 2x2")
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if abs(det - 1.0) > _STRUCTURE_TOL:
            raise ValueError(f"det M = {det} deviates from 1")
        if (
            abs(m[1, 1] - m[0, 0].conjugate()) > _STRUCTURE_TOL
            or abs(m[1, 0] - m[0, 1].conjugate()) > _STRUCTURE_TOL
        ):
            raise ValueError("transfer matrix lost its conjugate structure")
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)


def transfer_matrix_single(k: float, a: float, n: float, delta: float) -> TransferMatrix:
    """Closed-form transfer matrix of one resonator of length 2a.

    The resonator has index ratio n (interior wavenumber n*k) and flux
    contrast delta across its boundaries; k = 0 or a homogeneous medium
    (n = delta = 1) give the identity.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if a <= 0 or n <= 0 or delta <= 0:
        raise ValueError("a, n and delta must be positive")
    phase = cmath.exp(-2j * a * k)
    c = math.cos(2.0 * a * k * n)
    s = math.sin(2.0 * a * k * n)
    denom = 2.0 * delta * n
    m11 = phase * (denom * c + 1j * (delta * delta + n * n) * s) / denom
    m12 = -1j * (delta - n) * (delta + n) * s / denom
    entries = np.array([[m11, m12], [m12.conjugate(), m11.conjugate()]])
    return TransferMatrix(entries, float(k), float(a), float(n), float(delta))


def modified_transfer(m: TransferMatrix, L: float) -> np.ndarray:
    """Cell transfer matrix T = diag(e^{ikL}, e^{-ikL}) M; det T = 1."""
    if L < 2.0 * m.a:
        raise ValueError("cell length L must be at least the resonator length 2a")
    phases = np.array([cmath.exp(1j * m.k * L), cmath.exp(-1j * m.k * L)])
    t = phases[:, None] * m.entries
    det = t[0, 0] * t[1, 1] - t[0, 1] * t[1, 0]
    if abs(det - 1.0) > _STRUCTURE_TOL:
        raise ValueError(f"det T = {det} deviates from 1")
    return t


def complex_quasimomentum_from_T(
    t: np.ndarray, L: float, config: NumericsConfig = DEFAULT_CONFIG
):
    """(alpha, beta) pairs from the eigenvalues of the cell transfer matrix.

    Each Floquet multiplier lam gives alpha = arg(lam)/L reduced to
    (-pi/L, pi/L] and beta = -log|lam|/L. Degenerate eigenvalue pairs are
    reported through a :class:`DegenerateEigenvalues` warning.
    """
    t = np.asarray(t, dtype=complex)
    values = np.linalg.eigvals(t)
    if abs(values[0] - values[1]) < 1e-12:
        warnings.warn(
            f"transfer eigenvalues coincide at {values[0]}", DegenerateEigenvalues
        )
    pairs = []
    for lam in values:
        beta = -math.log(abs(lam)) / L
        alpha = reduce_alpha_1d(cmath.phase(lam) / L, L)
        pairs.append((alpha, beta))
    return pairs


@dataclass(frozen=True)
class GeneralSweepRow:
    k: float
    branch: int
    alpha: float
    beta: float
    in_gap: bool


def general_band_sweep(
    k_grid,
    a: float,
    n: float,
    delta: float,
    L: float,
    gap_beta_tol: float = 1e-8,
    config: NumericsConfig = DEFAULT_CONFIG,
):
    """Sweep k and tabulate (alpha, beta) per transfer-matrix eigenvalue.

    Branches are continued in k by nearest-eigenvalue matching; a row is
    inside a gap when |beta| exceeds ``gap_beta_tol``.
    """
    k_grid = np.asarray(k_grid, dtype=float)
    if k_grid.ndim != 1 or len(k_grid) == 0:
        raise ValueError("k grid must be a nonempty 1D array")
    if np.any(np.diff(k_grid) <= 0) or k_grid[0] <= 0:
        raise ValueError("k grid must be strictly increasing and positive")
    rows = []
    prev = None
    for k in k_grid:
        t = modified_transfer(transfer_matrix_single(k, a, n, delta), L)
        values = np.linalg.eigvals(t)
        if prev is not None:
            straight = abs(values[0] - prev[0]) + abs(values[1] - prev[1])
            swapped = abs(values[1] - prev[0]) + abs(values[0] - prev[1])
            if swapped < straight:
                values = values[::-1]
        prev = values
        for branch, lam in enumerate(values):
            beta = -math.log(abs(lam)) / L
            alpha = reduce_alpha_1d(cmath.phase(lam) / L, L)
            rows.append(GeneralSweepRow(float(k), branch, alpha, beta, abs(beta) > gap_beta_tol))
    return rows


def floquet_mode_residual(
    t: np.ndarray, m: TransferMatrix, L: float, n_samples: int = 20
) -> float:
    """Worst Floquet-condition violation of the modes encoded by T.

    For each eigenpair (mu, (A, B)) of T, the exterior solution is sampled
    at points x with both x and x + L outside the resonator and the
    relation u(x + L) = mu u(x) is checked; returns the largest normalized
    residual over both modes.
    """
    values, vectors = np.linalg.eig(np.asarray(t, dtype=complex))
    k, a = m.k, m.a
    xs = np.linspace(a - L, -a, n_samples + 2)[1:-1]
    worst = 0.0
    for i in range(2):
        amp_ab = vectors[:, i]
        amp_cd = m.entries @ amp_ab
        u_left = amp_ab[0] * np.exp(1j * k * xs) + amp_ab[1] * np.exp(-1j * k * xs)
        u_right = amp_cd[0] * np.exp(1j * k * (xs + L)) + amp_cd[1] * np.exp(-1j * k * (xs + L))
        scale = max(np.max(np.abs(u_left)), np.max(np.abs(u_right)), 1e-300)
        worst = max(worst, float(np.max(np.abs(u_right - values[i] * u_left)) / scale))
    return worst
