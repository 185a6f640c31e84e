"""Quasiperiodic capacitance matrices for 1D resonator chains.

Assembles the N x N capacitance matrix at complex quasimomentum, the
generalized (material-weighted) variant, and the closed-form dimer gap
branches with their admissible decay interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT_CONFIG, ComplexQuasimomentum, NumericsConfig, subwavelength_frequency
from .errors import EmptyBranch, InvalidGeometry, OutOfDomain


@dataclass(frozen=True)
class ChainGeometry1D:
    """Periodic chain of resonators: lengths l_i, gaps s_i, wave speeds v_i.

    ``spacings[i]`` is the gap after resonator i; the gap before resonator 1
    is the last one by periodicity. A redundant trailing spacing equal to
    the first is accepted and dropped.
    """

    lengths: tuple
    spacings: tuple
    wave_speeds: tuple = ()

    def __post_init__(self):
        lengths = tuple(float(x) for x in self.lengths)
        spacings = tuple(float(x) for x in self.spacings)
        n = len(lengths)
        if n < 1:
            raise InvalidGeometry("need at least one resonator")
        if len(spacings) == n + 1:
            if spacings[-1] != spacings[0]:
                raise InvalidGeometry(
                    "trailing spacing must equal the first (periodic wrap)"
                )
            spacings = spacings[:-1]
        if len(spacings) != n:
            raise InvalidGeometry(
                f"expected {n} or {n + 1} spacings for {n} resonators, got {len(self.spacings)}"
            )
        speeds = tuple(float(v) for v in self.wave_speeds) or (1.0,) * n
        if len(speeds) != n:
            raise InvalidGeometry(f"expected {n} wave speeds, got {len(speeds)}")
        if min(lengths) <= 0 or min(spacings) <= 0 or min(speeds) <= 0:
            raise InvalidGeometry("lengths, spacings and wave speeds must be positive")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "spacings", spacings)
        object.__setattr__(self, "wave_speeds", speeds)

    @property
    def n_resonators(self) -> int:
        return len(self.lengths)

    @property
    def cell_length(self) -> float:
        return sum(self.lengths) + sum(self.spacings)


def capacitance_matrix_1d(geom: ChainGeometry1D, q: ComplexQuasimomentum) -> np.ndarray:
    """Quasiperiodic capacitance matrix of a 1D chain at (alpha, beta).

    For a single resonator the entry is the scalar closed form
    (2/s1)(1 - cos(aL)cosh(bL) - 1j sin(aL)sinh(bL)); for N >= 2 the matrix
    is tridiagonal-plus-corners, the (1,N) corner carrying
    -exp(-1j(a+1j b)L)/s_N and the (N,1) corner its reciprocal phase.
    """
    if q.dim != 1:
        raise ValueError("1D chain needs a 1D quasimomentum")
    alpha, beta = q.alpha_scalar, q.beta_scalar
    s = geom.spacings
    n = geom.n_resonators
    L = geom.cell_length
    if n == 1:
        aL, bL = alpha * L, beta * L
        val = (2.0 / s[0]) * (
            1.0
            - math.cos(aL) * math.cosh(bL)
            - 1j * math.sin(aL) * math.sinh(bL)
        )
        return np.array([[val]], dtype=complex)
    c = np.zeros((n, n), dtype=complex)
    for j in range(n):
        s_prev = s[j - 1]  # gap before resonator j (wraps at j = 0)
        s_next = s[j]
        c[j, j] = 1.0 / s_prev + 1.0 / s_next
        if j > 0:
            c[j - 1, j] += -1.0 / s_prev
        if j < n - 1:
            c[j + 1, j] += -1.0 / s_next
    z = (alpha + 1j * beta) * L
    c[0, n - 1] += -np.exp(-1j * z) / s[n - 1]
    c[n - 1, 0] += -np.exp(1j * z) / s[n - 1]
    return c


def generalized_capacitance_1d(geom: ChainGeometry1D, q: ComplexQuasimomentum) -> np.ndarray:
    """Material-weighted capacitance: diag(v_i^2 / l_i) times the matrix above."""
    w = np.array(geom.wave_speeds) ** 2 / np.array(geom.lengths)
    return w[:, None] * capacitance_matrix_1d(geom, q)


def beta_admissible_interval(s1: float, s2: float, L: float):
    """Closed symmetric beta interval on which the first-gap branches are real.

    Endpoint is arcosh((s1^2 + s2^2) / (2 s1 s2)) / L; it collapses to zero
    exactly when s1 = s2 (the gap closes).
    """
    if s1 <= 0 or s2 <= 0 or L <= 0:
        raise InvalidGeometry("s1, s2 and L must be positive")
    arg = (s1 * s1 + s2 * s2) / (2.0 * s1 * s2)
    beta_max = math.acosh(max(arg, 1.0)) / L
    return (-beta_max, beta_max)


#: Pin of alpha for each dimer gap branch id (1-4): zone edge or zone center.
DIMER_BRANCH_ALPHA_PIN = {1: "edge", 2: "edge", 3: "center", 4: "center"}


@dataclass(frozen=True)
class GapBranch1D:
    """One closed-form dimer gap branch and its admissible beta domain.

    branch_id 1/2: lower/upper branch of the first gap, alpha pinned at the
    zone edge pi/L; 3: branch above the top band, alpha pinned at 0;
    4: the zone-center companion, empty for beta != 0.
    """

    branch_id: int
    alpha_pin: float
    beta_domain: tuple | None  # closed interval, None meaning all of R

    @classmethod
    def for_dimer(cls, branch_id: int, s1: float, s2: float, L: float) -> "GapBranch1D":
        if branch_id not in (1, 2, 3, 4):
            raise ValueError("branch_id must be 1, 2, 3 or 4")
        pin = math.pi / L if DIMER_BRANCH_ALPHA_PIN[branch_id] == "edge" else 0.0
        if branch_id in (1, 2):
            domain = beta_admissible_interval(s1, s2, L)
        elif branch_id == 3:
            domain = None
        else:
            domain = (0.0, 0.0)
        return cls(branch_id, pin, domain)


def dimer_gap_branches(
    s1: float, s2: float, L: float, delta: float, branch_id: int, beta: float
) -> float:
    """Closed-form dimer gap frequency on one of the four branches.

    Raises OutOfDomain when beta leaves the admissible interval of branches
    1/2 and EmptyBranch for branch 4 at beta != 0 (imaginary there).
    """
    if s1 <= 0 or s2 <= 0 or L <= 0:
        raise InvalidGeometry("s1, s2 and L must be positive")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if branch_id not in (1, 2, 3, 4):
        raise ValueError("branch_id must be 1, 2, 3 or 4")
    ssum = 1.0 / s1 + 1.0 / s2
    psum = 1.0 / s1**2 + 1.0 / s2**2
    cross = 2.0 / (s1 * s2)
    ch = math.cosh(beta * L)
    if branch_id in (1, 2):
        inner = psum - cross * ch
        if inner < -1e-12 * psum:
            raise OutOfDomain(
                f"beta={beta} outside the admissible interval "
                f"{beta_admissible_interval(s1, s2, L)}"
            )
        inner = max(inner, 0.0)  # interval endpoint, up to rounding
        lam = ssum - math.sqrt(inner) if branch_id == 1 else ssum + math.sqrt(inner)
    elif branch_id == 3:
        lam = ssum + math.sqrt(psum + cross * ch)
    else:
        if beta != 0.0:
            raise EmptyBranch("branch 4 is imaginary for beta != 0")
        lam = ssum - math.sqrt(psum + cross)  # exactly zero up to rounding
        lam = max(lam, 0.0)
    return float(subwavelength_frequency(lam, delta).real)


@dataclass(frozen=True)
class SweepRow1D:
    alpha: float
    beta: float
    branch: int
    omega: float


@dataclass(frozen=True)
class SweepResult1D:
    rows: tuple
    omitted: int


def band_sweep_1d(
    geom: ChainGeometry1D,
    delta: float,
    alpha_grid=None,
    gap_segments=(),
    config: NumericsConfig = DEFAULT_CONFIG,
) -> SweepResult1D:
    """Tabulate real band and gap frequencies of a chain.

    ``alpha_grid`` sweeps the bulk bands at beta = 0; each gap segment is a
    (alpha_pin, beta_grid) pair with the pin restricted to 0 or +-pi/L.
    Rows whose eigenvalue is not real and nonnegative are omitted and
    counted, so the table stays purely numeric.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    L = geom.cell_length
    rows = []
    omitted = 0

    def emit(alpha: float, beta: float) -> int:
        nonlocal omitted
        mat = generalized_capacitance_1d(geom, ComplexQuasimomentum(alpha, beta))
        lams = np.sort_complex(np.linalg.eigvals(mat))
        kept = 0
        for idx, lam in enumerate(lams):
            scale = max(abs(lam), 1.0)
            if abs(lam.imag) > config.realness_rtol * scale or lam.real < -config.realness_rtol * scale:
                omitted += 1
                continue
            lam_real = max(lam.real, 0.0)
            rows.append(SweepRow1D(alpha, beta, idx, math.sqrt(delta * lam_real)))
            kept += 1
        return kept

    if alpha_grid is not None:
        for alpha in np.asarray(alpha_grid, dtype=float):
            emit(float(alpha), 0.0)
    for alpha_pin, beta_grid in gap_segments:
        pin = float(alpha_pin)
        if not (
            abs(pin) <= 1e-12 or abs(abs(pin) - math.pi / L) <= 1e-12 * max(1.0, math.pi / L)
        ):
            raise OutOfDomain(
                f"gap segments require alpha pinned to 0 or +-pi/L={math.pi / L}, got {pin}"
            )
        for beta in np.asarray(beta_grid, dtype=float):
            emit(pin, float(beta))
    return SweepResult1D(tuple(rows), omitted)
