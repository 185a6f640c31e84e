"""Fourier (multipole) discretization of the band-gap single-layer potential.

Circular resonator boundaries carry densities expanded in e^{i n theta};
each operator entry is a dual-lattice sum whose angular integrals are done
in closed form with Bessel functions, so the only error sources are the
lattice truncation and the multipole order K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import iv, jv

from .core import DEFAULT_CONFIG, ComplexQuasimomentum, NumericsConfig, SubwavelengthBand
from .errors import InvalidGeometry, RayleighSingular, SingularSLP, TruncationTooSmall
from .lattice2d import DualTruncation, Lattice2D


@dataclass(frozen=True)
class CircularResonator:
    """Disk resonator inside the fundamental cell."""

    center: np.ndarray
    radius: float
    wave_speed: float = 1.0

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).reshape(2).copy()
        center.flags.writeable = False
        object.__setattr__(self, "center", center)
        if self.radius <= 0 or self.wave_speed <= 0:
            raise InvalidGeometry("radius and wave speed must be positive")

    @property
    def area(self) -> float:
        return math.pi * self.radius**2


def validate_resonators(resonators, lat: Lattice2D) -> None:
    """Check disks are inside the cell and pairwise disjoint, images included."""
    if not resonators:
        raise InvalidGeometry("need at least one resonator")
    basis = lat.basis
    area = lat.cell_area
    widths = (area / np.linalg.norm(lat.l2), area / np.linalg.norm(lat.l1))
    for r in resonators:
        frac = np.linalg.solve(basis, r.center)
        for axis in range(2):
            margin = min(frac[axis], 1.0 - frac[axis]) * widths[axis]
            if margin < r.radius:
                raise InvalidGeometry(
                    f"resonator at {r.center} (R={r.radius}) leaves the fundamental cell"
                )
    shifts = [m1 * lat.l1 + m2 * lat.l2 for m1 in (-1, 0, 1) for m2 in (-1, 0, 1)]
    for a_idx, ra in enumerate(resonators):
        for b_idx, rb in enumerate(resonators):
            for shift in shifts:
                if b_idx == a_idx and np.all(shift == 0.0):
                    continue
                gap = np.linalg.norm(rb.center + shift - ra.center) - ra.radius - rb.radius
                if gap <= 0:
                    raise InvalidGeometry(
                        f"resonators {a_idx} and {b_idx} (image shift {shift}) overlap"
                    )


@dataclass(frozen=True)
class SlpMatrix:
    """(2K+1)N square matrix; block (i, j) maps densities on boundary j to
    traces on boundary i, Fourier index n stored at position n + K."""

    entries: np.ndarray
    K: int
    n_resonators: int

    def block(self, i: int, j: int) -> np.ndarray:
        size = 2 * self.K + 1
        return self.entries[i * size : (i + 1) * size, j * size : (j + 1) * size]


class _WindowTerms:
    """Dual-window arrays for one Brillouin representative of alpha."""

    def __init__(self, resonators, lat: Lattice2D, alpha: np.ndarray, K: int, trunc):
        points, self.dual_idx = trunc.points(lat)
        self.v = alpha[None, :] + points  # (M, 2)
        self.normsq = np.einsum("ij,ij->i", self.v, self.v)
        absv = np.sqrt(self.normsq)
        psi = np.arctan2(self.v[:, 1], self.v[:, 0])
        orders = np.arange(-K, K + 1)
        ipow = np.array([1j**int(m) for m in orders])
        phase_pos = np.exp(1j * np.outer(orders, psi))  # e^{+i n psi}, (2K+1, M)
        # row side: i^m e^{-im psi} J_m(R_i |v|); column side: (-i)^n e^{in psi} J_n(R_j |v|)
        self.row_factors = []
        self.col_factors = []
        self.center_phase = []  # e^{i v.c_i} per resonator
        for res in resonators:
            bess = jv(orders[:, None], res.radius * absv[None, :])
            self.row_factors.append(ipow[:, None] * np.conj(phase_pos) * bess)
            self.col_factors.append(np.conj(ipow)[:, None] * phase_pos * bess)
            self.center_phase.append(np.exp(1j * (self.v @ res.center)))


def brillouin_representatives(lat: Lattice2D, alpha, edge_tol: float = 1e-9):
    """Equivalent representatives of alpha whose windows restore symmetry.

    A momentum on the Brillouin-zone boundary (a dual-basis coefficient of
    exactly +-1/2) is the same Bloch momentum as its mirror across that
    boundary. The exact dual-lattice sums are invariant under the shift,
    but a finite square window is not; averaging the windows of all 2^b
    representatives keeps zone-edge symmetries exact under truncation.
    """
    alpha = np.asarray(alpha, dtype=float).reshape(2)
    coeff = np.linalg.solve(lat.dual_basis.T, alpha)
    reps = [alpha]
    for axis in range(2):
        c = float(coeff[axis])
        if abs(c - math.floor(c) - 0.5) > edge_tol:
            continue
        units = -int(round(2.0 * c))  # integer shift mapping c to -c
        shift = units * lat.dual_basis[axis]
        reps = reps + [a + shift for a in reps]
    return reps


class SlpAssembler:
    """Caches the alpha-dependent parts of the spectral sums.

    Repeated assemblies at different beta (root finding, scans) then only
    recompute the scalar term weights. At zone-boundary alpha the assembly
    averages over the equivalent representatives (see
    :func:`brillouin_representatives`).
    """

    def __init__(
        self,
        resonators,
        lat: Lattice2D,
        alpha,
        K: int,
        trunc: DualTruncation,
        config: NumericsConfig = DEFAULT_CONFIG,
    ):
        if K < 0:
            raise ValueError("multipole order K must be nonnegative")
        validate_resonators(resonators, lat)
        self.resonators = tuple(resonators)
        self.lat = lat
        self.alpha = np.asarray(alpha, dtype=float).reshape(2)
        self.K = K
        self.trunc = trunc
        self.config = config
        self.windows = [
            _WindowTerms(self.resonators, lat, rep, K, trunc)
            for rep in brillouin_representatives(lat, self.alpha)
        ]

    def _weights(self, win: _WindowTerms, beta: np.ndarray, k: float, component: str):
        cfg = self.config
        denom_band = k * k + beta @ beta - 2j * (win.v @ beta) - win.normsq
        denom_real = k * k - win.normsq
        guard = cfg.rayleigh_guard * (win.normsq + 1.0)

        def check(denoms, what):
            bad = np.abs(denoms) < guard
            if np.any(bad):
                j = int(np.argmax(bad))
                raise RayleighSingular(
                    f"{what} denominator vanishes at dual index {tuple(win.dual_idx[j])}",
                    offending=tuple(int(t) for t in win.dual_idx[j]),
                )

        if component == "full":
            check(denom_band, "band-gap")
            return 1.0 / denom_band
        if component == "beta0":
            check(denom_real.astype(complex), "beta = 0")
            return 1.0 / denom_real.astype(complex)
        if component == "remainder":
            check(denom_band, "band-gap")
            check(denom_real.astype(complex), "beta = 0")
            numer = 2j * (win.v @ beta) - beta @ beta
            return numer / (denom_band * denom_real)
        raise ValueError(f"unknown component {component!r}")

    def matrix(self, beta, k: float, component: str = "full") -> np.ndarray:
        beta = np.asarray(beta, dtype=float).reshape(2)
        n_res = len(self.resonators)
        size = 2 * self.K + 1
        out = np.zeros((n_res * size, n_res * size), dtype=complex)
        for win in self.windows:
            base = self._weights(win, beta, k, component)
            for i in range(n_res):
                for j in range(n_res):
                    pref = 2.0 * math.pi * self.resonators[j].radius / self.lat.cell_area
                    pair_phase = win.center_phase[i] * np.conj(win.center_phase[j])
                    weighted = win.row_factors[i] * (base * pair_phase)[None, :]
                    out[i * size : (i + 1) * size, j * size : (j + 1) * size] += pref * (
                        weighted @ win.col_factors[j].T
                    )
        return out / len(self.windows)

    def apply(self, beta, k: float, coeffs: np.ndarray, targets, component: str = "full"):
        """Evaluate the discretized layer potential at arbitrary points.

        ``coeffs`` has shape (N, 2K+1); this is an independent evaluation
        route (no row-side projection), useful for validating solves.
        """
        beta = np.asarray(beta, dtype=float).reshape(2)
        targets = np.atleast_2d(np.asarray(targets, dtype=float))
        coeffs = np.asarray(coeffs, dtype=complex)
        values = np.zeros(len(targets), dtype=complex)
        for win in self.windows:
            base = self._weights(win, beta, k, component)
            target_phase = np.exp(1j * (targets @ win.v.T))  # (P, M)
            for j, res in enumerate(self.resonators):
                pref = 2.0 * math.pi * res.radius / self.lat.cell_area
                density_side = coeffs[j] @ win.col_factors[j]  # (M,)
                values += pref * (
                    target_phase @ (base * np.conj(win.center_phase[j]) * density_side)
                )
        return values / len(self.windows)


def equilibrated_condition(matrix: np.ndarray) -> float:
    """Condition number after symmetric diagonal scaling.

    The raw matrix is badly scaled for small radii (rows/columns of high
    Fourier order shrink like J_m(R|v|)); equilibration exposes the
    physically meaningful invertibility.
    """
    d = np.abs(np.diag(matrix))
    if np.any(d == 0.0) or not np.all(np.isfinite(d)):
        return float(np.linalg.cond(matrix))
    s = 1.0 / np.sqrt(d)
    return float(np.linalg.cond(matrix * np.outer(s, s)))


def slp_matrix(
    resonators,
    lat: Lattice2D,
    q: ComplexQuasimomentum,
    k: float = 0.0,
    K: int = 5,
    trunc: DualTruncation = DualTruncation(10),
    component: str = "full",
    config: NumericsConfig = DEFAULT_CONFIG,
    check_truncation: float | None = None,
) -> SlpMatrix:
    """Discretized single-layer potential at complex quasimomentum.

    ``component`` selects the full band-gap operator, its beta = 0 part, or
    the absolutely convergent remainder. With ``check_truncation`` set, the
    assembly is repeated on a window enlarged by 2 and the largest entry
    movement must stay below the given tolerance.
    """
    asm = SlpAssembler(resonators, lat, q.alpha, K, trunc, config)
    entries = asm.matrix(q.beta, k, component)
    if check_truncation is not None:
        bigger = SlpAssembler(
            resonators, lat, q.alpha, K, DualTruncation(trunc.n + 2), config
        ).matrix(q.beta, k, component)
        drift = float(np.max(np.abs(bigger - entries)))
        if drift > check_truncation:
            raise TruncationTooSmall(
                f"entries move by {drift:.3e} (> {check_truncation:.1e}) "
                f"when the window grows from {trunc.n} to {trunc.n + 2}"
            )
    return SlpMatrix(entries, K, len(asm.resonators))


def exp_beta_fourier(beta, radius: float, K: int, sign: int = 1) -> np.ndarray:
    """Fourier coefficients of e^{sign * beta.x} on a circle of given radius.

    f_n = e^{-i n arg(beta)} I_n(R|beta|) for sign +1; sign -1 flips beta,
    appending (-1)^n. Index n is stored at position n + K.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    beta = np.asarray(beta, dtype=float).reshape(2)
    if sign == -1:
        beta = -beta
    mag = float(np.linalg.norm(beta))
    psi = math.atan2(beta[1], beta[0])
    orders = np.arange(-K, K + 1)
    return np.exp(-1j * orders * psi) * iv(orders, radius * mag)


def capacitance_2d(
    resonators,
    lat: Lattice2D,
    q: ComplexQuasimomentum,
    K: int = 5,
    trunc: DualTruncation = DualTruncation(10),
    config: NumericsConfig = DEFAULT_CONFIG,
    assembler: SlpAssembler | None = None,
) -> np.ndarray:
    """Generalized 2D capacitance matrix at complex quasimomentum.

    Solves S psi_j = e^{beta.x} on boundary j for each j (at k = 0) and
    pairs the solutions against e^{-beta.x} on boundary i:
    C_ij = -(v_i^2/|D_i|) int_{bd D_i} e^{-beta.x} psi_j. Raises SingularSLP
    when the discretized operator is too ill-conditioned to trust.
    """
    asm = assembler or SlpAssembler(resonators, lat, q.alpha, K, trunc, config)
    res = asm.resonators
    beta = q.beta
    s = asm.matrix(beta, 0.0, "full")
    cond = equilibrated_condition(s)
    if not np.isfinite(cond) or cond > config.slp_condition_cap:
        raise SingularSLP(f"single-layer matrix condition number {cond:.3e} exceeds cap")
    n_res = len(res)
    size = 2 * asm.K + 1
    rhs = np.zeros((n_res * size, n_res), dtype=complex)
    for j, rj in enumerate(res):
        try:
            center_weight = math.exp(float(beta @ rj.center))
        except OverflowError as exc:
            raise SingularSLP(f"exp(beta.center) overflows for |beta| = {np.linalg.norm(beta)}") from exc
        rhs[j * size : (j + 1) * size, j] = center_weight * exp_beta_fourier(
            beta, rj.radius, asm.K, sign=1
        )
    psi = np.linalg.solve(s, rhs)
    cap = np.zeros((n_res, n_res), dtype=complex)
    for i, ri in enumerate(res):
        pairing = exp_beta_fourier(beta, ri.radius, asm.K, sign=-1)[::-1]  # g_{-n} over n
        weight = -2.0 * ri.wave_speed**2 / ri.radius * math.exp(-float(beta @ ri.center))
        cap[i, :] = weight * (pairing @ psi[i * size : (i + 1) * size, :])
    return cap


def subwavelength_bands_2d(
    resonators,
    lat: Lattice2D,
    q: ComplexQuasimomentum,
    delta: float,
    K: int = 5,
    trunc: DualTruncation = DualTruncation(10),
    config: NumericsConfig = DEFAULT_CONFIG,
    assembler: SlpAssembler | None = None,
):
    """Subwavelength bands sqrt(delta * lambda_n) of the capacitance matrix."""
    cap = capacitance_2d(resonators, lat, q, K, trunc, config, assembler)
    values = np.sort_complex(np.linalg.eigvals(cap))
    return [
        SubwavelengthBand.from_eigenvalue(lam, delta, i) for i, lam in enumerate(values)
    ]
