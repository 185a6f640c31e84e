"""Complex band sweeps in 2D: roots of Im omega(alpha, t*beta_dir) = 0.

For each alpha along a Brillouin path, gap branches are located by Muller
iteration on the imaginary part of the subwavelength frequency as a
function of the decay magnitude t, continued across alpha samples by
nearest-root tracking. Capacitance singularities are scanned separately.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .core import (
    DEFAULT_CONFIG,
    BrillouinPath,
    ComplexQuasimomentum,
    NumericsConfig,
    subwavelength_frequency,
)
from .errors import NoConvergence, NumericsError, Stagnation
from .lattice2d import DualTruncation, Lattice2D, rayleigh_singularities
from .multipole2d import SlpAssembler, capacitance_2d, equilibrated_condition


def muller_root(f, seeds, tol: float = 1e-12, max_iter: int = 80):
    """Muller's method: root of f from three seeds, |f(root)| < tol.

    The next iterate is the zero of the quadratic through the last three
    points, picking the denominator of larger magnitude. Raises
    NoConvergence at the iteration cap and Stagnation when steps collapse
    with the residual still large.
    """
    x0, x1, x2 = (complex(s) for s in seeds)
    if len({x0, x1, x2}) != 3:
        raise ValueError("seeds must be three distinct points")
    f0, f1, f2 = complex(f(x0)), complex(f(x1)), complex(f(x2))
    for value, point in ((f0, x0), (f1, x1), (f2, x2)):
        if not cmath.isfinite(value):
            raise NoConvergence(f"f not finite at seed {point}")
        if abs(value) < tol:
            return point
    for _ in range(max_iter):
        h1 = x1 - x0
        h2 = x2 - x1
        if h1 == 0 or h2 == 0:
            raise Stagnation("coincident iterates")
        d1 = (f1 - f0) / h1
        d2 = (f2 - f1) / h2
        a = (d2 - d1) / (h2 + h1)
        b = a * h2 + d2
        c = f2
        disc = cmath.sqrt(b * b - 4.0 * a * c)
        denom = b + disc if abs(b + disc) >= abs(b - disc) else b - disc
        if denom == 0:
            raise Stagnation("flat quadratic model")
        step = -2.0 * c / denom
        x3 = x2 + step
        f3 = complex(f(x3))
        if not cmath.isfinite(f3):
            raise NoConvergence(f"f not finite at iterate {x3}")
        if abs(f3) < tol:
            return x3
        if abs(step) < 1e-15 * max(1.0, abs(x3)):
            raise Stagnation(f"step collapsed at {x3} with |f| = {abs(f3):.3e}")
        x0, x1, x2 = x1, x2, x3
        f0, f1, f2 = f1, f2, f3
    raise NoConvergence(f"no root within {max_iter} iterations, |f| = {abs(f2):.3e}")


@dataclass(frozen=True)
class BandSample:
    """One emitted point of the complex band structure."""

    kind: str  # "bulk" | "gap" | "zero"
    alpha: np.ndarray
    path_pos: float
    t: float  # |beta| along the decay direction
    omega: float
    band: int
    branch_id: int = -1


@dataclass
class GapBranch2D:
    """Samples of one tracked gap branch along the alpha path."""

    branch_id: int
    beta_dir: np.ndarray
    samples: list = field(default_factory=list)


@dataclass
class Sweep2DResult:
    samples: list
    branches: list
    failures: list
    ticks: list


@dataclass(frozen=True)
class SweepConfig:
    """Seeding, range and refinement knobs for the gap sweep."""

    scan_points: int = 160
    t_min: float = 1e-2
    t_max: float | None = None  # absolute; None derives span_factor * first singularity
    span_factor: float = 2.8
    fallback_span: float = 8.0
    dedupe_tol: float = 1e-6
    omega_cap: float | None = None
    zero_im_rtol: float = 1e-3
    # bisect path segments while matched roots jump more than this in omega
    omega_resolution: float | None = None
    max_refinements: int = 200


def _first_singularity_estimate(
    asm: SlpAssembler, beta_dir: np.ndarray, lat: Lattice2D, sweep_cfg: SweepConfig
) -> float:
    """Distance (in t) to the first Rayleigh point, else a sigma_min scan."""
    hits = rayleigh_singularities(asm.alpha, 0.0, beta_dir, lat, sweep_cfg.fallback_span * 2.0)
    positive = [h.beta_magnitude for h in hits if h.beta_magnitude > 1e-9]
    if positive:
        return min(positive)
    # No exact Rayleigh point on this axis: look for the first sharp rise of
    # the equilibrated condition number (loss of invertibility).
    ts = np.linspace(0.0, sweep_cfg.fallback_span, 49)[1:]
    conds = np.empty(len(ts))
    for i, t in enumerate(ts):
        try:
            conds[i] = equilibrated_condition(asm.matrix(t * beta_dir, 0.0, "full"))
        except NumericsError:
            conds[i] = float("inf")
    floor = 100.0 * float(np.median(conds[np.isfinite(conds)]))
    for i in range(1, len(ts) - 1):
        if conds[i] > floor and conds[i] >= conds[i - 1] and conds[i] >= conds[i + 1]:
            return float(ts[i])
    return sweep_cfg.fallback_span


def gap_sweep_2d(
    resonators,
    lat: Lattice2D,
    path: BrillouinPath,
    beta_dir,
    delta: float,
    K: int = 5,
    trunc: DualTruncation = DualTruncation(10),
    config: NumericsConfig = DEFAULT_CONFIG,
    sweep_cfg: SweepConfig = SweepConfig(),
    threads: int = 1,
) -> Sweep2DResult:
    """Bulk bands plus gap branches along a path, decay along beta_dir.

    Per alpha sample: bulk bands are the t = 0 eigenvalues; gap roots come
    from Muller polishing of scan candidates over a range that extends past
    the first singularity; a coarse scan also picks up eigenvalue zero
    crossings (the zero-frequency branch). Per-sample failures are recorded,
    never raised. ``threads`` parallelizes the base path points; output is
    ordered and independent of the thread count.
    """
    beta_dir = np.asarray(beta_dir, dtype=float).reshape(2)
    norm = np.linalg.norm(beta_dir)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError("beta_dir must be a unit vector")
    if delta <= 0:
        raise ValueError("delta must be positive")
    points, coords, ticks = path.sample()
    n_bands = len(resonators)
    samples: list[BandSample] = []
    failures: list[tuple] = []

    def process(alpha: np.ndarray, pos: float):
        """Root-find at one path point, without touching shared state.

        Returns (local samples, local failures, per-band root list or None).
        """
        local_samples: list[BandSample] = []
        local_failures: list[tuple] = []
        try:
            asm = SlpAssembler(resonators, lat, alpha, K, trunc, config)
        except NumericsError as exc:
            local_failures.append((alpha, f"assembler: {exc}"))
            return local_samples, local_failures, None

        def eigs_at(t: float) -> np.ndarray:
            cap = capacitance_2d(
                resonators, lat, ComplexQuasimomentum(alpha, t * beta_dir),
                K, trunc, config, assembler=asm,
            )
            return np.sort_complex(np.linalg.eigvals(cap))

        try:
            lams0 = eigs_at(0.0)
        except NumericsError as exc:
            local_failures.append((alpha, f"bulk: {exc}"))
            return local_samples, local_failures, None
        for b, lam in enumerate(lams0):
            omega = subwavelength_frequency(lam, delta)
            if abs(omega.imag) < config.root_tol:
                # eigensolver noise can land lambda just below the real axis,
                # where the Im >= 0 branch negates the real part
                local_samples.append(BandSample("bulk", alpha, pos, 0.0, abs(omega.real), b))

        t_max = sweep_cfg.t_max
        if t_max is None:
            t_sing = _first_singularity_estimate(asm, beta_dir, lat, sweep_cfg)
            t_max = sweep_cfg.span_factor * t_sing

        # one scan of the eigenvalues over t serves root seeding for every band
        ts = np.linspace(sweep_cfg.t_min, t_max, sweep_cfg.scan_points)
        lam_grid = np.full((len(ts), n_bands), complex("nan"))
        for i, t in enumerate(ts):
            try:
                lam_grid[i] = eigs_at(float(t))
            except NumericsError:
                pass

        per_band_roots: list[list[tuple]] = []
        for band in range(n_bands):

            def g_omega(t: float):
                try:
                    lam = eigs_at(float(t))[band]
                except NumericsError:
                    return None
                return subwavelength_frequency(lam, delta)

            def g(t: complex) -> complex:
                t_eval = abs(float(np.real(t)))
                if t_eval > 4.0 * t_max:
                    return complex("nan")
                omega = g_omega(t_eval)
                return complex("nan") if omega is None else complex(omega.imag)

            gs = np.array(
                [
                    subwavelength_frequency(lam, delta).imag if np.isfinite(lam) else np.nan
                    for lam in lam_grid[:, band]
                ]
            )
            # Muller candidates: sign changes and local minima of |Im omega|
            # (the latter catch tangent roots, where branches turn around).
            candidates = []
            for i in range(len(ts) - 1):
                if np.isfinite(gs[i]) and np.isfinite(gs[i + 1]) and gs[i] * gs[i + 1] < 0:
                    candidates.append(0.5 * (ts[i] + ts[i + 1]))
            absg = np.abs(gs)
            for i in range(1, len(ts) - 1):
                if (
                    np.isfinite(absg[i - 1 : i + 2]).all()
                    and absg[i] <= absg[i - 1]
                    and absg[i] <= absg[i + 1]
                ):
                    candidates.append(float(ts[i]))

            h = 0.4 * (ts[1] - ts[0])
            roots: list[float] = []
            for seed in candidates:
                try:
                    root = muller_root(
                        g, (seed - h, seed, seed + h), config.root_tol, config.muller_max_iter
                    )
                except (NumericsError, ValueError):
                    continue
                t_root = abs(float(np.real(root)))
                if not (sweep_cfg.t_min < t_root <= t_max):
                    continue
                if any(abs(t_root - r) < sweep_cfg.dedupe_tol for r in roots):
                    continue
                roots.append(t_root)

            kept: list[tuple] = []
            for t_root in sorted(roots):
                try:
                    lam = eigs_at(t_root)[band]
                except NumericsError:
                    continue
                omega = subwavelength_frequency(lam, delta)
                if abs(omega.imag) >= config.root_tol:
                    continue
                omega_val = abs(omega.real)
                if sweep_cfg.omega_cap is not None and omega_val > sweep_cfg.omega_cap:
                    continue
                kept.append((float(t_root), omega_val))

            if sweep_cfg.omega_resolution is not None:
                kept = _densify_in_t(g_omega, kept, sweep_cfg, config)
            for t_root, omega_root in kept:
                local_samples.append(BandSample("gap", alpha, pos, t_root, omega_root, band))
            per_band_roots.append(kept)

            # zero-frequency branch: the eigenvalue itself crossing zero.
            # Truncation leaves a small imaginary residue even at symmetric
            # alpha, so realness is judged against the bulk eigenvalue scale.
            scale0 = max(abs(lams0[band]), 1.0)
            im_tol = sweep_cfg.zero_im_rtol * scale0

            def lam_band(t: float):
                try:
                    return eigs_at(t)[band]
                except NumericsError:
                    return None

            def lam_real(t: float) -> float:
                lam = lam_band(t)
                return float("nan") if lam is None else lam.real

            for i in range(len(ts) - 1):
                lam_a, lam_b = lam_grid[i, band], lam_grid[i + 1, band]
                if not (np.isfinite(lam_a) and np.isfinite(lam_b)):
                    continue
                if abs(lam_a.imag) > im_tol or abs(lam_b.imag) > im_tol:
                    continue
                if lam_a.real * lam_b.real >= 0.0:
                    continue
                try:
                    t0 = brentq(lam_real, float(ts[i]), float(ts[i + 1]), xtol=1e-11)
                except (ValueError, TypeError):
                    continue
                lam0 = lam_band(float(t0))
                if lam0 is not None and abs(lam0) <= im_tol:
                    local_samples.append(BandSample("zero", alpha, pos, float(t0), 0.0, band))
        return local_samples, local_failures, per_band_roots

    # segment id per base point so refinement never interpolates across a vertex
    tick_positions = [coords[i] for i, _ in ticks]
    work = [(alpha, float(pos)) for alpha, pos in zip(points, coords)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(lambda ap: process(*ap), work))
    else:
        outcomes = [process(*ap) for ap in work]
    processed = []  # (pos, alpha, per_band_roots), kept sorted by pos
    for (alpha, pos), (local_samples, local_failures, roots) in zip(work, outcomes):
        samples.extend(local_samples)
        failures.extend(local_failures)
        processed.append((pos, alpha, roots))

    if sweep_cfg.omega_resolution is not None:
        budget = sweep_cfg.max_refinements
        while budget > 0:
            split = _pick_refinement(processed, tick_positions, sweep_cfg)
            if split is None:
                break
            i, pos_mid, alpha_mid = split
            local_samples, local_failures, roots = process(alpha_mid, pos_mid)
            samples.extend(local_samples)
            failures.extend(local_failures)
            processed.insert(i + 1, (pos_mid, alpha_mid, roots))
            budget -= 1

    branches = _track_branches(samples, beta_dir)
    return Sweep2DResult(samples, branches, failures, ticks)


def _densify_in_t(g_omega, roots, sweep_cfg: SweepConfig, config: NumericsConfig):
    """Bisect between adjacent valid roots until omega steps are resolved.

    On symmetry rays Im omega vanishes along whole t-intervals; the Muller
    roots there are just scan-grid points and the branch can move through
    a wide omega range between them. Each inserted midpoint must itself
    validate as a root, so bisection stops at branch endpoints.
    """
    res = sweep_cfg.omega_resolution
    out = list(roots)
    stack = list(zip(roots, roots[1:]))
    guard = 0
    while stack and guard < 2000:
        (t1, w1), (t2, w2) = stack.pop()
        if abs(w2 - w1) <= res or abs(t2 - t1) < 1e-7:
            continue
        guard += 1
        tm = 0.5 * (t1 + t2)
        omega = g_omega(tm)
        if omega is None or abs(omega.imag) >= config.root_tol:
            continue
        omega_val = abs(omega.real)
        if sweep_cfg.omega_cap is not None and omega_val > sweep_cfg.omega_cap:
            continue
        mid = (tm, omega_val)
        out.append(mid)
        stack.append(((t1, w1), mid))
        stack.append((mid, (t2, w2)))
    return sorted(out)


def _splittable(processed, i, tick_positions) -> bool:
    pos_a, _, roots_a = processed[i]
    pos_b, _, roots_b = processed[i + 1]
    if roots_a is None or roots_b is None:
        return False
    if pos_b - pos_a < 1e-4:
        return False
    return not any(pos_a < tick < pos_b for tick in tick_positions)


def _pick_refinement(processed, tick_positions, sweep_cfg: SweepConfig):
    """Next path segment to bisect, or None when resolved.

    Priority 1: an uncovered window of emitted root frequencies, split at a
    neighbor pair whose roots bracket it (the root curve must cross the
    window in between). Priority 2: the worst nearest-t matched root pair
    jumping more than the resolution target.
    """
    res = sweep_cfg.omega_resolution
    pairs = [i for i in range(len(processed) - 1) if _splittable(processed, i, tick_positions)]

    def mid(i):
        pos_a, alpha_a, _ = processed[i]
        pos_b, alpha_b, _ = processed[i + 1]
        return i, 0.5 * (pos_a + pos_b), 0.5 * (alpha_a + alpha_b)

    # coverage windows over all emitted root frequencies
    omegas = sorted(
        w
        for _, _, roots in processed
        if roots is not None
        for band_roots in roots
        for _, w in band_roots
    )
    for w_lo, w_hi in zip(omegas, omegas[1:]):
        if w_hi - w_lo <= 2.0 * res:
            continue
        for i in pairs:
            _, _, roots_a = processed[i]
            _, _, roots_b = processed[i + 1]
            ws_a = [w for band_roots in roots_a for _, w in band_roots]
            ws_b = [w for band_roots in roots_b for _, w in band_roots]
            if not ws_a or not ws_b:
                continue
            below_a = any(w <= w_lo + 1e-12 for w in ws_a)
            above_a = any(w >= w_hi - 1e-12 for w in ws_a)
            below_b = any(w <= w_lo + 1e-12 for w in ws_b)
            above_b = any(w >= w_hi - 1e-12 for w in ws_b)
            if (below_a and above_b) or (above_a and below_b):
                return mid(i)

    worst = None
    for i in pairs:
        _, _, roots_a = processed[i]
        _, _, roots_b = processed[i + 1]
        jump = 0.0
        for band in range(min(len(roots_a), len(roots_b))):
            for t_a, w_a in roots_a[band]:
                if not roots_b[band]:
                    continue
                _, w_b = min(roots_b[band], key=lambda r: abs(r[0] - t_a))
                jump = max(jump, abs(w_b - w_a))
        if jump > res and (worst is None or jump > worst[0]):
            worst = (jump, i)
    if worst is None:
        return None
    return mid(worst[1])


def _track_branches(samples, beta_dir) -> list:
    """Assign branch ids to gap samples by nearest-t continuation in alpha.

    Tracking runs separately per eigenvalue band, in path order; unmatched
    roots open new branches, ties break toward smaller previous t.
    """
    branches: list[GapBranch2D] = []
    next_id = 0
    for band in sorted({s.band for s in samples if s.kind == "gap"}):
        by_pos: dict = {}
        for s in samples:
            if s.kind == "gap" and s.band == band:
                by_pos.setdefault(s.path_pos, []).append(s)
        prev_assign: dict = {}
        for pos in sorted(by_pos):
            here = sorted(by_pos[pos], key=lambda s: s.t)
            assign = {}
            used = set()
            for s in here:
                best = None
                for t_prev, bid in prev_assign.items():
                    if bid in used:
                        continue
                    d = abs(s.t - t_prev)
                    if best is None or (d, t_prev) < (best[0], best[1]):
                        best = (d, t_prev, bid)
                if best is not None:
                    bid = best[2]
                    used.add(bid)
                else:
                    bid = next_id
                    next_id += 1
                assign[s.t] = bid
                while bid >= len(branches):
                    branches.append(GapBranch2D(len(branches), np.asarray(beta_dir)))
                branches[bid].samples.append(s)
            prev_assign = assign
    return branches


@dataclass(frozen=True)
class SingularityHit:
    """One refined singular point of the t scan.

    kind "rayleigh_pole": a sum denominator blows up (matrix entries
    diverge; the capacitance dips to zero there). kind "inversion_pole":
    the equilibrated matrix loses invertibility (capacitance diverges).
    """

    t: float
    kind: str
    signal: float
    nearest_prediction: float | None
    distance: float | None


@dataclass
class ScanResult:
    ts: np.ndarray
    condition_raw: np.ndarray
    condition_equilibrated: np.ndarray
    lambda_max_abs: np.ndarray
    flagged: list
    predictions: list


def singularity_scan(
    resonators,
    lat: Lattice2D,
    alpha_fixed,
    beta_dir,
    t_grid,
    K: int = 5,
    trunc: DualTruncation = DualTruncation(10),
    config: NumericsConfig = DEFAULT_CONFIG,
    refine: bool = True,
) -> ScanResult:
    """Capacitance-singularity scan along a decay axis at fixed alpha.

    Tabulates raw and equilibrated condition numbers of the layer-potential
    matrix and the largest |capacitance eigenvalue| on the t grid. Local
    maxima of either condition signal are refined by golden-section search
    and reported with their distance to the nearest zero-frequency Rayleigh
    prediction. Singularities are data here: nothing raises.
    """
    alpha_fixed = np.asarray(alpha_fixed, dtype=float).reshape(2)
    beta_dir = np.asarray(beta_dir, dtype=float).reshape(2)
    beta_dir = beta_dir / np.linalg.norm(beta_dir)
    t_grid = np.asarray(t_grid, dtype=float)
    asm = SlpAssembler(resonators, lat, alpha_fixed, K, trunc, config)
    uncapped = replace(config, slp_condition_cap=float("inf"))

    def conds_at(t: float):
        try:
            s = asm.matrix(t * beta_dir, 0.0, "full")
            return float(np.linalg.cond(s)), equilibrated_condition(s)
        except NumericsError:
            return float("inf"), float("inf")

    cond_raw = np.empty(len(t_grid))
    cond_eq = np.empty(len(t_grid))
    lam_abs = np.empty(len(t_grid))
    for i, t in enumerate(t_grid):
        cond_raw[i], cond_eq[i] = conds_at(float(t))
        try:
            cap = capacitance_2d(
                resonators, lat, ComplexQuasimomentum(alpha_fixed, float(t) * beta_dir),
                K, trunc, config=uncapped, assembler=asm,
            )
            lam_abs[i] = float(np.max(np.abs(np.linalg.eigvals(cap))))
        except NumericsError:
            lam_abs[i] = float("inf")

    predictions = sorted(
        {
            round(h.beta_magnitude, 12)
            for h in rayleigh_singularities(
                alpha_fixed, 0.0, beta_dir, lat, float(t_grid[-1]) * 1.2
            )
            if h.beta_magnitude > 1e-9
        }
    )

    def lam_at(t: float) -> float:
        try:
            cap = capacitance_2d(
                resonators, lat, ComplexQuasimomentum(alpha_fixed, t * beta_dir),
                K, trunc, config=uncapped, assembler=asm,
            )
            return float(np.max(np.abs(np.linalg.eigvals(cap))))
        except NumericsError:
            return float("inf")

    signals = (
        ("rayleigh_pole", cond_raw, lambda t: conds_at(t)[0]),
        ("inversion_pole", cond_eq, lambda t: conds_at(t)[1]),
        ("capacitance_pole", lam_abs, lam_at),
    )
    flagged = []
    for kind, signal, picker in signals:
        finite = signal[np.isfinite(signal)]
        if len(finite) == 0:
            continue
        # mild candidate floor; the flag itself is decided after refinement
        floor = 3.0 * float(np.median(finite))
        cap_level = (
            config.slp_condition_cap if kind != "capacitance_pole" else 30.0 * float(np.median(finite))
        )
        for i in range(1, len(t_grid) - 1):
            if signal[i] > floor and signal[i] >= signal[i - 1] and signal[i] >= signal[i + 1]:
                t_star = (
                    _refine_peak(picker, float(t_grid[i - 1]), float(t_grid[i + 1]))
                    if refine
                    else float(t_grid[i])
                )
                value = picker(t_star)
                if not (value > cap_level or not np.isfinite(value)):
                    continue
                if any(h.kind == kind and abs(h.t - t_star) < 1e-6 for h in flagged):
                    continue
                nearest = min(predictions, key=lambda p: abs(p - t_star)) if predictions else None
                flagged.append(
                    SingularityHit(
                        t_star,
                        kind,
                        value,
                        nearest,
                        abs(t_star - nearest) if nearest is not None else None,
                    )
                )
    flagged.sort(key=lambda hit: hit.t)
    return ScanResult(t_grid, cond_raw, cond_eq, lam_abs, flagged, predictions)


def _refine_peak(f, lo: float, hi: float, iters: int = 80) -> float:
    """Golden-section maximization of f on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        if b - a < 1e-11 * max(1.0, abs(b)):
            break
    return 0.5 * (a + b)
