import math

import numpy as np
import pytest

from subwavebands.bands2d import (
    SweepConfig,
    gap_sweep_2d,
    muller_root,
    singularity_scan,
)
from subwavebands.core import BrillouinPath, ComplexQuasimomentum
from subwavebands.errors import NoConvergence, Stagnation
from subwavebands.lattice2d import DualTruncation, Lattice2D
from subwavebands.multipole2d import CircularResonator, capacitance_2d

SQUARE = Lattice2D.square(1.0)
DISK = CircularResonator([0.5, 0.5], 0.05)
DIAG = np.array([1.0, 1.0]) / math.sqrt(2.0)
PATH = BrillouinPath(
    (
        ("G", [0.0, 0.0]),
        ("M", [math.pi, math.pi]),
        ("X", [math.pi, 0.0]),
        ("G", [0.0, 0.0]),
    ),
    samples_per_segment=6,
)
FAST_CFG = SweepConfig(scan_points=100, t_max=13.5, omega_cap=1.2, omega_resolution=0.03,
                       max_refinements=20)


class TestMullerRoot:
    def test_polynomial(self):
        root = muller_root(lambda t: t * t - 4.0, (1.0, 2.5, 3.0), tol=1e-13)
        assert abs(root - 2.0) < 1e-12

    def test_cosh_anchor(self):
        root = muller_root(lambda t: np.cosh(t) - 1.1712, (0.4, 0.5, 0.6), tol=1e-13)
        assert abs(root - np.arccosh(1.1712)) < 1e-10

    def test_double_root(self):
        root = muller_root(lambda t: (t - 1.0) ** 2, (0.3, 0.6, 1.4), tol=1e-13)
        assert abs(root - 1.0) < 1e-6
        assert abs((root - 1.0) ** 2) < 1e-13

    def test_immediate_seed_hit(self):
        assert muller_root(lambda t: t - 2.0, (2.0, 1.0, 3.0), tol=1e-12) == 2.0

    def test_distinct_seeds_required(self):
        with pytest.raises(ValueError):
            muller_root(lambda t: t, (1.0, 1.0, 2.0))

    def test_max_iter(self):
        with pytest.raises(NoConvergence):
            muller_root(lambda t: np.exp(t), (0.0, 0.5, 1.0), tol=1e-200, max_iter=8)

    def test_stagnation(self):
        with pytest.raises(Stagnation):
            muller_root(lambda t: np.exp(-abs(t)) + 1.0, (0.1, 0.5, 0.9), max_iter=50)

    def test_nan_rejected(self):
        with pytest.raises(NoConvergence):
            muller_root(lambda t: complex("nan"), (0.1, 0.5, 0.9))

    def test_complex_root_reachable(self):
        root = muller_root(lambda t: t * t + 1.0, (0.5, 1.2, 2.0), tol=1e-12)
        assert min(abs(root - 1j), abs(root + 1j)) < 1e-10


@pytest.fixture(scope="module")
def small_sweep():
    return gap_sweep_2d([DISK], SQUARE, PATH, DIAG, delta=1e-3, K=5,
                        trunc=DualTruncation(10), sweep_cfg=FAST_CFG)


class TestGapSweep:
    def test_every_gap_sample_is_a_root(self, small_sweep):
        gap = [s for s in small_sweep.samples if s.kind == "gap"]
        assert gap
        rng = np.random.default_rng(0)
        for s in rng.choice(gap, size=min(25, len(gap)), replace=False):
            cap = capacitance_2d(
                [DISK], SQUARE, ComplexQuasimomentum(s.alpha, s.t * DIAG), K=5,
                trunc=DualTruncation(10),
            )
            lam = np.linalg.eigvals(cap)[s.band]
            omega = np.sqrt(1e-3 * lam + 0j)
            assert abs(omega.imag) < 1e-9
            assert abs(abs(omega.real) - s.omega) < 1e-9
            assert s.omega >= 0.0

    def test_bulk_rows_match_direct_route(self, small_sweep):
        from subwavebands.multipole2d import subwavelength_bands_2d

        bulk = [s for s in small_sweep.samples if s.kind == "bulk"]
        assert bulk
        for s in bulk[:10]:
            bands = subwavelength_bands_2d(
                [DISK], SQUARE, ComplexQuasimomentum(s.alpha, [0.0, 0.0]), 1e-3,
                K=5, trunc=DualTruncation(10),
            )
            assert abs(abs(bands[s.band].omega.real) - s.omega) < 1e-12

    def test_zero_branch_present_for_diagonal(self, small_sweep):
        zeros = [s for s in small_sweep.samples if s.kind == "zero"]
        assert zeros
        for s in zeros:
            assert s.omega == 0.0 and s.t > 0.0

    def test_gamma_endpoint_failure_recorded(self, small_sweep):
        assert len(small_sweep.failures) >= 1
        assert all(np.allclose(alpha, 0.0) for alpha, _ in small_sweep.failures)

    def test_branch_tracking_covers_gap_samples(self, small_sweep):
        tracked = sum(len(b.samples) for b in small_sweep.branches)
        gap = [s for s in small_sweep.samples if s.kind == "gap"]
        assert tracked == len(gap)
        for branch in small_sweep.branches:
            positions = [s.path_pos for s in branch.samples]
            assert positions == sorted(positions)

    def test_root_stability_under_tolerance_halving(self):
        # transversal root away from symmetry rays
        alpha = 0.8 * np.array([math.pi, math.pi])

        def g_factory(tol):
            def g(t):
                t_eval = abs(float(np.real(t)))
                cap = capacitance_2d(
                    [DISK], SQUARE, ComplexQuasimomentum(alpha, t_eval * DIAG), K=5,
                    trunc=DualTruncation(10),
                )
                lam = np.linalg.eigvals(cap)[0]
                return complex(np.sqrt(1e-3 * lam + 0j).imag)

            return g

        seeds = (2.2, 2.35, 2.5)
        root_a = muller_root(g_factory(1e-9), seeds, tol=1e-9)
        root_b = muller_root(g_factory(5e-10), seeds, tol=5e-10)
        assert abs(float(np.real(root_a)) - float(np.real(root_b))) < 10.0 * 1e-9

    def test_unit_direction_required(self):
        with pytest.raises(ValueError):
            gap_sweep_2d([DISK], SQUARE, PATH, [1.0, 1.0], delta=1e-3)


class TestSingularityScan:
    def test_dilute_hits_rayleigh_predictions(self):
        tiny = [CircularResonator([0.5, 0.5], 0.005)]
        scan = singularity_scan(
            tiny, SQUARE, [math.pi, math.pi], DIAG, np.linspace(0.05, 15.0, 300), K=5
        )
        assert np.allclose(scan.predictions, [math.sqrt(2) * math.pi, 3 * math.sqrt(2) * math.pi])
        for prediction in scan.predictions:
            nearest = min(abs(hit.t - prediction) for hit in scan.flagged)
            assert nearest < 0.02 * prediction

    def test_no_flag_near_zero_beta(self):
        tiny = [CircularResonator([0.5, 0.5], 0.005)]
        scan = singularity_scan(
            tiny, SQUARE, [math.pi, math.pi], DIAG, np.linspace(0.05, 15.0, 300), K=5
        )
        assert all(hit.t > 1.0 for hit in scan.flagged)

    def test_capacitance_pole_shift_grows_with_radius(self):
        hits = {}
        for radius in (0.005, 0.05):
            scan = singularity_scan(
                [CircularResonator([0.5, 0.5], radius)], SQUARE, [math.pi, math.pi],
                DIAG, np.linspace(0.05, 8.0, 160), K=5,
            )
            poles = [h for h in scan.flagged if h.kind == "capacitance_pole"]
            assert poles, f"no capacitance pole flagged for R={radius}"
            hits[radius] = min(poles, key=lambda h: h.t).distance
        assert hits[0.005] < hits[0.05]
