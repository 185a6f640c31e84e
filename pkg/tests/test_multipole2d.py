import math

import numpy as np
import pytest

from subwavebands.core import ComplexQuasimomentum, NumericsConfig
from subwavebands.errors import InvalidGeometry, RayleighSingular, SingularSLP, TruncationTooSmall
from subwavebands.lattice2d import DualTruncation, Lattice2D
from subwavebands.multipole2d import (
    CircularResonator,
    SlpAssembler,
    brillouin_representatives,
    capacitance_2d,
    equilibrated_condition,
    exp_beta_fourier,
    slp_matrix,
    subwavelength_bands_2d,
    validate_resonators,
)

SQUARE = Lattice2D.square(1.0)
TRUNC = DualTruncation(10)
DISK = CircularResonator([0.5, 0.5], 0.05)
M_POINT = np.array([math.pi, math.pi])
GENERIC = np.array([1.2, 0.7])


def dense_kernel_matrix(lat, alpha, beta, k, trunc, xs, ys):
    """Truncated band-gap kernel G(x_i - y_j) by plane-wave evaluation.

    Averaged over the same Brillouin representatives as the assembler, so
    the two sides discretize the identical operator.
    """
    reps = brillouin_representatives(lat, alpha)
    total = np.zeros((len(xs), len(ys)), dtype=complex)
    points, _ = trunc.points(lat)
    for rep in reps:
        v = rep[None, :] + points
        normsq = np.einsum("ij,ij->i", v, v)
        den = k * k + beta @ beta - 2j * (v @ beta) - normsq
        u = np.exp(1j * (xs @ v.T))
        w = np.exp(1j * (ys @ v.T))
        total += (u / den[None, :]) @ w.conj().T / lat.cell_area
    return total / len(reps)


def boundary_points(resonator, n):
    angles = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    return (
        resonator.center[None, :]
        + resonator.radius * np.column_stack([np.cos(angles), np.sin(angles)]),
        angles,
    )


def dense_slp_oracle(lat, resonator, alpha, beta, k, trunc, K, n_quad=256):
    """Fourier-projected dense quadrature of the single-layer potential."""
    xs, thetas = boundary_points(resonator, n_quad)
    g = dense_kernel_matrix(lat, alpha, beta, k, trunc, xs, xs)
    orders = np.arange(-K, K + 1)
    project = np.exp(-1j * np.outer(orders, thetas)) / n_quad  # row projection
    expand = np.exp(1j * np.outer(orders, thetas))  # density samples
    weight = 2.0 * math.pi / n_quad * resonator.radius
    return project @ g @ expand.T * weight


def dense_capacitance_oracle(lat, resonator, alpha, beta, trunc, n_quad=512):
    """Nystrom solve of the k = 0 boundary equation on a fine angular grid."""
    xs, _ = boundary_points(resonator, n_quad)
    g = dense_kernel_matrix(lat, alpha, beta, 0.0, trunc, xs, xs)
    weight = 2.0 * math.pi / n_quad * resonator.radius
    rhs = np.exp(xs @ beta)
    density = np.linalg.solve(g * weight, rhs)
    integral = np.sum(np.exp(-(xs @ beta)) * density) * weight
    return -(resonator.wave_speed**2 / resonator.area) * integral


class TestResonatorValidation:
    def test_overlap_rejected(self):
        with pytest.raises(InvalidGeometry):
            validate_resonators(
                [CircularResonator([0.4, 0.5], 0.1), CircularResonator([0.55, 0.5], 0.1)],
                SQUARE,
            )

    def test_cell_containment(self):
        with pytest.raises(InvalidGeometry):
            validate_resonators([CircularResonator([0.02, 0.5], 0.05)], SQUARE)

    def test_image_touching_rejected(self):
        # the inscribed disk passes the (non-strict) containment margins but
        # touches its own periodic images
        with pytest.raises(InvalidGeometry):
            validate_resonators([CircularResonator([0.5, 0.5], 0.5)], SQUARE)

    def test_valid_pair(self):
        validate_resonators(
            [CircularResonator([0.25, 0.5], 0.05), CircularResonator([0.6, 0.5], 0.05)],
            SQUARE,
        )


class TestRepresentatives:
    def test_counts(self):
        assert len(brillouin_representatives(SQUARE, M_POINT)) == 4
        assert len(brillouin_representatives(SQUARE, [math.pi, 0.0])) == 2
        assert len(brillouin_representatives(SQUARE, GENERIC)) == 1

    def test_mirrors(self):
        reps = brillouin_representatives(SQUARE, [math.pi, 0.0])
        assert any(np.allclose(r, [-math.pi, 0.0]) for r in reps)


class TestExpBetaFourier:
    def test_zero_beta(self):
        coeffs = exp_beta_fourier([0.0, 0.0], 0.05, 4)
        want = np.zeros(9)
        want[4] = 1.0
        assert np.array_equal(coeffs, want)

    def test_quadrature_oracle(self):
        beta = np.array([0.8, -0.45])
        radius, K = 0.3, 6
        coeffs = exp_beta_fourier(beta, radius, K)
        thetas = np.linspace(0.0, 2.0 * math.pi, 4096, endpoint=False)
        xs = radius * np.column_stack([np.cos(thetas), np.sin(thetas)])
        values = np.exp(xs @ beta)
        for n in range(-K, K + 1):
            quad = np.mean(values * np.exp(-1j * n * thetas))
            assert abs(coeffs[n + K] - quad) < 1e-12

    def test_reconstruction_real_positive(self):
        beta = np.array([0.5, 0.2])
        coeffs = exp_beta_fourier(beta, 0.4, 12)
        orders = np.arange(-12, 13)
        for theta in np.linspace(0.0, 2.0 * math.pi, 32, endpoint=False):
            val = np.sum(coeffs * np.exp(1j * orders * theta))
            assert abs(val.imag) < 1e-12
            assert val.real > 0.0

    def test_sign_flip(self):
        beta = np.array([0.3, 0.7])
        plus = exp_beta_fourier(beta, 0.2, 5, sign=1)
        minus = exp_beta_fourier(beta, 0.2, 5, sign=-1)
        orders = np.arange(-5, 6)
        assert np.allclose(minus, (-1.0) ** orders * plus, atol=1e-15)

    def test_validation(self):
        with pytest.raises(ValueError):
            exp_beta_fourier([0.1, 0.0], -1.0, 3)
        with pytest.raises(ValueError):
            exp_beta_fourier([0.1, 0.0], 1.0, 3, sign=2)


class TestSlpMatrix:
    def test_single_term_closed_form(self):
        # K = 0, n = 0 window: one dual point, order (0, 0)
        alpha = GENERIC
        beta = np.array([0.2, 0.1])
        k = 0.4
        got = slp_matrix(
            [DISK], SQUARE, ComplexQuasimomentum(alpha, beta), k, K=0, trunc=DualTruncation(0)
        ).entries[0, 0]
        from scipy.special import jv

        denom = k * k + beta @ beta - 2j * (alpha @ beta) - alpha @ alpha
        want = (
            2.0 * math.pi * DISK.radius * jv(0, DISK.radius * np.linalg.norm(alpha)) ** 2 / denom
        )
        assert abs(got - want) < 1e-15 * abs(want)

    @pytest.mark.parametrize("alpha", [GENERIC, M_POINT], ids=["generic", "zone-corner"])
    def test_against_dense_quadrature_beta0(self, alpha):
        q = ComplexQuasimomentum(alpha, [0.0, 0.0])
        got = slp_matrix([DISK], SQUARE, q, 0.4, K=3, trunc=DualTruncation(6)).entries
        oracle = dense_slp_oracle(SQUARE, DISK, np.asarray(alpha, float), np.zeros(2), 0.4,
                                  DualTruncation(6), 3)
        assert np.max(np.abs(got - oracle)) < 1e-6 * np.max(np.abs(got))

    def test_against_dense_quadrature_complex(self):
        beta = np.array([0.25, 0.1])
        q = ComplexQuasimomentum(GENERIC, beta)
        got = slp_matrix([DISK], SQUARE, q, 0.4, K=3, trunc=DualTruncation(6)).entries
        oracle = dense_slp_oracle(SQUARE, DISK, GENERIC, beta, 0.4, DualTruncation(6), 3)
        assert np.max(np.abs(got - oracle)) < 1e-10 * np.max(np.abs(got))

    def test_conjugation_symmetry(self):
        # entry (m, n) at alpha equals (-1)^(m-n) conj(entry (n, m) at -alpha)
        beta = np.array([0.25, 0.1])
        K = 3
        s_pos = slp_matrix(
            [DISK], SQUARE, ComplexQuasimomentum(GENERIC, beta), 0.4, K, DualTruncation(6)
        ).entries
        s_neg = slp_matrix(
            [DISK], SQUARE, ComplexQuasimomentum(-GENERIC, beta), 0.4, K, DualTruncation(6)
        ).entries
        orders = np.arange(-K, K + 1)
        m_grid, n_grid = np.meshgrid(orders, orders, indexing="ij")
        twisted = ((-1.0) ** (m_grid - n_grid)) * np.conj(s_neg.T)
        assert np.max(np.abs(s_pos - twisted)) < 1e-12 * np.max(np.abs(s_pos))

    def test_split_consistency(self):
        q = ComplexQuasimomentum(GENERIC, [0.3, -0.2])
        parts = {
            comp: slp_matrix([DISK], SQUARE, q, 0.5, 4, TRUNC, component=comp).entries
            for comp in ("full", "beta0", "remainder")
        }
        drift = np.max(np.abs(parts["full"] - parts["beta0"] - parts["remainder"]))
        assert drift < 1e-13 * np.max(np.abs(parts["full"]))

    def test_hermitian_at_beta_zero(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            alpha = rng.uniform(-math.pi, math.pi, 2)
            if np.linalg.norm(alpha) < 0.3:
                continue
            s = slp_matrix(
                [DISK], SQUARE, ComplexQuasimomentum(alpha, [0.0, 0.0]), 0.4, 4, TRUNC
            ).entries
            assert np.max(np.abs(s - s.conj().T)) < 1e-10 * np.max(np.abs(s))

    def test_entries_independent_of_multipole_order(self):
        # the angular integrals are exact, so growing K only appends
        # rows/columns; the shared block moves at machine level only
        # (matmul batching), far below any physical tolerance
        q = ComplexQuasimomentum(M_POINT, [0.2, 0.14])
        small = slp_matrix([DISK], SQUARE, q, 0.0, 5, TRUNC).entries
        large = slp_matrix([DISK], SQUARE, q, 0.0, 7, TRUNC).entries
        drift = np.max(np.abs(large[2:-2, 2:-2] - small))
        assert drift < 1e-15 * np.max(np.abs(small))

    def test_truncation_check(self):
        q = ComplexQuasimomentum(GENERIC, [0.3, 0.1])
        with pytest.raises(TruncationTooSmall):
            slp_matrix([DISK], SQUARE, q, 0.5, 2, DualTruncation(2), check_truncation=1e-14)
        slp_matrix([DISK], SQUARE, q, 0.5, 2, DualTruncation(2), check_truncation=1.0)

    def test_rayleigh_guard(self):
        beta = math.sqrt(2.0) * math.pi * np.array([1.0, 1.0]) / math.sqrt(2.0)
        with pytest.raises(RayleighSingular):
            slp_matrix([DISK], SQUARE, ComplexQuasimomentum(M_POINT, beta), 0.0, 3, TRUNC)


class TestCapacitance:
    def test_value_and_positivity_at_zone_corner(self):
        cap = capacitance_2d([DISK], SQUARE, ComplexQuasimomentum(M_POINT, [0.0, 0.0]), K=5, trunc=TRUNC)
        assert cap.shape == (1, 1)
        assert abs(cap[0, 0].imag) < 1e-10 * abs(cap[0, 0])
        assert cap[0, 0].real > 0.0
        # frozen reference value of this discretization (K=5, window 10)
        assert math.isclose(cap[0, 0].real, 351.1317440325, rel_tol=1e-9)

    def test_against_dense_nystrom_oracle(self):
        cap = capacitance_2d([DISK], SQUARE, ComplexQuasimomentum(M_POINT, [0.0, 0.0]), K=5, trunc=TRUNC)
        oracle = dense_capacitance_oracle(SQUARE, DISK, M_POINT, np.zeros(2), TRUNC)
        assert abs(oracle.imag) < 1e-8 * abs(oracle)
        assert abs(cap[0, 0].real - oracle.real) < 1e-4 * abs(oracle.real)

    def test_oracle_agreement_with_decay(self):
        beta = np.array([0.3, 0.12])
        cap = capacitance_2d([DISK], SQUARE, ComplexQuasimomentum(GENERIC, beta), K=5, trunc=TRUNC)
        oracle = dense_capacitance_oracle(SQUARE, DISK, GENERIC, beta, TRUNC)
        assert abs(cap[0, 0] - oracle) < 1e-4 * abs(oracle)

    def test_hermitian_at_beta_zero(self):
        rng = np.random.default_rng(4)
        dimer = [CircularResonator([0.25, 0.5], 0.05), CircularResonator([0.6, 0.5], 0.05)]
        for _ in range(10):
            alpha = rng.uniform(-math.pi, math.pi, 2)
            if np.linalg.norm(alpha) < 0.3:
                continue
            cap = capacitance_2d(dimer, SQUARE, ComplexQuasimomentum(alpha, [0.0, 0.0]), K=4, trunc=TRUNC)
            assert np.max(np.abs(cap - cap.conj().T)) < 1e-10 * np.max(np.abs(cap))

    def test_kernel_property(self):
        # e^{-beta.x} S[psi_i](x) must equal 1 on the defining boundary;
        # evaluation goes through the independent point-evaluation route
        for beta in (np.array([0.5, 0.0]), np.array([0.35, -0.35])):
            asm = SlpAssembler([DISK], SQUARE, M_POINT, 5, TRUNC)
            s = asm.matrix(beta, 0.0, "full")
            rhs = math.exp(beta @ DISK.center) * exp_beta_fourier(beta, DISK.radius, 5)
            psi = np.linalg.solve(s, rhs)
            pts, _ = boundary_points(DISK, 64)
            values = np.exp(-(pts @ beta)) * asm.apply(beta, 0.0, psi[None, :], pts)
            assert np.max(np.abs(values - 1.0)) < 1e-4

    def test_kernel_property_cross_boundary(self):
        dimer = [CircularResonator([0.25, 0.5], 0.05), CircularResonator([0.6, 0.5], 0.05)]
        beta = np.array([0.2, 0.1])
        asm = SlpAssembler(dimer, SQUARE, GENERIC, 5, TRUNC)
        s = asm.matrix(beta, 0.0, "full")
        size = 11
        rhs = np.zeros(2 * size, dtype=complex)
        rhs[:size] = math.exp(beta @ dimer[0].center) * exp_beta_fourier(beta, 0.05, 5)
        psi = np.linalg.solve(s, rhs).reshape(2, size)
        pts0, _ = boundary_points(dimer[0], 64)
        pts1, _ = boundary_points(dimer[1], 64)
        on_own = np.exp(-(pts0 @ beta)) * asm.apply(beta, 0.0, psi, pts0)
        on_other = np.exp(-(pts1 @ beta)) * asm.apply(beta, 0.0, psi, pts1)
        assert np.max(np.abs(on_own - 1.0)) < 1e-4
        assert np.max(np.abs(on_other)) < 1e-4

    def test_multipole_order_drift_small(self):
        q = ComplexQuasimomentum(M_POINT, [0.0, 0.0])
        c5 = capacitance_2d([DISK], SQUARE, q, K=5, trunc=TRUNC)[0, 0].real
        c7 = capacitance_2d([DISK], SQUARE, q, K=7, trunc=TRUNC)[0, 0].real
        assert abs(c5 - c7) < 1e-2

    def test_small_beta_continuity(self):
        q0 = ComplexQuasimomentum(GENERIC, [0.0, 0.0])
        base = capacitance_2d([DISK], SQUARE, q0, K=5, trunc=TRUNC)
        r1 = np.linalg.norm(
            capacitance_2d([DISK], SQUARE, ComplexQuasimomentum(GENERIC, [1e-3, 5e-4]), K=5, trunc=TRUNC) - base
        )
        r2 = np.linalg.norm(
            capacitance_2d([DISK], SQUARE, ComplexQuasimomentum(GENERIC, [5e-4, 2.5e-4]), K=5, trunc=TRUNC) - base
        )
        assert 2.0 ** 0.9 <= r1 / r2 <= 2.0 ** 1.1

    def test_wave_speed_row_scaling(self):
        dimer = [CircularResonator([0.25, 0.5], 0.05), CircularResonator([0.6, 0.5], 0.05)]
        scaled = [CircularResonator([0.25, 0.5], 0.05, wave_speed=3.0), dimer[1]]
        q = ComplexQuasimomentum(GENERIC, [0.1, 0.05])
        base = capacitance_2d(dimer, SQUARE, q, K=4, trunc=TRUNC)
        mod = capacitance_2d(scaled, SQUARE, q, K=4, trunc=TRUNC)
        assert np.allclose(mod[0, :], 9.0 * base[0, :], rtol=1e-13)
        assert np.allclose(mod[1, :], base[1, :], rtol=1e-13)

    def test_singular_guard(self):
        q = ComplexQuasimomentum(GENERIC, [0.2, 0.1])
        with pytest.raises(SingularSLP):
            capacitance_2d([DISK], SQUARE, q, K=5, trunc=TRUNC,
                           config=NumericsConfig(slp_condition_cap=1.0))

    def test_equilibrated_condition_moderate_for_dilute(self):
        tiny = CircularResonator([0.5, 0.5], 0.005)
        asm = SlpAssembler([tiny], SQUARE, M_POINT, 5, TRUNC)
        s = asm.matrix(np.array([0.3, 0.2]), 0.0, "full")
        assert np.linalg.cond(s) > 1e10  # raw scaling hides the physics
        assert equilibrated_condition(s) < 1e3


class TestBands2D:
    def test_long_wavelength_limit(self):
        lams = []
        for scale in (0.2, 0.1, 0.05):
            q = ComplexQuasimomentum(scale * M_POINT, [0.0, 0.0])
            lams.append(subwavelength_bands_2d([DISK], SQUARE, q, 1e-3, K=4, trunc=TRUNC)[0].eigenvalue.real)
        assert lams[0] > lams[1] > lams[2] > 0.0
        assert lams[2] < 0.1 * lams[0]

    def test_dimer_gap_at_zone_corner(self):
        dimer = [CircularResonator([0.25, 0.5], 0.05), CircularResonator([0.6, 0.5], 0.05)]
        q = ComplexQuasimomentum(M_POINT, [0.0, 0.0])
        bands = subwavelength_bands_2d(dimer, SQUARE, q, 1e-3, K=5, trunc=TRUNC)
        assert len(bands) == 2
        assert bands[0].omega.real < bands[1].omega.real
        assert bands[1].omega.real - bands[0].omega.real > 0.01
