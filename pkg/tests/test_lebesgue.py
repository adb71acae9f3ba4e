import math

import numpy as np
import pytest
from scipy.integrate import quad

from kernopt.lebesgue import (
    abel_bound_1d,
    abel_bound_multi,
    adversarial_ratio_scan,
    b_envelope_constant,
    b_growth_constant,
    dirichlet_l1,
    effective_dimension,
    lebesgue_estimate,
    population_apply,
    product_effective_dimension,
    ratio_sequence,
    spectral_report,
    sqrt_deff_bound,
)
from kernopt.spectra import (
    EigenSequence,
    FourierBasis,
    adversarial_spectrum,
    matern_periodic_spectrum,
    mercer_kernel_1d,
    monotone_envelope,
    product_kernel,
)

LOG_B = lambda i: math.log(math.e + i)  # noqa: E731


class TestRatioSequence:
    def test_two_term_arithmetic(self):
        rs = ratio_sequence(EigenSequence(np.array([0.9, 0.1])), 0.1)
        np.testing.assert_allclose(rs.values, [0.9, 0.5])

    def test_equal_values(self):
        rs = ratio_sequence(EigenSequence(np.array([1.0, 1.0])), 1.0)
        np.testing.assert_allclose(rs.values, [0.5, 0.5])

    def test_zero_in_zero_out(self):
        rs = ratio_sequence(EigenSequence(np.zeros(5)), 0.3)
        assert np.all(rs.values == 0.0)

    def test_monotone_in_mu(self):
        mu = np.sort(np.random.default_rng(1).uniform(0, 2, 30))[::-1]
        rs = ratio_sequence(EigenSequence(mu.copy()), 0.7)
        assert np.all(np.diff(rs.values) <= 0)

    def test_preserves_tail_metadata(self):
        spec = EigenSequence(np.ones(4), "flat", tail_exponent=2.0,
                             tail_constant=1.0)
        rs = ratio_sequence(spec, 1.0)
        assert rs.source.tail_exponent == 2.0
        assert rs.indexing == "flat"

    def test_rejects_nonpositive_tau(self):
        with pytest.raises(ValueError):
            ratio_sequence(EigenSequence(np.ones(2)), 0.0)


class TestEffectiveDimension:
    def test_single_term(self):
        value, tail = effective_dimension(EigenSequence(np.array([1.0])), 1.0)
        assert value == 0.5
        assert tail == 0.0

    def test_all_zeros(self):
        value, tail = effective_dimension(EigenSequence(np.zeros(8)), 0.1)
        assert value == 0.0

    def test_inverse_square_against_brute_force(self):
        # oracle: 10^7-term partial sum of (i^-2)/(tau + i^-2)
        t = 4096
        i = np.arange(1, t + 1, dtype=float)
        spec = EigenSequence(i**-2.0, "flat", tail_exponent=2.0,
                             tail_constant=1.0)
        value, tail = effective_dimension(spec, 0.01)
        ib = np.arange(1, 10_000_001, dtype=float)
        mu = ib**-2.0
        brute = float(np.sum(mu / (0.01 + mu)))
        assert value <= brute + 1e-9
        assert brute <= value + tail

    def test_strictly_decreasing_in_tau(self):
        spec = matern_periodic_spectrum(1.5, 64)
        vals = [effective_dimension(spec, t)[0] for t in (1e-3, 1e-2, 1e-1, 1.0)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_reorder_invariant(self):
        rng = np.random.default_rng(3)
        mu = rng.uniform(0, 1, 40)
        a = effective_dimension(EigenSequence(mu.copy()), 0.2)
        b = effective_dimension(EigenSequence(rng.permutation(mu)), 0.2)
        assert a[0] == pytest.approx(b[0], rel=1e-13)

    def test_frequency_indexing_counts_pairs(self):
        spec = EigenSequence(np.array([1.0, 0.5]), "frequency")
        value, _ = effective_dimension(spec, 1.0)
        assert value == pytest.approx(0.5 + 2.0 * (0.5 / 1.5))

    def test_rejects_nonpositive_tau(self):
        with pytest.raises(ValueError):
            effective_dimension(EigenSequence(np.ones(2)), -1.0)


class TestSqrtDeffBound:
    def test_value_four_gives_two(self):
        spec = EigenSequence(np.ones(8))
        assert sqrt_deff_bound(spec, 1.0) == pytest.approx(2.0)

    def test_zero_spectrum(self):
        assert sqrt_deff_bound(EigenSequence(np.zeros(3)), 0.5) == 0.0

    def test_composes_with_effective_dimension(self):
        i = np.arange(1, 2049, dtype=float)
        spec = EigenSequence(i**-2.0, "flat", tail_exponent=2.0,
                             tail_constant=1.0)
        value, tail = effective_dimension(spec, 1e-4)
        assert sqrt_deff_bound(spec, 1e-4) == pytest.approx(
            math.sqrt(value + tail), rel=1e-14
        )


class TestDirichletL1:
    def test_constant_term(self):
        assert dirichlet_l1(1) == 1.0

    def test_first_full_pair_against_adaptive_quadrature(self):
        oracle, err = quad(lambda y: abs(1.0 + 2.0 * math.cos(math.pi * y)),
                           -1.0, 1.0, limit=200)
        oracle *= 0.5
        closed_form = 1.0 / 3.0 + 2.0 * math.sqrt(3.0) / math.pi
        assert oracle == pytest.approx(closed_form, abs=1e-10)
        assert dirichlet_l1(3) == pytest.approx(closed_form, abs=1e-12)

    def test_incomplete_pair_is_bounded(self):
        b2 = dirichlet_l1(2)
        assert 1.0 <= b2 <= 2.5

    def test_memoized(self):
        assert dirichlet_l1(3) is not None
        from kernopt.lebesgue import _B_CACHE

        assert 3 in _B_CACHE

    def test_growth_constant_from_fit_point(self):
        c_b = b_growth_constant()
        for j in range(4, 257):
            i = 2 * j + 1
            assert dirichlet_l1(i) <= c_b * math.log(math.e + i) * (1 + 1e-12)

    def test_envelope_constant_covers_all_indices(self):
        c_env = b_envelope_constant()
        # odd indices: direct tabulation
        for i in range(1, 514, 2):
            assert dirichlet_l1(i) <= c_env * math.log(math.e + i) * (1 + 1e-12)
        # even indices inside the calibration window: direct
        for i in range(2, 129, 2):
            assert dirichlet_l1(i) <= c_env * math.log(math.e + i) * (1 + 1e-12)
        # beyond the window the triangle inequality
        # B_{2j} <= B_{2j-1} + (1/2) int |2 cos(pi j y)| dy = B_{2j-1} + 4/pi
        # certifies coverage without computing the scans
        for i in range(130, 514, 2):
            crude = dirichlet_l1(i - 1) + 4.0 / math.pi
            assert crude <= c_env * math.log(math.e + i) * (1 + 1e-12)

    def test_rejects_multi_dim_basis(self):
        with pytest.raises(ValueError):
            dirichlet_l1(3, FourierBasis(2))

    def test_rejects_nonpositive_index(self):
        with pytest.raises(ValueError):
            dirichlet_l1(0)


class TestAbelBound1d:
    def test_single_mode_unit_tau(self):
        spec = EigenSequence(np.array([1.0]))
        assert abel_bound_1d(spec, 1.0) == pytest.approx(1.0, abs=1e-15)

    def test_monotone_with_unit_weights_telescopes(self):
        spec = EigenSequence(np.array([0.8, 0.4, 0.2, 0.1]))
        h1 = 0.8 / (0.2 + 0.8)
        bound = abel_bound_1d(spec, 0.2, B=lambda i: 1.0)
        assert bound == pytest.approx(2.0 * h1, rel=1e-12)

    def test_matern_log_growth_in_tau(self):
        spec = matern_periodic_spectrum(1.5, 512)
        taus = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5]
        bounds = [abel_bound_1d(spec, t) for t in taus]
        c = bounds[0] / math.log(math.e + 1.0 / taus[0])
        for t, b in zip(taus, bounds):
            assert b <= c * math.log(math.e + 1.0 / t) * (1 + 1e-9)

    def test_upper_bounds_the_estimate(self):
        spec = matern_periodic_spectrum(0.5, 256)
        k = mercer_kernel_1d(spec)
        for tau in (1e-1, 1e-3):
            est, tol = lebesgue_estimate(k, tau)
            assert est - tol <= abel_bound_1d(spec, tau)

    def test_rejects_shallow_certified_tail(self):
        spec = EigenSequence(np.array([1.0, 0.5]), "flat",
                             tail_exponent=0.9, tail_constant=1.0)
        with pytest.raises(ValueError):
            abel_bound_1d(spec, 0.1)

    def test_envelope_never_looser_on_adversarial(self):
        spec = adversarial_spectrum(2.0, 7, 512)
        env = monotone_envelope(spec)
        for tau in (1e-1, 1e-2, 1e-3):
            assert abel_bound_1d(env, tau) <= abel_bound_1d(spec, tau) + 1e-9


class TestAbelBoundMulti:
    def test_degenerate_product_matches_1d_log_weights(self):
        spec = EigenSequence(matern_periodic_spectrum(1.5, 64).mercer_values())
        k = product_kernel(spec, 1)
        a = abel_bound_multi(k, 1e-2, trunc=spec.values.size)
        b = abel_bound_1d(spec, 1e-2, B=LOG_B)
        assert a == pytest.approx(b, abs=1e-10)

    def test_constant_grid_interior_vanishes(self):
        mu = np.full(6, 0.3)
        H = np.multiply.outer(mu, mu)
        H = H / (0.1 + H)
        interior = np.abs(np.diff(np.diff(H, axis=0), axis=1))
        assert np.all(interior < 1e-15)

    def test_constant_base_against_brute_force(self):
        # oracle: explicit inclusion-exclusion loop over the padded grid
        mu = np.full(5, 0.4)
        tau = 0.2
        spec = EigenSequence(mu.copy())
        k = product_kernel(spec, 2)
        t = mu.size
        pad = np.zeros(t + 1)
        pad[:t] = mu

        def H(i, j):
            p = pad[i] * pad[j]
            return p / (tau + p)

        total = 0.0
        for i in range(t):
            for j in range(t):
                d = H(i, j) - H(i + 1, j) - H(i, j + 1) + H(i + 1, j + 1)
                total += abs(d) * LOG_B(i + 1) * LOG_B(j + 1)
        total += H(0, 0) * LOG_B(1) ** 2
        assert abel_bound_multi(k, tau, trunc=t) == pytest.approx(
            total, abs=1e-12
        )

    def test_matern_polylog_growth_two_dims(self):
        spec = matern_periodic_spectrum(1.5, 64)
        k = product_kernel(spec, 2)
        taus = [1e-1, 1e-2, 1e-3, 1e-4]
        bounds = [abel_bound_multi(k, t, trunc=64) for t in taus]
        c = bounds[0] / LOG_B(1.0 / taus[0]) ** 3
        for t, b in zip(taus, bounds):
            assert b <= c * LOG_B(1.0 / t) ** 3 * (1 + 1e-9)

    def test_rejects_five_dimensions(self):
        spec = EigenSequence(np.array([1.0, 0.5]))
        with pytest.raises(ValueError):
            abel_bound_multi(product_kernel(spec, 5), 0.1, trunc=2)

    def test_rejects_mixed_bases(self):
        from kernopt.spectra import MercerKernel

        a = EigenSequence(np.array([1.0, 0.5]))
        b = EigenSequence(np.array([1.0, 0.4]))
        with pytest.raises(ValueError):
            abel_bound_multi(MercerKernel((a, b)), 0.1)


class TestLebesgueEstimate:
    def test_single_constant_mode_exact(self):
        spec = EigenSequence(np.array([1.0, 0.0, 0.0]))
        k = mercer_kernel_1d(spec)
        for tau in (0.5, 2.0):
            est, tol = lebesgue_estimate(k, tau)
            assert est == pytest.approx(1.0 / (1.0 + tau), abs=1e-14)
            assert tol < 1e-12

    def test_single_pair_closed_form(self):
        # g(y) = 2 h cos(pi y); its uniform L1 norm is 4h/pi
        spec = EigenSequence(np.array([0.0, 0.3]), "frequency")
        k = mercer_kernel_1d(spec)
        tau = 0.1
        h = 0.3 / (tau + 0.3)
        est, tol = lebesgue_estimate(k, tau)
        assert est == pytest.approx(4.0 * h / math.pi, abs=1e-10)

    def test_huge_tau_kills_the_constant(self):
        k = mercer_kernel_1d(matern_periodic_spectrum(1.5, 128))
        est, _tol = lebesgue_estimate(k, 1e6)
        assert est <= 2e-6

    def test_cross_validates_with_both_bounds(self):
        spec = matern_periodic_spectrum(1.5, 256)
        k = mercer_kernel_1d(spec)
        est, tol = lebesgue_estimate(k, 1e-3)
        assert est - tol <= abel_bound_1d(spec, 1e-3)
        assert est - tol <= math.sqrt(2.0) * sqrt_deff_bound(spec, 1e-3)

    def test_two_dim_paired_against_brute_force(self):
        # oracle: explicit double loop over frequencies and quadrature nodes
        from kernopt.quadrature import composite_rule
        from kernopt.spectra import MercerKernel

        v = np.array([0.6, 0.3, 0.1])
        spec = EigenSequence(v.copy(), "frequency")
        k = MercerKernel((spec, spec))
        tau = 0.05
        y, w = composite_rule()
        g = np.zeros((y.size, y.size))
        for j0 in range(3):
            for j1 in range(3):
                prod = v[j0] * v[j1]
                h = prod / (tau + prod)
                mult = (2.0 if j0 else 1.0) * (2.0 if j1 else 1.0)
                g += (
                    mult
                    * h
                    * np.outer(np.cos(np.pi * j0 * y), np.cos(np.pi * j1 * y))
                )
        oracle = float(w @ np.abs(g) @ w) / 4.0
        est, tol = lebesgue_estimate(k, tau)
        assert est == pytest.approx(oracle, abs=1e-10)

    def test_flat_scan_skips_zero_modes(self):
        spec = adversarial_spectrum(2.0, 7, 256)
        est, tol = lebesgue_estimate(mercer_kernel_1d(spec), 1e-2)
        assert est > 0.0
        assert math.isfinite(tol)

    def test_rejects_empty_grid(self):
        spec = adversarial_spectrum(2.0, 7, 64)
        with pytest.raises(ValueError):
            lebesgue_estimate(mercer_kernel_1d(spec), 0.1, x_grid=np.array([]))

    def test_rejects_nonpositive_tau(self):
        with pytest.raises(ValueError):
            lebesgue_estimate(mercer_kernel_1d(EigenSequence(np.ones(2))), 0.0)


class TestTelescopingIdentity:
    def test_summation_by_parts_exact(self):
        rng = np.random.default_rng(9)
        mu = rng.uniform(0, 1, 17)
        tau = 0.3
        h = mu / (tau + mu)
        x = rng.uniform(-1, 1, 5)
        y = rng.uniform(-1, 1, 5)
        fx = FourierBasis.features(x, 17)
        fy = FourierBasis.features(y, 17)
        left = (fx * h) @ fy.T
        partial = np.cumsum(fx[:, None, :] * fy[None, :, :], axis=2)
        right = h[-1] * partial[:, :, -1]
        for i in range(16):
            right -= (h[i + 1] - h[i]) * partial[:, :, i]
        np.testing.assert_allclose(left, right, atol=5e-13)


class TestAdversarialRatioScan:
    def test_single_mode_closed_form(self):
        spec = EigenSequence(np.array([1.0, 0.0]))
        rows, peak = adversarial_ratio_scan(spec, [0.5, 1.0])
        for tau, ratio in rows:
            assert ratio == pytest.approx(math.sqrt(1.0 / (1.0 + tau)),
                                          abs=1e-10)
        assert peak == pytest.approx(math.sqrt(1.0 / 1.5), abs=1e-10)

    def test_huge_tau_stays_finite(self):
        spec = adversarial_spectrum(2.0, 7, 128)
        rows, peak = adversarial_ratio_scan(spec, [1e8])
        assert math.isfinite(rows[0][1])
        assert math.isfinite(peak)

    def test_reference_realization_clears_floor(self):
        spec = adversarial_spectrum(2.0, 7, 4096)
        taus = [2.0**-k for k in range(2, 15)]
        _rows, peak = adversarial_ratio_scan(spec, taus)
        assert peak >= 0.05


class TestPopulationApply:
    def test_eigenfunction_picks_up_multiplier(self):
        spec = matern_periodic_spectrum(1.5, 64)
        k = mercer_kernel_1d(spec)
        tau = 1e-2
        mu = spec.mercer_values()
        h5 = mu[4] / (tau + mu[4])
        f = lambda y: FourierBasis.features(y, 5)[:, 4]  # noqa: E731
        proj = population_apply(k, tau, f)
        x = np.linspace(-1, 1, 33)
        np.testing.assert_allclose(proj(x), h5 * f(x), atol=1e-10)

    def test_mode_beyond_truncation_vanishes(self):
        spec = matern_periodic_spectrum(1.5, 16)
        proj = population_apply(mercer_kernel_1d(spec), 1e-2,
                                lambda y: np.cos(np.pi * 40 * y))
        x = np.linspace(-1, 1, 65)
        assert np.max(np.abs(proj(x))) < 1e-9

    def test_bump_respects_lebesgue_estimate(self):
        spec = matern_periodic_spectrum(1.5, 128)
        k = mercer_kernel_1d(spec)
        tau = 1e-2
        f = lambda y: np.exp(-(y**2) / (2 * 0.04))  # noqa: E731
        proj = population_apply(k, tau, f)
        grid = np.linspace(-1, 1, 2048)
        est, tol = lebesgue_estimate(k, tau)
        sup_pf = float(np.max(np.abs(proj(grid))))
        assert sup_pf <= (est + tol) * 1.0 + 1e-9

    def test_rejects_multi_dim(self):
        k = product_kernel(matern_periodic_spectrum(1.5, 8), 2)
        with pytest.raises(ValueError):
            population_apply(k, 0.1, lambda y: y)


class TestSpectralReport:
    @pytest.mark.parametrize(
        "kernel",
        [
            mercer_kernel_1d(matern_periodic_spectrum(0.5, 256)),
            mercer_kernel_1d(matern_periodic_spectrum(1.5, 512)),
            mercer_kernel_1d(adversarial_spectrum(2.0, 7, 1024)),
            product_kernel(matern_periodic_spectrum(1.5, 64), 2),
        ],
        ids=["matern-rough", "matern-smooth", "adversarial", "product-2d"],
    )
    def test_sandwich_on_tau_grid(self, kernel):
        for tau in np.geomspace(1e-1, 1e-4, 6):
            report = spectral_report(kernel, float(tau), trunc_multi=64)
            assert report.sandwich_ok(), (
                f"tau={tau}: est-tol={report.lebesgue_est - report.lebesgue_tol}"
                f" abel={report.abel_bound}"
                f" sqrt2*sqrt={math.sqrt(2) * report.sqrt_bound}"
            )

    def test_margins_keys(self):
        k = mercer_kernel_1d(matern_periodic_spectrum(1.5, 64))
        m = spectral_report(k, 1e-2).margins()
        assert set(m) == {"abel", "sqrt"}
        assert all(v >= 0 for v in m.values())


class TestProductEffectiveDimension:
    def test_two_dim_against_brute_force(self):
        mu = np.array([0.5, 0.25, 0.125])
        spec = EigenSequence(mu.copy())
        k = product_kernel(spec, 2)
        tau = 0.1
        brute = sum(
            (a * b) / (tau + a * b) for a in mu for b in mu
        )
        value, tail = product_effective_dimension(k, tau, trunc=3)
        assert value == pytest.approx(brute, rel=1e-13)
        assert tail == 0.0

    def test_tail_covers_truncated_terms(self):
        spec = matern_periodic_spectrum(1.5, 128)
        k = product_kernel(spec, 2)
        full, _ = product_effective_dimension(k, 1e-2, trunc=255)
        small, tail = product_effective_dimension(k, 1e-2, trunc=64)
        assert small <= full <= small + tail
