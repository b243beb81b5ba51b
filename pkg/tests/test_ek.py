"""EK product-quadrature rows: closed forms, exactness, positivity, the
analytic test pair, and quick order-of-accuracy checks. Heavy oracles are
mpmath quadratures in the s-variable, where the only singularity sits at
the s = 1 endpoint."""

import math

import mpmath as mp
import numpy as np
import pytest

from ekpme.ek import (
    EKParams,
    Grid,
    Rule,
    analytic_test_pair,
    apply_ek,
    interval_masses,
    optimal_truncation,
    rectangle_weights,
    trapezoid_weights,
)
from ekpme.analysis import ek_error_curve

mp.mp.dps = 25


def truncated_ek_oracle(fn, n, N, alpha, B, split_at=None):
    """(1/Gamma(1-a)) int_{(n/N)^{1/B}}^1 (1-s)^{-a} fn(s^{-B} eta_n) ds with eta_n = n."""
    eta = float(n)
    s_lo = (n / N) ** (1.0 / B)
    points = [s_lo]
    if split_at:
        points.extend(sorted(s for s in split_at if s_lo < s < 1.0))
    points.append(1.0)
    val = mp.quad(lambda s: (1.0 - s) ** (-alpha) * fn(float(s) ** (-B) * eta), points)
    return float(val / mp.gamma(1.0 - alpha))


class TestOptimalTruncation:
    def test_spec_arithmetic(self):
        assert optimal_truncation(0.1, 0.25, Rule.RECTANGLE) == 2
        assert optimal_truncation(0.1, 0.25, Rule.TRAPEZOID) == 4
        assert optimal_truncation(0.01, 0.5, Rule.RECTANGLE) == 11

    def test_domain(self):
        with pytest.raises(ValueError):
            optimal_truncation(1.5, 0.25, Rule.RECTANGLE)
        with pytest.raises(ValueError):
            optimal_truncation(0.1, -1.0, Rule.RECTANGLE)


class TestRectangleWeights:
    def test_identity_row(self):
        params = EKParams(0.5)
        row = rectangle_weights(0, 4, params)
        assert row.weights[0] == pytest.approx(1.0 / math.gamma(1.5), rel=1e-14)
        assert np.all(row.weights[1:] == 0.0)

    def test_diagonal_zero(self):
        row = rectangle_weights(3, 9, EKParams(0.5, B=0.25))
        assert row.weights[0] == 0.0

    def test_single_entry_value(self):
        # (1 - 2^{-4})^{1/2} / Gamma(1.5), frozen from a 30-digit evaluation
        row = rectangle_weights(1, 2, EKParams(0.5, B=0.25))
        assert row.weights[-1] == pytest.approx(1.0925484305920791, rel=1e-12)

    def test_row_sum_telescopes(self):
        row = rectangle_weights(1, 4, EKParams(0.5, B=0.25))
        want = (1.0 - 4.0 ** -4) ** 0.5 / math.gamma(1.5)
        assert row.weights.sum() == pytest.approx(want, rel=1e-13)

    def test_positivity_sweep(self):
        for alpha in (0.1, 0.5, 0.9):
            params = EKParams(alpha)
            for n in (1, 2, 5, 17):
                gamma_n = optimal_truncation(0.01, params.B, Rule.RECTANGLE)
                row = rectangle_weights(n, gamma_n * n, params)
                assert np.all(row.weights >= 0.0)

    def test_classical_limit_row(self):
        row = rectangle_weights(3, 6, EKParams(1.0))
        want = np.zeros(4)
        want[1] = 1.0
        assert np.array_equal(row.weights, want)
        assert rectangle_weights(0, 3, EKParams(1.0)).weights[0] == pytest.approx(1.0)

    def test_index_error(self):
        with pytest.raises(IndexError):
            rectangle_weights(5, 4, EKParams(0.5))

    def test_masses_match_row(self):
        params = EKParams(0.4, B=0.3)
        row = rectangle_weights(2, 8, params)
        masses = interval_masses(2, 8, 0.4, 0.3)
        assert np.allclose(row.weights[1:], masses, rtol=0, atol=0)


class TestTrapezoidWeights:
    def test_identity_row(self):
        row = trapezoid_weights(0, 4, EKParams(0.5, rule=Rule.TRAPEZOID))
        assert row.weights[0] == pytest.approx(1.0 / math.gamma(1.5), rel=1e-14)
        assert np.all(row.weights[1:] == 0.0)

    def test_row_sum_equals_rectangle_row_sum(self):
        # both rules integrate constants exactly over the truncated domain
        params = EKParams(0.5, B=0.25, rule=Rule.TRAPEZOID)
        for n, N in ((1, 4), (2, 9), (5, 20)):
            tsum = trapezoid_weights(n, N, params).weights.sum()
            rsum = rectangle_weights(n, N, params).weights.sum()
            assert tsum == pytest.approx(rsum, rel=1e-12)

    def test_affine_exactness_against_quadrature_oracle(self):
        alpha, B = 0.5, 0.25
        params = EKParams(alpha, B=B, rule=Rule.TRAPEZOID)
        n, N = 2, 9
        row = trapezoid_weights(n, N, params)
        nodes = np.arange(n, N + 1, dtype=float)  # h = 1 scale; ratios only
        for p, q in ((1.0, 0.0), (0.0, 1.0), (1.3, -0.2)):
            exact = truncated_ek_oracle(lambda z: p + q * z, n, N, alpha, B)
            assert row.apply(p + q * nodes) == pytest.approx(exact, rel=1e-10)

    def test_entries_against_hat_function_oracle(self):
        # each weight is the kernel integral of the piecewise-linear hat at its node
        alpha, B = 0.5, 0.25
        n, N = 1, 4
        row = trapezoid_weights(n, N, EKParams(alpha, B=B, rule=Rule.TRAPEZOID))
        for i in range(n, N + 1):
            def hat(z, i=i):
                return float(max(0.0, 1.0 - abs(z - i)))
            splits = [(k / n) ** (-1.0 / B) for k in (i - 1, i, i + 1) if k >= n]
            want = truncated_ek_oracle(hat, n, N, alpha, B, split_at=splits)
            assert row.weights[i - n] == pytest.approx(want, rel=1e-9, abs=1e-12), i

    def test_nonnegative_in_sweep(self):
        # positivity is asserted for the trapezoid family as observed, not assumed
        for alpha in (0.1, 0.5, 0.9):
            params = EKParams(alpha, rule=Rule.TRAPEZOID)
            for n, N in ((1, 5), (3, 12), (7, 21)):
                row = trapezoid_weights(n, N, params)
                assert np.all(row.weights >= -1e-15), (alpha, n, N)

    def test_alpha_one_rejected(self):
        with pytest.raises(ValueError):
            EKParams(1.0, rule=Rule.TRAPEZOID)
        with pytest.raises(ValueError):
            trapezoid_weights(1, 4, EKParams(1.0))

    def test_large_B_rejected(self):
        with pytest.raises(ValueError):
            EKParams(0.5, B=1.0, rule=Rule.TRAPEZOID)


class TestApplyEK:
    def test_zero_samples(self):
        row = rectangle_weights(2, 8, EKParams(0.5))
        assert apply_ek(np.zeros(7), row) == 0.0

    def test_identity_at_origin(self):
        row = rectangle_weights(0, 5, EKParams(0.5))
        samples = np.ones(6)
        assert apply_ek(samples, row) == pytest.approx(1.1283791670955126, rel=1e-12)

    def test_constant_telescoping(self):
        params = EKParams(0.3, B=0.15)
        n, N, c = 2, 11, 2.7
        row = rectangle_weights(n, N, params)
        want = c * (1.0 - (n / N) ** (1.0 / params.B)) ** (1.0 - params.alpha) / math.gamma(2.0 - params.alpha)
        assert apply_ek(np.full(N - n + 1, c), row) == pytest.approx(want, rel=1e-13)

    def test_length_mismatch(self):
        row = rectangle_weights(2, 8, EKParams(0.5))
        with pytest.raises(ValueError):
            apply_ek(np.zeros(5), row)

    def test_discrete_bound_on_monotone_samples(self):
        # discrete analogue of F_a U <= U(eta_n) / Gamma(2-alpha)
        rng = np.random.default_rng(3)
        for alpha in (0.25, 0.5, 0.75):
            for rule in (Rule.RECTANGLE, Rule.TRAPEZOID):
                params = EKParams(alpha, rule=rule)
                build = rectangle_weights if rule is Rule.RECTANGLE else trapezoid_weights
                for n, N in ((1, 6), (4, 16)):
                    samples = np.sort(rng.uniform(0.0, 1.0, N - n + 1))[::-1].copy()
                    row = build(n, N, params)
                    bound = samples[0] / math.gamma(2.0 - alpha)
                    assert apply_ek(samples, row) <= bound + 1e-12


class TestAnalyticTestPair:
    def test_outer_branch_constant(self):
        for alpha in (0.25, 0.5, 0.9):
            _, F = analytic_test_pair(2.0, alpha)
            want = 1.0 / math.gamma(2.0 - alpha)
            assert F(2.0) == pytest.approx(want, rel=1e-13)
            assert F(1.0) == pytest.approx(want, rel=1e-13)

    def test_zero_at_origin(self):
        U, F = analytic_test_pair(2.0, 0.5)
        assert U(0.0) == 0.0
        assert F(0.0) == 0.0

    def test_interior_value_against_split_oracle(self):
        alpha, mu, eta = 0.5, 2.0, 0.5
        B = alpha / 2.0
        _, F = analytic_test_pair(mu, alpha)
        kink = eta ** (1.0 / B)  # s where s^{-B} eta crosses 1
        val = mp.quad(lambda s: (1.0 - s) ** (-alpha)
                      * min(1.0, (float(s) ** (-B) * eta) ** mu), [0.0, kink, 1.0])
        want = float(val / mp.gamma(1.0 - alpha))
        assert want == pytest.approx(0.40766441527013743, rel=1e-13)
        assert F(eta) == pytest.approx(want, rel=1e-10)

    def test_continuity_at_kink(self):
        _, F = analytic_test_pair(2.0, 0.5)
        assert F(1.0 - 1e-9) == pytest.approx(F(1.0), rel=1e-7)

    def test_gamma_argument_guard(self):
        with pytest.raises(ValueError):
            analytic_test_pair(5.0, 0.5)  # alpha*mu/2 = 1.25 >= 1

    def test_array_evaluation(self):
        U, F = analytic_test_pair(2.0, 0.5)
        etas = np.array([0.0, 0.3, 0.9, 1.0, 1.7])
        vals = F(etas)
        for e, v in zip(etas, vals):
            assert v == pytest.approx(F(float(e)), rel=1e-14, abs=1e-300)


class TestQuadratureOrders:
    def test_quick_slopes(self):
        hs = [2.0 ** -k for k in range(4, 8)]
        rect = ek_error_curve(0.5, 2.0, hs, Rule.RECTANGLE)
        trap = ek_error_curve(0.5, 2.0, hs, Rule.TRAPEZOID)
        assert 0.6 < rect.slope < 1.5
        assert 1.5 < trap.slope < 2.5
        assert rect.points[0][1] > rect.points[-1][1]


class TestGridParams:
    def test_grid_h_derived(self):
        grid = Grid(2.0, 8)
        assert grid.h == pytest.approx(0.25, rel=1e-15)
        assert grid.nodes[-1] == pytest.approx(2.0, rel=1e-15)
        assert len(grid.nodes) == 9

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            Grid(-1.0, 8)
        with pytest.raises(ValueError):
            Grid(1.0, 1)

    def test_params_defaults(self):
        params = EKParams(0.6)
        assert params.B == pytest.approx(0.3)
        assert params.A == pytest.approx(0.4)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            EKParams(0.0)
        with pytest.raises(ValueError):
            EKParams(1.2)
        with pytest.raises(ValueError):
            EKParams(0.5, B=-0.1)
