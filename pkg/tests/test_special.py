"""Gamma and incomplete-beta behavior against closed forms and an
independent adaptive-quadrature oracle (mpmath tanh-sinh)."""

import math

import mpmath as mp
import numpy as np
import pytest

from ekpme.special import SpecialFnConfig, complete_beta, gamma, incomplete_beta

mp.mp.dps = 25


def beta_quad_oracle(z, a, b):
    """Direct adaptive integration of t^{a-1} (1-t)^{b-1} over [0, z]."""
    if z == 0.0:
        return 0.0
    val = mp.quad(lambda t: t ** (a - 1.0) * (1.0 - t) ** (b - 1.0), [0.0, z])
    return float(val)


class TestGamma:
    def test_factorial_point(self):
        assert gamma(1.0) == pytest.approx(1.0, rel=1e-14)

    def test_sqrt_pi_points(self):
        assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
        assert gamma(1.5) == pytest.approx(math.sqrt(math.pi) / 2.0, rel=1e-14)

    @pytest.mark.parametrize("x", [0.0, -0.5, -3.0])
    def test_domain_error(self, x):
        with pytest.raises(ValueError):
            gamma(x)

    def test_recursion(self):
        for x in np.linspace(0.1, 1.5, 29):
            lhs = gamma(x + 1.0)
            assert abs(lhs - x * gamma(x)) <= 1e-12 * lhs


class TestIncompleteBeta:
    def test_uniform_case(self):
        assert incomplete_beta(0.7, 1.0, 1.0) == pytest.approx(0.7, rel=1e-13)

    def test_arcsine_case(self):
        # beta(z; 1/2, 1/2) = 2 arcsin(sqrt(z))
        assert incomplete_beta(0.5, 0.5, 0.5) == pytest.approx(math.pi / 2.0, rel=1e-12)
        assert incomplete_beta(0.2, 0.5, 0.5) == pytest.approx(2.0 * math.asin(math.sqrt(0.2)), rel=1e-12)

    def test_complete_value_against_quad_oracle(self):
        # frozen from the quadrature oracle; equals Gamma(.75)Gamma(.5)/Gamma(1.25)
        oracle = beta_quad_oracle(1.0, 0.75, 0.5)
        assert oracle == pytest.approx(2.3962804694711844, rel=1e-12)
        assert incomplete_beta(1.0, 0.75, 0.5) == pytest.approx(oracle, rel=1e-12)
        assert complete_beta(0.75, 0.5) == pytest.approx(oracle, rel=1e-12)

    def test_endpoints(self):
        assert incomplete_beta(0.0, 0.6, 0.3) == 0.0
        assert incomplete_beta(1.0, 0.6, 0.3) == pytest.approx(complete_beta(0.6, 0.3), rel=1e-13)

    def test_monotone_in_z(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            a = rng.uniform(0.5, 1.0)
            b = rng.uniform(0.05, 0.99)
            z1, z2 = sorted(rng.uniform(0.0, 1.0, size=2))
            assert incomplete_beta(z1, a, b) <= incomplete_beta(z2, a, b) + 1e-15

    def test_oracle_agreement_on_parameter_box(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            z = rng.uniform(0.0, 1.0)
            a = rng.uniform(0.5, 1.0)
            b = rng.uniform(0.05, 0.99)
            got = incomplete_beta(z, a, b)
            want = beta_quad_oracle(z, a, b)
            assert got == pytest.approx(want, rel=1e-9, abs=1e-14), (z, a, b)

    def test_array_input_matches_scalar(self):
        z = np.array([0.0, 0.12, 0.5, 0.93, 1.0])
        arr = incomplete_beta(z, 0.75, 0.5)
        assert isinstance(arr, np.ndarray)
        for zi, vi in zip(z, arr):
            assert vi == pytest.approx(incomplete_beta(float(zi), 0.75, 0.5), rel=1e-14, abs=1e-300)

    @pytest.mark.parametrize("z,a,b", [(-0.1, 1.0, 1.0), (1.1, 1.0, 1.0),
                                       (0.5, 0.0, 1.0), (0.5, 1.0, -2.0)])
    def test_domain_errors(self, z, a, b):
        with pytest.raises(ValueError):
            incomplete_beta(z, a, b)


class TestConfig:
    def test_defaults(self):
        cfg = SpecialFnConfig()
        assert cfg.rel_tolerance == 1e-12
        assert cfg.max_iterations == 500

    def test_validation(self):
        with pytest.raises(ValueError):
            SpecialFnConfig(rel_tolerance=1e-3)
        with pytest.raises(ValueError):
            SpecialFnConfig(rel_tolerance=0.0)
        with pytest.raises(ValueError):
            SpecialFnConfig(max_iterations=10)
