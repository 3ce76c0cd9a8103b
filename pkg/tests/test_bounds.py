import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from driftgames.bounds import (
    critical_index,
    drift_scale,
    leading_limit,
    n_requirement,
    shift_params,
    theorem_bounds,
)
from driftgames.config import ConfigError, Side, Variant
from driftgames.special import tail_integral

VARIANTS = list(Variant)
GAMMAS = (0.0, 0.25, 1.0)
THETAS = (0.3, 0.6, 0.9)


class TestShiftParams:
    def test_binary_moves(self):
        assert shift_params(Variant.V1, 16, 0.5, 0.0) == (2.0, 2.0)
        assert shift_params(Variant.V3, 16, 0.5, 3.0, Side.UPPER) == (2.0, 2.0)

    def test_v4_integer_inputs(self):
        # T^(theta/2) = 256^0.25 = 4, R = 3 -> ceil(7) - 3
        assert shift_params(Variant.V4, 256, 0.5, 3.0) == (4.0, 4.0)

    def test_v2_rational_evaluation(self):
        delta, T = Fraction(1, 2), 16
        k = math.ceil((delta * T + 2) / (1 - delta))
        expected = k * (1 - delta) - delta * T
        assert expected == 2
        assert shift_params(Variant.V2, T, 0.5, 0.5) == (2.0, 2.0)

    def test_interval_upper_side(self):
        for v in (Variant.V2, Variant.V4):
            beta, tau = shift_params(v, 100, 0.6, 0.1, Side.UPPER)
            assert beta == 0.0 and tau == pytest.approx(100**0.6)

    @given(st.integers(4, 10**6), st.floats(0.05, 0.95), st.floats(0.0, 0.9))
    def test_v2_lattice_alignment(self, T, theta, delta):
        beta, tau = shift_params(Variant.V2, T, theta, delta)
        k = critical_index(Variant.V2, T, theta, delta)
        assert beta == tau
        assert beta >= T ** (theta / 2) - 1e-9 * max(1.0, delta * T)
        assert (delta * T + beta) == pytest.approx(k * (1 - delta), rel=1e-12)
        assert tau >= 1

    @given(st.integers(4, 10**6), st.floats(0.05, 0.95), st.floats(0.0, 500.0))
    def test_v4_lattice_alignment(self, T, theta, R):
        beta, _ = shift_params(Variant.V4, T, theta, R)
        assert R + beta == pytest.approx(round(R + beta), abs=1e-9)
        assert beta >= T ** (theta / 2) - 1e-9

    def test_theta_range(self):
        with pytest.raises(ConfigError):
            shift_params(Variant.V1, 10, 1.0, 0.0)


class TestTheoremBounds:
    def test_limits(self):
        assert theorem_bounds(Variant.V1, Side.UPPER, 0.0, 100, 0.6).leading_limit == 0.5
        assert theorem_bounds(Variant.V2, Side.UPPER, 0.0, 100, 0.6).leading_limit == 1.0

    def test_v3_lower_example(self):
        r = theorem_bounds(Variant.V3, Side.LOWER, 0.5, 10**4, 0.5)
        assert r.a == pytest.approx(0.777817, abs=1e-6)
        assert r.b == pytest.approx(2.236068, abs=1e-6)
        assert r.main_term == pytest.approx(tail_integral(r.a) - tail_integral(r.b), abs=1e-15)
        assert r.n_requirement == n_requirement(Variant.V3, 10**4, 0.5)

    def test_one_sided_integral(self):
        for v in (Variant.V2, Variant.V4):
            r = theorem_bounds(v, Side.UPPER, 0.5, 1000, 0.6)
            assert r.b == math.inf
            assert r.main_term == 2 * tail_integral(r.a)
            assert r.error_exponent == pytest.approx(0.3)
            assert r.n_requirement is None

    def test_error_exponents(self):
        for v in VARIANTS:
            assert theorem_bounds(v, Side.LOWER, 0.5, 1000, 0.6).error_exponent == pytest.approx(0.15)
        assert theorem_bounds(Variant.V1, Side.UPPER, 0.5, 1000, 0.6).error_exponent == pytest.approx(0.15)

    def test_delta_above_one_rejected(self):
        with pytest.raises(ConfigError):
            theorem_bounds(Variant.V1, Side.UPPER, 5.0, 4, 0.6)
        with pytest.raises(ConfigError):
            drift_scale(Variant.V2, 5.0, 4)

    @pytest.mark.parametrize("v", VARIANTS)
    @pytest.mark.parametrize("theta", THETAS)
    @pytest.mark.parametrize("gamma", GAMMAS)
    def test_upper_above_lower(self, v, theta, gamma):
        for T in (10**2, 10**3, 10**4, 10**6):
            up = theorem_bounds(v, Side.UPPER, gamma, T, theta).main_term
            lo = theorem_bounds(v, Side.LOWER, gamma, T, theta).main_term
            assert up >= lo

    @pytest.mark.parametrize("v", VARIANTS)
    @pytest.mark.parametrize("side", list(Side))
    @pytest.mark.parametrize("theta", THETAS)
    @pytest.mark.parametrize("gamma", GAMMAS)
    def test_gap_decreases_with_T(self, v, side, theta, gamma):
        gaps = [abs(theorem_bounds(v, side, gamma, T, theta).main_term - leading_limit(v, gamma))
                for T in (10**2, 10**4, 10**6, 10**8)]
        # strictly decreasing while positive; V2/V4 upper at gamma=0 is exactly the limit
        assert all(b < a or a == b == 0.0 for a, b in zip(gaps, gaps[1:]))

    @pytest.mark.parametrize("gamma", GAMMAS)
    def test_interval_limit_is_twice_binary(self, gamma):
        assert leading_limit(Variant.V2, gamma) == 2 * leading_limit(Variant.V1, gamma)
        assert leading_limit(Variant.V4, gamma) == 2 * leading_limit(Variant.V3, gamma)


class TestNRequirement:
    def test_examples(self):
        assert n_requirement(Variant.V3, 100, 0.6) == 20
        assert n_requirement(Variant.V4, 16, 0.5) == 6

    def test_v1_pinned(self):
        # 100-digit evaluation of 8 T^(2+theta/2) log(1/(1 - sqrt(exp(-T^(-2-theta/2)))))
        # gives 9561.8486648...; the strict inequality makes the answer 9562
        assert n_requirement(Variant.V1, 10, 0.6) == 9562

    @given(st.integers(2, 10**5), st.floats(0.05, 0.95))
    def test_power_rule_is_minimal(self, T, theta):
        n = n_requirement(Variant.V3, T, theta)
        bound = T ** ((2 + theta) / 4)
        assert n >= bound * (1 - 1e-12)
        assert n - 1 < bound * (1 + 1e-12)
