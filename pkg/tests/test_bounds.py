import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from dpwinsor import bounds
from dpwinsor.empirical import Dataset, trimmed_mean
from dpwinsor.noise import RandomStream


class TestOracles:
    def test_uniform(self):
        oracle = bounds.uniform_oracle()
        assert oracle.quantile(0.3) == pytest.approx(0.3)
        assert oracle.mean == 0.5

    def test_gaussian(self):
        oracle = bounds.gaussian_oracle(2.0, 3.0)
        assert oracle.quantile(0.5) == pytest.approx(2.0)
        assert oracle.quantile(0.975) == pytest.approx(2.0 + 3.0 * 1.959964, abs=1e-4)

    def test_exponential(self):
        oracle = bounds.exponential_oracle(2.0)
        assert oracle.quantile(0.5) == pytest.approx(math.log(2.0) / 2.0)
        assert oracle.mean == 0.5

    def test_student_t_requires_finite_variance(self):
        with pytest.raises(ValueError):
            bounds.student_t_oracle(2.0)
        assert bounds.student_t_oracle(3.0).std == pytest.approx(math.sqrt(3.0))


class TestGridCoarseness:
    def test_uniform_reference(self):
        # quantile gaps of width zeta/2 = 0.05 on both sides, denominators 1.875
        value = bounds.grid_coarseness_bound(bounds.uniform_oracle(), 0.1, 0.0, 1.0)
        assert value == pytest.approx(0.05 / 1.875, rel=1e-12)

    def test_symmetric_oracle_arms_coincide(self):
        oracle = bounds.gaussian_oracle()
        zeta, u = 0.1, 4.0
        q_hi = oracle.quantile(1.25 * zeta)
        q_lo = oracle.quantile(0.75 * zeta)
        first = (q_hi - q_lo) / (u - q_hi + 1.0)
        second = (-q_lo - (-q_hi)) / (-q_hi + u + 1.0)
        assert first == pytest.approx(second, rel=1e-12)
        assert bounds.grid_coarseness_bound(oracle, zeta, -u, u) == pytest.approx(first, rel=1e-12)

    def test_exponential_instance_against_closed_form_quantiles(self):
        zeta = 0.04  # 5*zeta/4 = 0.05
        upper = -math.log(0.05) * 2.0
        lower = -upper
        xi = lambda q: -math.log1p(-q)
        expected = min(
            (xi(0.05) - xi(0.03)) / (upper - xi(0.05) + 1.0),
            (xi(0.97) - xi(0.95)) / (xi(0.95) - lower + 1.0),
        )
        value = bounds.grid_coarseness_bound(bounds.exponential_oracle(), zeta, lower, upper)
        assert value == pytest.approx(expected, rel=1e-12)

    def test_widening_upper_shrinks_first_arm(self):
        oracle = bounds.uniform_oracle()
        narrow = bounds.grid_coarseness_bound(oracle, 0.1, 0.0, 1.0)
        wide = bounds.grid_coarseness_bound(oracle, 0.1, 0.0, 2.0)
        assert wide < narrow
        assert wide == pytest.approx(0.05 / 2.875, rel=1e-12)

    def test_precondition_errors_name_the_violation(self):
        oracle = bounds.uniform_oracle()
        with pytest.raises(ValueError, match="5\\*clip_level/4"):
            bounds.grid_coarseness_bound(oracle, 0.45, 0.0, 1.0)
        with pytest.raises(ValueError, match="lower"):
            bounds.grid_coarseness_bound(oracle, 0.1, 0.5, 1.0)
        with pytest.raises(ValueError, match="upper"):
            bounds.grid_coarseness_bound(oracle, 0.1, 0.0, 0.5)


class TestAggregationEnvelope:
    def test_eta_branch_dominates(self):
        assert bounds.aggregation_envelope(10**6, 1.0, 0.5, 2.0, 1.0, 0.0, 100.0) == 1.0

    def test_log_branch_reference(self):
        value = bounds.aggregation_envelope(100, 0.0, 0.01, 2.0, 1.0, -1.0, 1.0)
        assert value == pytest.approx(math.sqrt(math.log(400.0) / 100.0), rel=1e-9)
        assert value == pytest.approx(0.2448, abs=2e-4)

    def test_budget_branch_vanishes(self):
        small = bounds.aggregation_envelope(100, 0.0, 0.01, 2.0, 1.0, -1.0, 1e9)
        assert small == pytest.approx(math.sqrt(math.log(400.0) / 100.0), rel=1e-9)

    @given(
        m=st.integers(min_value=1, max_value=10**6),
        eta=st.floats(min_value=0.0, max_value=1.0),
        width=st.floats(min_value=0.1, max_value=1e4),
        e3=st.floats(min_value=0.01, max_value=100.0),
    )
    @settings(max_examples=150)
    def test_monotonicities(self, m, eta, width, e3):
        args = dict(delta=0.05, beta=1.5, lower=0.0)
        base = bounds.aggregation_envelope(m, eta, upper=width, e3=e3, **args)
        assert bounds.aggregation_envelope(4 * m, eta, upper=width, e3=e3, **args) <= base
        assert bounds.aggregation_envelope(m, eta, upper=width, e3=2 * e3, **args) <= base
        assert bounds.aggregation_envelope(m, min(1.0, eta + 0.1), upper=width, e3=e3, **args) >= base
        assert bounds.aggregation_envelope(m, eta, upper=2 * width, e3=e3, **args) >= base


class TestRequiredSampleSize:
    def test_huge_deviation_gives_one(self):
        assert bounds.required_sample_size(1e12, 1.0, 0.1, 0.0, 1.0, 2.0, 1.0) == 1

    def test_hand_computed_instance(self):
        # logs = log(10) - log(1/2) + log(10) = 5.298317; sigma^2=4 branch wins
        assert bounds.required_sample_size(1.0, 2.0, 0.4, 0.0, 10.0, 2.0, 0.1) == 22

    def test_doubling_t_quarters_before_ceiling(self):
        assert bounds.required_sample_size(2.0, 2.0, 0.4, 0.0, 10.0, 2.0, 0.1) == 6

    def test_constant_scales(self):
        # pre-ceiling bound is 4 * 5.298317 = 21.193; doubling the constant gives 43
        assert bounds.required_sample_size(1.0, 2.0, 0.4, 0.0, 10.0, 2.0, 0.1, constant=2.0) == 43


class TestTrimmedMeanLimit:
    def test_reference_value_against_quadrature(self):
        p = 0.1
        a, b = -math.log(0.9), -math.log(0.1)
        integral, _ = integrate.quad(lambda x: x * math.exp(-x), a, b)
        assert bounds.trimmed_mean_limit_exp(p) == pytest.approx(integral / 0.8, rel=1e-9)
        assert bounds.trimmed_mean_limit_exp(p) == pytest.approx(0.83071, abs=1e-4)

    @pytest.mark.parametrize("p", [0.02, 0.05, 0.1, 0.2, 0.3, 0.45])
    def test_matches_quadrature_on_grid_and_stays_below_one(self, p):
        a, b = -math.log1p(-p), -math.log(p)
        integral, _ = integrate.quad(lambda x: x * math.exp(-x), a, b)
        value = bounds.trimmed_mean_limit_exp(p)
        assert value == pytest.approx(integral / (1.0 - 2.0 * p), rel=1e-9)
        assert value < 1.0

    def test_limit_at_zero_recovers_the_mean(self):
        assert bounds.trimmed_mean_limit_exp(1e-9) == pytest.approx(1.0, abs=1e-6)

    def test_monte_carlo_agreement(self):
        # moderate-scale gate; the acceptance suite runs the full-size version
        estimates = []
        for rep in range(10):
            draws = RandomStream(314, rep).generator.exponential(1.0, 20_000)
            estimates.append(trimmed_mean(Dataset(draws), 2_000))
        assert float(np.mean(estimates)) == pytest.approx(0.83071, abs=0.02)


class TestRecommendBounds:
    def test_variance_driven(self):
        assert bounds.recommend_bounds(100, 0.0, 1.0) == (-20.0, 20.0)

    def test_mean_driven(self):
        assert bounds.recommend_bounds(1, 100.0, 1.0) == (-200.0, 200.0)

    def test_sqrt_n_scaling(self):
        _, u1 = bounds.recommend_bounds(100, 0.0, 1.0)
        _, u4 = bounds.recommend_bounds(400, 0.0, 1.0)
        assert u4 == pytest.approx(2 * u1)

    def test_margin(self):
        assert bounds.recommend_bounds(100, 0.0, 1.0, margin=1.0) == (-10.0, 10.0)
