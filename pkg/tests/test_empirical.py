import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpwinsor.empirical import (
    ClipInterval,
    Dataset,
    clip,
    empirical_cdf,
    empirical_quantile,
    load_values,
    trimmed_mean,
    winsorized_mean,
)

finite_floats = st.floats(min_value=-1e9, max_value=1e9, allow_nan=False)


class TestDataset:
    def test_rejects_empty(self):
        with pytest.raises(ValueError, match="empty input"):
            Dataset([])

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            Dataset([1.0, float("nan")])
        with pytest.raises(ValueError):
            Dataset([1.0, float("inf")])

    def test_sorted_view_is_permutation(self):
        data = Dataset([3.0, 1.0, 2.0, 1.0])
        assert np.array_equal(data.sorted_values, [1.0, 1.0, 2.0, 3.0])
        assert sorted(data.values.tolist()) == data.sorted_values.tolist()

    def test_values_immutable(self):
        data = Dataset([1.0, 2.0])
        with pytest.raises(ValueError):
            data.values[0] = 5.0


class TestCdf:
    def test_midpoint(self):
        assert empirical_cdf(Dataset([1, 2, 3, 4]), 2.5) == 0.5

    def test_below_minimum(self):
        assert empirical_cdf(Dataset([1, 2, 3, 4]), 0) == 0.0

    def test_at_maximum_inclusive(self):
        assert empirical_cdf(Dataset([1, 2, 3, 4]), 4) == 1.0

    def test_vectorized(self):
        out = empirical_cdf(Dataset([1, 2, 3, 4]), np.array([0.0, 2.5, 4.0]))
        assert np.array_equal(out, [0.0, 0.5, 1.0])


class TestQuantile:
    def test_median_convention(self):
        assert empirical_quantile(Dataset([10, 20, 30, 40]), 0.5) == 20

    def test_maximum(self):
        assert empirical_quantile(Dataset([10, 20, 30, 40]), 1.0) == 40

    def test_singleton(self):
        assert empirical_quantile(Dataset([7]), 0.3) == 7

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            empirical_quantile(Dataset([1, 2]), 0.0)
        with pytest.raises(ValueError):
            empirical_quantile(Dataset([1, 2]), 1.1)

    @given(
        values=st.lists(finite_floats, min_size=1, max_size=30),
        q1=st.floats(min_value=0.01, max_value=1.0),
        q2=st.floats(min_value=0.01, max_value=1.0),
    )
    @settings(max_examples=200)
    def test_monotone_and_member(self, values, q1, q2):
        data = Dataset(values)
        lo, hi = sorted([q1, q2])
        assert empirical_quantile(data, lo) <= empirical_quantile(data, hi)
        assert empirical_quantile(data, q1) in data.values


class TestClip:
    def test_above(self):
        assert clip(2.0, ClipInterval(0.0, 1.0)) == 1.0

    def test_below(self):
        assert clip(-3.0, ClipInterval(0.0, 1.0)) == 0.0

    def test_interior_identity(self):
        assert clip(0.4, ClipInterval(0.0, 1.0)) == 0.4

    def test_invalid_interval(self):
        with pytest.raises(ValueError):
            ClipInterval(1.0, 0.0)

    @given(
        x=finite_floats,
        y=finite_floats,
        a=finite_floats,
        b=finite_floats,
    )
    @settings(max_examples=200)
    def test_idempotent_monotone_lipschitz(self, x, y, a, b):
        interval = ClipInterval(min(a, b), max(a, b))
        cx, cy = float(clip(x, interval)), float(clip(y, interval))
        assert float(clip(cx, interval)) == cx
        if x <= y:
            assert cx <= cy
        assert abs(cx - cy) <= abs(x - y) + 1e-9


class TestWinsorizedMean:
    def test_integers_hand_computed(self):
        # quantiles of {0..9} at p=0.2: 2nd and 8th order statistics, i.e. [1, 7]
        data = Dataset(range(10))
        assert winsorized_mean(data, data, 0.2) == pytest.approx(4.3)

    def test_constant_data(self):
        data = Dataset([3.0, 3.0, 3.0, 3.0])
        assert winsorized_mean(data, data, 0.25) == 3.0

    def test_degenerate_interval(self):
        # quantiles of {-1,0,1} at p=0.34 both land on the middle order statistic
        estimation = Dataset([-100.0, 0.0, 100.0])
        quantiles = Dataset([-1.0, 0.0, 1.0])
        assert winsorized_mean(estimation, quantiles, 0.34) == 0.0

    def test_reduces_to_sample_mean_when_interval_brackets(self):
        # p with ceil(p*n) = 1 and ceil((1-p)*n) = n keeps the full range
        estimation = Dataset([1.0, 2.0, 3.0, 4.0, 5.0])
        quantiles = Dataset([0.0, 2.0, 3.0, 4.0, 10.0])
        assert winsorized_mean(estimation, quantiles, 0.1) == pytest.approx(3.0)

    def test_p_out_of_range(self):
        data = Dataset([1.0, 2.0])
        for p in (0.0, 0.5, 0.7):
            with pytest.raises(ValueError):
                winsorized_mean(data, data, p)


class TestTrimmedMean:
    def test_basic(self):
        assert trimmed_mean(Dataset([1, 2, 3, 4, 5]), 1) == 3.0

    def test_no_trimming(self):
        assert trimmed_mean(Dataset([1, 2, 3]), 0) == 2.0

    def test_constant(self):
        assert trimmed_mean(Dataset([5, 5, 5, 5]), 1) == 5.0

    def test_over_trimming_rejected(self):
        with pytest.raises(ValueError):
            trimmed_mean(Dataset([1, 2, 3, 4]), 2)

    @given(values=st.lists(finite_floats, min_size=1, max_size=25))
    @settings(max_examples=100)
    def test_zero_trim_is_sample_mean(self, values):
        data = Dataset(values)
        assert trimmed_mean(data, 0) == pytest.approx(float(np.mean(data.values)), rel=1e-12)


class TestLoader:
    def test_comments_and_blanks_skipped(self):
        text = "# header\n1.5\n\n  2.5\n# trailing\n-3\n"
        data = load_values(io.StringIO(text))
        assert data.values.tolist() == [1.5, 2.5, -3.0]

    def test_parse_failure_names_line(self):
        with pytest.raises(ValueError, match="line 3"):
            load_values(io.StringIO("1.0\n2.0\nnot-a-number\n"))

    def test_empty_errors(self):
        with pytest.raises(ValueError, match="empty input"):
            load_values(io.StringIO("# only comments\n\n"))

    def test_path_roundtrip(self, tmp_path):
        path = tmp_path / "data.txt"
        path.write_text("1\n2\n3\n")
        assert load_values(path).values.tolist() == [1.0, 2.0, 3.0]
