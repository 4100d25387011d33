import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import eval_hermite, factorial, polygamma

from tdse_expansion.errors import RangeError
from tdse_expansion.series import (
    INVERSE_LINEAR_SCALE,
    Rule,
    SeriesSpec,
    coefficient,
    comparison_series,
    differentiated_partial_sum,
    normalization_tail,
    partial_sums,
    sup_growth_profile,
    tail_bounds,
    term_ratio,
)

SPEC = SeriesSpec()


def direct_partial_sum(N, x, alpha=1.0):
    """Plain-float evaluation with scipy Hermite polynomials (small N only)."""
    total = 0.0
    for n in range(N + 1):
        norm = math.sqrt(alpha / (math.sqrt(math.pi) * 2.0**n * math.factorial(n)))
        total += (n + 0.5) / (n + 1) * norm * eval_hermite(n, alpha * x)
    return total


class TestCoefficient:
    def test_listed_values(self):
        assert coefficient(Rule.INVERSE_LINEAR, 0) == pytest.approx(0.7796968, abs=5e-8)
        assert coefficient("inverse-linear", 1) == pytest.approx(0.3898484, abs=5e-8)

    def test_custom(self):
        assert coefficient(Rule.CUSTOM, 3, lambda n: 2.0**-n) == 0.125
        with pytest.raises(ValueError):
            coefficient(Rule.CUSTOM, 3)
        with pytest.raises(ValueError):
            coefficient(Rule.INVERSE_LINEAR, -1)

    def test_custom_spec_needs_callable(self):
        with pytest.raises(ValueError):
            SeriesSpec(rule=Rule.CUSTOM)


class TestNormalizationTail:
    def test_listed_tail(self):
        assert normalization_tail(10_000) == pytest.approx(6.1e-5, abs=5e-7)

    @pytest.mark.parametrize("N", [1, 2, 10, 100, 1000, 10_000])
    def test_within_integral_bounds(self, N):
        lo, hi = tail_bounds(N)
        assert lo <= normalization_tail(N) <= hi

    @pytest.mark.parametrize("N", [0, 5, 50, 500, 5000])
    def test_matches_trigamma(self, N):
        # sum_{k > N+1} 1/k^2 = psi'(N + 2)
        expected = INVERSE_LINEAR_SCALE**2 * float(polygamma(1, N + 2))
        assert normalization_tail(N) == pytest.approx(expected, rel=1e-9)


class TestDifferentiatedPartialSum:
    def test_single_term(self):
        assert differentiated_partial_sum(SPEC, 0, 0.0) == pytest.approx(0.5 * math.pi**-0.25, rel=1e-15)
        assert differentiated_partial_sum(SPEC, 0, 0.0) == pytest.approx(0.3755628, abs=5e-8)

    def test_odd_term_vanishes_at_origin(self):
        assert differentiated_partial_sum(SPEC, 1, 0.0) == differentiated_partial_sum(SPEC, 0, 0.0)

    @given(st.integers(0, 30), st.floats(-6, 6), st.floats(0.5, 2))
    def test_matches_scipy_hermite(self, N, x, alpha):
        spec = SeriesSpec(alpha=alpha)
        want = direct_partial_sum(N, x, alpha)
        assert differentiated_partial_sum(spec, N, x) == pytest.approx(want, rel=1e-10, abs=1e-12)

    def test_vector_input_and_batched_sums(self):
        x = np.linspace(0, 3, 7)
        batched = partial_sums(SPEC, [2, 9, 5], x)
        for row, N in zip(batched, (2, 9, 5)):
            assert row == pytest.approx(differentiated_partial_sum(SPEC, N, x), rel=1e-14)

    def test_gaussian_factor(self):
        with_g = SeriesSpec(include_gaussian=True)
        x = 1.7
        assert differentiated_partial_sum(with_g, 12, x) == pytest.approx(
            math.exp(-x**2 / 2) * differentiated_partial_sum(SPEC, 12, x), rel=1e-13)

    def test_custom_rule(self):
        spec = SeriesSpec(rule=Rule.CUSTOM, custom=lambda n: 1.0 / (n + 1))
        assert differentiated_partial_sum(spec, 20, 2.0) == pytest.approx(
            differentiated_partial_sum(SPEC, 20, 2.0), rel=1e-14)

    def test_range_error(self):
        spec = SeriesSpec(rule=Rule.CUSTOM, custom=lambda n: 1e300 * 10.0**n)
        with pytest.raises(RangeError):
            differentiated_partial_sum(spec, 40, 3.0)

    def test_growth_in_N(self):
        x = SPEC.grid(6.0)
        sups = [np.abs(partial_sums(SPEC, [N], x)).max() for N in (4, 16, 64)]
        assert sups[0] < sups[1] < sups[2]


class TestComparisonSeries:
    @pytest.mark.parametrize("N", [0, 1, 10, 500])
    def test_origin(self, N):
        assert comparison_series(N, 0.0) == 1.0

    def test_matches_direct_sum(self):
        n = np.arange(21)
        direct = np.sum(2.0**n / np.sqrt(2.0**n * factorial(n)))
        assert comparison_series(20, 1.0) == pytest.approx(direct, rel=1e-13)

    def test_converges_at_unit_x(self):
        values = [comparison_series(N, 1.0) for N in (20, 40, 80, 160)]
        assert values[-1] == pytest.approx(values[-2], rel=1e-15)
        assert abs(values[1] - values[0]) > abs(values[2] - values[1])

    def test_outgrows_exponential(self):
        assert comparison_series(100, 5.0) > math.exp(10)


@pytest.fixture(scope="module")
def rows():
    return sup_growth_profile(SPEC, [8, 64], [1.0, 2.0, 4.0, 8.0])


class TestGrowthProfile:
    def test_monotone_in_window(self, rows):
        for N in (8, 64):
            sups = [r.sup for r in rows if r.N == N]
            assert sups == sorted(sups)

    def test_larger_N_on_widest_window(self, rows):
        by = {(r.N, r.window): r for r in rows}
        assert by[64, 8.0].sup > by[8, 8.0].sup

    def test_doubling_window_at_N64(self, rows):
        by = {(r.N, r.window): r for r in rows}
        assert by[64, 8.0].sup > 10 * by[64, 4.0].sup

    def test_argmax_inside_window(self, rows):
        for r in rows:
            assert 0 <= r.argmax <= r.window

    def test_grid_sup_is_a_lower_bound(self):
        coarse = sup_growth_profile(SeriesSpec(spacing=0.1), [16], [4.0])[0]
        fine = sup_growth_profile(SeriesSpec(spacing=0.01), [16], [4.0])[0]
        assert coarse.sup <= fine.sup


class TestTermRatio:
    def test_bounded_at_large_x(self):
        ratios = term_ratio(SPEC, 200, 50.0)
        assert ratios.min() >= 1e-2 and ratios.max() <= 1e2

    def test_unbounded_near_hermite_zeros(self):
        # for moderate x the Hermite terms pass through zeros and their
        # oscillation, so the ratio leaves any fixed band
        ratios = term_ratio(SPEC, 200, 3.0)
        assert ratios.min() < 1e-2

    def test_rejects_non_positive_x(self):
        with pytest.raises(ValueError):
            term_ratio(SPEC, 10, 0.0)


@given(st.integers(0, 400))
@settings(max_examples=30)
def test_tail_between_bounds_or_exact_at_zero(N):
    lo, hi = tail_bounds(N)
    tail = normalization_tail(N)
    if N >= 1:
        assert lo <= tail <= hi
    assert tail > 0
