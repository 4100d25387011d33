import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.polynomial import hermite as nph
from scipy.special import eval_hermite, gammaln

from tdse_expansion.errors import GridTooSmallError, RangeError
from tdse_expansion.oscillator_basis import (
    GridSpec,
    OscillatorModel,
    default_grid,
    eigenfunction_eval,
    hermite_eval,
    hermite_function_table,
    log_normalization_constant,
    normalization_constant,
    overlap_matrix,
    overlap_quadrature,
    x2_half_band,
    x2_half_matrix_element,
)

UNIT = OscillatorModel()
models = st.builds(OscillatorModel,
                   m=st.floats(0.2, 5.0), k=st.floats(0.2, 5.0), hbar=st.floats(0.5, 2.0))


def x2_half_gauss_hermite(model, row, col):
    """<row|x^2/2|col> by Gauss-Hermite quadrature on scipy's H_n; exact for
    the polynomial degrees involved."""
    xi, w = nph.hermgauss(80)
    poly = eval_hermite(row, xi) * eval_hermite(col, xi) * xi**2
    norm = math.sqrt(math.pi * 2.0 ** (row + col) * math.factorial(row) * math.factorial(col))
    return float(np.sum(w * poly) / norm / (2 * model.alpha**2))


class TestOscillatorModel:
    def test_unit_parameters(self):
        assert UNIT.omega == 1.0
        assert UNIT.alpha == 1.0
        assert UNIT.eigenenergy(0) == 0.5

    @given(models, st.integers(0, 1000))
    def test_eigenenergy_ladder(self, model, n):
        assert model.eigenenergy(n) == pytest.approx((n + 0.5) * model.hbar * model.omega, rel=1e-14)

    @given(models)
    def test_derived_quantities_follow_fields(self, model):
        assert model.omega == pytest.approx(math.sqrt(model.k / model.m))
        assert model.alpha == pytest.approx((model.m * model.k / model.hbar**2) ** 0.25)
        stiffer = model.with_spring(2 * model.k)
        assert stiffer.omega == pytest.approx(math.sqrt(2) * model.omega)

    @pytest.mark.parametrize("field", ["m", "k", "hbar"])
    @pytest.mark.parametrize("bad", [0.0, -1.0, float("inf"), float("nan")])
    def test_rejects_nonpositive(self, field, bad):
        with pytest.raises(ValueError):
            OscillatorModel(**{field: bad})


class TestHermite:
    @pytest.mark.parametrize("n, xi, expected", [(0, 3.7, 1.0), (2, 0.5, -1.0), (3, 1.0, -4.0)])
    def test_listed_values(self, n, xi, expected):
        assert hermite_eval(n, xi) == expected

    @given(st.integers(0, 40), st.floats(-6, 6))
    def test_matches_numpy_series(self, n, xi):
        coef = np.zeros(n + 1)
        coef[n] = 1
        ref = nph.hermval(xi, coef)
        assert hermite_eval(n, xi) == pytest.approx(ref, rel=1e-9, abs=1e-9 * max(1.0, abs(ref)))

    def test_recurrence_consistency(self):
        for xi in np.linspace(-4, 4, 17):
            for n in range(1, 200):
                lhs = hermite_eval(n + 1, xi)
                rhs = 2 * xi * hermite_eval(n, xi) - 2 * n * hermite_eval(n - 1, xi)
                assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)

    @given(st.integers(0, 60), st.floats(0, 5))
    def test_parity(self, n, xi):
        assert hermite_eval(n, -xi) == (-1) ** n * hermite_eval(n, xi)

    def test_overflow_is_a_range_error(self):
        with pytest.raises(RangeError):
            hermite_eval(400, 50.0)

    def test_negative_order_rejected(self):
        with pytest.raises(ValueError):
            hermite_eval(-1, 0.0)


class TestNormalization:
    def test_listed_values(self):
        assert normalization_constant(UNIT, 0) == pytest.approx(math.pi**-0.25, rel=1e-14)
        assert normalization_constant(UNIT, 1) == pytest.approx(math.sqrt(1 / (2 * math.sqrt(math.pi))),
                                                                 rel=1e-14)

    @given(st.integers(0, 250))
    def test_successive_ratio(self, n):
        ratio = normalization_constant(UNIT, n + 1) / normalization_constant(UNIT, n)
        assert ratio == pytest.approx(1 / math.sqrt(2 * (n + 1)), rel=1e-12)

    @given(st.integers(0, 20_000))
    def test_successive_log_ratio(self, n):
        step = log_normalization_constant(UNIT, n + 1) - log_normalization_constant(UNIT, n)
        assert step == pytest.approx(-0.5 * math.log(2 * (n + 1)), rel=1e-9)

    def test_large_order_stays_representable(self):
        # the value itself underflows past n ~ 270; its logarithm does not
        log_value = log_normalization_constant(UNIT, 10_000)
        expected = -0.25 * math.log(math.pi) - 0.5 * (10_000 * math.log(2) + gammaln(10_001))
        assert log_value == pytest.approx(expected, rel=1e-14)
        assert normalization_constant(UNIT, 10_000) == 0.0


class TestEigenfunctions:
    def test_listed_values(self):
        assert eigenfunction_eval(UNIT, 0, 0.0) == pytest.approx(math.pi**-0.25, rel=1e-14)
        assert eigenfunction_eval(UNIT, 1, 0.0) == 0.0
        assert eigenfunction_eval(UNIT, 0, 1.0) == pytest.approx(math.pi**-0.25 * math.exp(-0.5), rel=1e-14)

    @given(models, st.integers(0, 60), st.floats(-8, 8))
    def test_matches_scipy_closed_form(self, model, n, x):
        xi = model.alpha * x
        ref = normalization_constant(model, n) * eval_hermite(n, xi) * math.exp(-xi**2 / 2)
        got = eigenfunction_eval(model, n, x)
        assert got == pytest.approx(ref, rel=1e-8, abs=1e-12 * math.sqrt(model.alpha))

    def test_high_order_finite(self):
        x = np.linspace(-10, 10, 2001)
        values = eigenfunction_eval(UNIT, 500, x)
        assert np.all(np.isfinite(values))
        assert np.abs(values).max() < 1

    def test_normalized_on_quadrature(self):
        grid = default_grid(1)
        psi1 = eigenfunction_eval(UNIT, 1, grid.x)
        assert np.sum(psi1**2) * grid.dx == pytest.approx(1.0, abs=1e-12)

    def test_orthonormal_gram_matrix(self):
        idx = np.arange(31)
        gram = overlap_matrix(UNIT, idx, UNIT, idx)
        assert np.abs(gram - np.eye(31)).max() < 1e-9

    @given(st.integers(0, 40), st.floats(0, 6))
    def test_parity_of_functions(self, n, x):
        table = hermite_function_table(UNIT, n, np.array([-x, x]))
        assert table[n, 0] == pytest.approx((-1) ** n * table[n, 1], rel=1e-13, abs=1e-300)


class TestMatrixElements:
    def test_literal_values(self):
        assert x2_half_matrix_element(UNIT, 0, 0) == 0.25
        assert x2_half_matrix_element(UNIT, 2, 2) == 1.25
        assert x2_half_matrix_element(UNIT, 0, 2) == 0.5 * math.sqrt(0.5)
        assert x2_half_matrix_element(UNIT, 0, 4) == 0.0

    @given(st.integers(0, 500))
    def test_even_rows_reduce_to_listed_form(self, j):
        n = 2 * j
        assert x2_half_matrix_element(UNIT, n, n) == pytest.approx(j + 0.25, rel=1e-15)
        assert x2_half_matrix_element(UNIT, n, n + 2) == pytest.approx(
            0.5 * math.sqrt((j + 0.5) * (j + 1)), rel=1e-15)

    @given(st.integers(0, 300), st.integers(0, 300))
    def test_symmetry_and_selection_rule(self, row, col):
        value = x2_half_matrix_element(UNIT, row, col)
        assert value == x2_half_matrix_element(UNIT, col, row)
        if (row + col) % 2 or abs(row - col) > 2:
            assert value == 0.0

    def test_agrees_with_gauss_hermite(self):
        worst = 0.0
        for row in range(31):
            for col in range(31):
                diff = abs(x2_half_matrix_element(UNIT, row, col) - x2_half_gauss_hermite(UNIT, row, col))
                worst = max(worst, diff)
        assert worst < 1e-9

    @given(models, st.integers(0, 30))
    def test_scales_with_width(self, model, n):
        assert x2_half_matrix_element(model, n, n) == pytest.approx(
            x2_half_matrix_element(UNIT, n, n) / model.alpha**2, rel=1e-13)

    def test_band_matches_scalar(self):
        n = np.arange(0, 80, 2)
        diag, sup = x2_half_band(UNIT, n)
        assert np.array_equal(diag, [x2_half_matrix_element(UNIT, i, i) for i in n])
        assert np.allclose(sup, [x2_half_matrix_element(UNIT, i, i + 2) for i in n], rtol=1e-15, atol=0)


class TestOverlap:
    def test_orthonormal_pairs(self):
        assert overlap_quadrature(UNIT, 3, UNIT, 3) == pytest.approx(1.0, abs=1e-10)
        assert overlap_quadrature(UNIT, 0, UNIT, 2) == pytest.approx(0.0, abs=1e-10)

    def test_sudden_jump_overlap(self):
        post = OscillatorModel(k=2.0)
        a, b = UNIT.alpha, post.alpha
        expected = 2 * a * b / (a * a + b * b)
        assert overlap_quadrature(UNIT, 0, post, 0) ** 2 == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.98517, abs=5e-6)

    def test_accuracy_up_to_fifty(self):
        for n in (10, 25, 50):
            assert overlap_quadrature(UNIT, n, UNIT, n) == pytest.approx(1.0, abs=1e-10)
            assert overlap_quadrature(UNIT, n, UNIT, n - 2) == pytest.approx(0.0, abs=1e-10)

    def test_small_grid_rejected(self):
        with pytest.raises(GridTooSmallError):
            overlap_quadrature(UNIT, 10, UNIT, 10, GridSpec(3.0, 512))

    @given(st.integers(0, 200))
    def test_default_grid_rule(self, n_max):
        grid = default_grid(n_max, UNIT)
        assert grid.half_width >= max(12.0, 3 * math.sqrt(2 * n_max + 1))
        assert grid.points >= 4096
        assert grid.x[0] == -grid.half_width
        assert grid.dx == pytest.approx(2 * grid.half_width / grid.points)
