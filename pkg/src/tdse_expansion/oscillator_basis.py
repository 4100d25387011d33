"""Harmonic-oscillator eigenbasis: Hermite polynomials, Hermite functions,
eigenenergies and the x^2 matrix elements that drive the coupling.

All evaluations of the normalized eigenfunctions go through a recurrence on
the normalized functions themselves, carried with a running log-scale so that
neither the polynomial nor the Gaussian factor over- or underflows on its own.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import GridTooSmallError, RangeError

_RESCALE_ABOVE = 1e100


@dataclass(frozen=True)
class OscillatorModel:
    """H0 = p^2/2m + k x^2/2. Derived quantities are properties only."""

    m: float = 1.0
    k: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("m", "k", "hbar"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")

    @property
    def omega(self) -> float:
        return math.sqrt(self.k / self.m)

    @property
    def alpha(self) -> float:
        return (self.m * self.k / self.hbar**2) ** 0.25

    def eigenenergy(self, n):
        return (n + 0.5) * self.hbar * self.omega

    def with_spring(self, k: float) -> "OscillatorModel":
        return OscillatorModel(m=self.m, k=k, hbar=self.hbar)


def hermite_eval(n: int, xi: float) -> float:
    """Physicists' Hermite polynomial H_n(xi) by forward recurrence.

    Raises RangeError once the value is no longer finite.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    h_prev, h = 1.0, 2.0 * xi
    if n == 0:
        return h_prev
    for j in range(1, n):
        h_prev, h = h, 2.0 * xi * h - 2.0 * j * h_prev
        if not math.isfinite(h):
            raise RangeError(f"H_{j + 1}({xi}) overflowed")
    if not math.isfinite(h):
        raise RangeError(f"H_{n}({xi}) overflowed")
    return h


def log_normalization_constant(model: OscillatorModel, n: int) -> float:
    return 0.5 * (math.log(model.alpha) - 0.5 * math.log(math.pi)
                  - n * math.log(2.0) - math.lgamma(n + 1))


def normalization_constant(model: OscillatorModel, n: int) -> float:
    """N_n = [alpha / (sqrt(pi) 2^n n!)]^(1/2), evaluated through logs."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return math.exp(log_normalization_constant(model, n))


def scaled_hermite_functions(n_max: int, xi, log_prefactor) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
    """Yield (n, mantissa, log_scale) with value_n = mantissa * exp(log_scale).

    The sequence is exp(log_prefactor) * sqrt(2^-n / n!) * H_n(xi) up to the
    sqrt(alpha/sqrt(pi)) constant, i.e. the normalized recurrence
        a_{n+1} = sqrt(2/(n+1)) xi a_n - sqrt(n/(n+1)) a_{n-1},  a_0 = 1.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    scale = np.broadcast_to(np.asarray(log_prefactor, dtype=float), xi.shape).copy()
    a_prev = np.zeros_like(xi)
    a = np.ones_like(xi)
    yield 0, a.copy(), scale.copy()
    for n in range(n_max):
        a_prev, a = a, math.sqrt(2.0 / (n + 1)) * xi * a - math.sqrt(n / (n + 1)) * a_prev
        big = np.abs(a) > _RESCALE_ABOVE
        if big.any():
            r = np.where(big, np.abs(a), 1.0)
            a = a / r
            a_prev = a_prev / r
            scale = scale + np.log(r)
        if not np.all(np.isfinite(a)):
            raise RangeError(f"normalized Hermite recurrence left range at n={n + 1}")
        yield n + 1, a.copy(), scale.copy()


def _expand(mantissa, scale):
    with np.errstate(over="raise", under="ignore"):
        try:
            return mantissa * np.exp(scale)
        except FloatingPointError as exc:
            raise RangeError("Hermite function value overflowed") from exc


def hermite_function_table(model: OscillatorModel, n_max: int, x) -> np.ndarray:
    """psi_n(x) for n = 0..n_max, shape (n_max + 1, len(x))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xi = model.alpha * x
    log_pref = 0.5 * math.log(model.alpha / math.sqrt(math.pi)) - 0.5 * xi**2
    table = np.empty((n_max + 1, x.size))
    for n, a, s in scaled_hermite_functions(n_max, xi, log_pref):
        table[n] = _expand(a, s)
    return table


def eigenfunction_eval(model: OscillatorModel, n: int, x):
    """psi_n(x) = N_n H_n(alpha x) exp(-alpha^2 x^2 / 2)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    values = hermite_function_table(model, n, x)[n]
    return float(values[0]) if np.isscalar(x) else values.reshape(np.shape(x))


def x2_half_matrix_element(model: OscillatorModel, row: int, col: int) -> float:
    """<row| x^2/2 |col> in the eigenbasis of ``model``.

    Nonzero only for |row - col| in {0, 2}; in units with alpha = 1 the
    even-index entries are (j + 0.25) and 0.5*sqrt((j + 0.5)(j + 1)).
    """
    if row < 0 or col < 0:
        raise ValueError("indices must be non-negative")
    length2 = 1.0 / model.alpha**2
    if row == col:
        return (row / 2 + 0.25) * length2
    if abs(row - col) == 2:
        j = min(row, col) / 2
        return 0.5 * math.sqrt((j + 0.5) * (j + 1.0)) * length2
    return 0.0


def x2_half_band(model: OscillatorModel, n, dtype=float):
    """Vectorized (diagonal, <n|x^2/2|n+2>) pair for an index array."""
    j = np.asarray(n, dtype=dtype) / 2
    length2 = dtype(1) / dtype(model.alpha) ** 2
    half = dtype(0.5)
    return (j + dtype(0.25)) * length2, half * np.sqrt((j + half) * (j + 1)) * length2


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid x_i = -L + i*dx, dx = 2L/M, i = 0..M-1."""

    half_width: float
    points: int

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.points

    @property
    def x(self) -> np.ndarray:
        return -self.half_width + self.dx * np.arange(self.points)


def default_grid(n_max: int, *models: OscillatorModel) -> GridSpec:
    """Grid wide enough for psi_{n_max} of every model, and fine enough to
    resolve the products of two such functions."""
    alphas = [mdl.alpha for mdl in models] or [1.0]
    reach = math.sqrt(2 * n_max + 1)
    half_width = max(12.0, 3.0 * reach / min(alphas))
    k_max = (reach + 2.0) * max(alphas)
    points = max(4096, int(math.ceil(2.0 * half_width * 4.0 * k_max / math.pi)))
    points += points % 2
    return GridSpec(half_width, points)


def _check_edges(values: np.ndarray, tol: float, what: str):
    peak = np.max(np.abs(values), axis=-1)
    edge = np.maximum(np.abs(values[..., 0]), np.abs(values[..., -1]))
    bad = edge > tol * peak
    if np.any(bad):
        raise GridTooSmallError(f"{what}: boundary value exceeds {tol:g} of peak")


def overlap_matrix(model_a: OscillatorModel, indices_a: Sequence[int],
                   model_b: OscillatorModel, indices_b: Sequence[int],
                   grid: GridSpec | None = None) -> np.ndarray:
    """O[i, j] = integral psi^a_{indices_a[i]} psi^b_{indices_b[j]} dx."""
    indices_a = np.asarray(indices_a, dtype=int)
    indices_b = np.asarray(indices_b, dtype=int)
    top = int(max(indices_a.max(initial=0), indices_b.max(initial=0)))
    grid = grid or default_grid(top, model_a, model_b)
    x = grid.x
    ta = hermite_function_table(model_a, int(indices_a.max(initial=0)), x)[indices_a]
    tb = hermite_function_table(model_b, int(indices_b.max(initial=0)), x)[indices_b]
    _check_edges(ta, 1e-6, "overlap grid")
    _check_edges(tb, 1e-6, "overlap grid")
    return (ta * grid.dx) @ tb.T


def overlap_quadrature(model_a: OscillatorModel, n_a: int, model_b: OscillatorModel, n_b: int,
                       grid: GridSpec | None = None) -> float:
    grid = grid or default_grid(max(n_a, n_b), model_a, model_b)
    x = grid.x
    integrand = (hermite_function_table(model_a, n_a, x)[n_a]
                 * hermite_function_table(model_b, n_b, x)[n_b])
    _check_edges(integrand, 1e-12, "overlap integrand")
    return float(np.sum(integrand) * grid.dx)

