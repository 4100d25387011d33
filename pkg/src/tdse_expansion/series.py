"""Probes of the ~1/(n+1) coefficient family and its differentiated series.

The initial-value family is C_n0 = sqrt(6)/(pi (n+1)), normalized so that
sum |C_n0|^2 = 1. Taking the time derivative at t = 0 weights each term by
E_n, which gives the series

    sum_n (n + 1/2)/(n + 1) N_n H_n(alpha x)

whose partial sums grow without bound in x. Everything here works in log
space, because H_n(alpha x) leaves double range long before the interesting N.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import RangeError
from .oscillator_basis import scaled_hermite_functions

INVERSE_LINEAR_SCALE = math.sqrt(6.0) / math.pi


class Rule(str, enum.Enum):
    INVERSE_LINEAR = "inverse-linear"
    CUSTOM = "custom"


@dataclass(frozen=True)
class SeriesSpec:
    """Coefficient rule plus the evaluation setup for growth profiles.

    For INVERSE_LINEAR the differentiated series uses the weights
    (n + 1/2)/(n + 1), i.e. the common sqrt(6)/pi factor is dropped. For
    CUSTOM the weights are (n + 1/2) * custom(n).
    """

    rule: Rule = Rule.INVERSE_LINEAR
    N: int = 64
    x_max: float = 8.0
    spacing: float = 0.01
    alpha: float = 1.0
    include_gaussian: bool = False
    custom: Callable[[int], float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "rule", Rule(self.rule))
        if self.rule is Rule.CUSTOM and self.custom is None:
            raise ValueError("CUSTOM rule needs a coefficient callable")
        if self.N < 0:
            raise ValueError("N must be non-negative")
        if not (self.spacing > 0 and self.x_max >= 0 and self.alpha > 0):
            raise ValueError("need spacing > 0, x_max >= 0 and alpha > 0")

    def grid(self, x_max: float | None = None) -> np.ndarray:
        """Uniform grid on [0, x_max] at ``spacing``, endpoint included."""
        x_max = self.x_max if x_max is None else x_max
        count = int(round(x_max / self.spacing))
        return self.spacing * np.arange(count + 1)

    def weight(self, n: int) -> float:
        if self.rule is Rule.INVERSE_LINEAR:
            return (n + 0.5) / (n + 1)
        return (n + 0.5) * float(self.custom(n))


def coefficient(rule: Rule | str, n: int, custom: Callable[[int], float] | None = None) -> float:
    if n < 0:
        raise ValueError("n must be non-negative")
    if Rule(rule) is Rule.INVERSE_LINEAR:
        return INVERSE_LINEAR_SCALE / (n + 1)
    if custom is None:
        raise ValueError("CUSTOM rule needs a coefficient callable")
    return float(custom(n))


def partial_sums(spec: SeriesSpec, N_list: Sequence[int], x) -> np.ndarray:
    """Partial sums at every N in ``N_list`` from one pass of the recurrence."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    wanted = sorted(set(int(n) for n in N_list))
    if wanted and wanted[0] < 0:
        raise ValueError("N must be non-negative")
    xi = spec.alpha * x
    log_pref = 0.5 * math.log(spec.alpha / math.sqrt(math.pi)) + np.zeros_like(xi)
    if spec.include_gaussian:
        log_pref = log_pref - 0.5 * xi**2
    out = {}
    total = np.zeros_like(xi)
    with np.errstate(over="ignore", invalid="ignore"):
        for n, mantissa, scale in scaled_hermite_functions(wanted[-1] if wanted else 0, xi, log_pref):
            total = total + spec.weight(n) * mantissa * np.exp(scale)
            if not np.all(np.isfinite(total)):
                raise RangeError(f"partial sum left double range at n={n}")
            if n in wanted:
                out[n] = total.copy()
    return np.array([out[int(n)] for n in N_list])


def differentiated_partial_sum(spec: SeriesSpec, N: int, x):
    """sum_{n<=N} w_n N_n H_n(alpha x), Gaussian factor excluded unless the
    spec asks for it. Scalar in, scalar out."""
    values = partial_sums(spec, [N], x)[0]
    return float(values[0]) if np.ndim(x) == 0 else values


def comparison_series(N: int, x: float, alpha: float = 1.0) -> float:
    """sum_{n<=N} (2 alpha x)^n / sqrt(2^n n!), summed from log-space terms."""
    if N < 0:
        raise ValueError("N must be non-negative")
    z = 2.0 * alpha * x
    if z == 0.0:
        return 1.0
    log_z, sign = math.log(abs(z)), math.copysign(1.0, z)
    n = np.arange(N + 1)
    logs = n * log_z - 0.5 * (n * math.log(2.0) + np.array([math.lgamma(k + 1) for k in n]))
    peak = logs.max()
    signs = sign ** n
    return math.exp(peak) * math.fsum(signs * np.exp(logs - peak))


def comparison_log_term(n: int, x: float, alpha: float = 1.0) -> float:
    """log |(2 alpha x)^n / sqrt(2^n n!)|."""
    return n * math.log(abs(2.0 * alpha * x)) - 0.5 * (n * math.log(2.0) + math.lgamma(n + 1))


def term_ratio(spec: SeriesSpec, n_max: int, x: float) -> np.ndarray:
    """|n-th differentiated term| / |n-th comparison term| for n = 0..n_max."""
    if x <= 0:
        raise ValueError("term ratio needs x > 0")
    xi = spec.alpha * x
    log_pref = 0.5 * math.log(spec.alpha / math.sqrt(math.pi))
    ratios = np.empty(n_max + 1)
    for n, mantissa, scale in scaled_hermite_functions(n_max, xi, log_pref):
        log_term = math.log(abs(spec.weight(n) * mantissa[0])) + scale[0] if mantissa[0] else -math.inf
        ratios[n] = math.exp(log_term - comparison_log_term(n, x, spec.alpha))
    return ratios


@dataclass(frozen=True)
class GrowthRow:
    N: int
    window: float
    sup: float  # grid maximum, a lower bound on the true supremum
    argmax: float


def sup_growth_profile(spec: SeriesSpec, N_list: Iterable[int], windows: Iterable[float]) -> list[GrowthRow]:
    """sup over x in [0, w] of |partial sum| for each N and window w.

    The maximum is taken over a uniform grid at ``spec.spacing``, so each
    reported value is a lower bound on the true supremum.
    """
    N_list = list(N_list)
    windows = sorted(windows)
    x = spec.grid(windows[-1])
    sums = np.abs(partial_sums(spec, N_list, x))
    rows = []
    for N, values in zip(N_list, sums):
        for w in windows:
            upto = x <= w + 1e-12
            i = int(np.argmax(values[upto]))
            rows.append(GrowthRow(N=N, window=w, sup=float(values[upto][i]), argmax=float(x[upto][i])))
    return rows


def normalization_tail(N: int) -> float:
    """1 - sum_{n<=N} |C_n0|^2 for the INVERSE_LINEAR family."""
    if N < 0:
        raise ValueError("N must be non-negative")
    k = np.arange(1, N + 2, dtype=float)
    return 1.0 - math.fsum(INVERSE_LINEAR_SCALE**2 / k**2)


def tail_bounds(N: int) -> tuple[float, float]:
    """Integral-test bounds 6/(pi^2 (N+2)) <= tail <= 6/(pi^2 (N+1))."""
    c = 6.0 / math.pi**2
    return c / (N + 2), c / (N + 1)
