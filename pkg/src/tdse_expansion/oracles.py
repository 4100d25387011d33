"""Reference solutions of the same problem that do not go through the
coefficient equations.

* ``grid_propagate``: Crank-Nicolson (implicit midpoint) on a uniform grid
  with a five-point Laplacian; unitary by construction.
* ``gaussian_evolve``: for a quadratic Hamiltonian the ground-state Gaussian
  stays Gaussian,
      psi(x, t) = (m w / pi hbar)^(1/4) eps^(-1/2) exp(i m (eps'/eps) x^2 / 2 hbar),
  with eps'' + (k S(t)/m) eps = 0, eps(0) = 1, eps'(0) = i w.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solve_banded

from .errors import DomainOverflowError, NumericalFailure
from .hamiltonian import RampSchedule, Variant
from .oscillator_basis import GridSpec, OscillatorModel, default_grid, hermite_function_table
from .rk4 import rk4_step

DEFAULT_GRID = GridSpec(half_width=16.0, points=4096)

# fourth-order central second difference, offsets -2..2
_STENCIL = np.array([-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12])


class CompletenessWarning(RuntimeWarning):
    pass


@dataclass(frozen=True, eq=False)
class GridWavefunction:
    grid: GridSpec
    psi: np.ndarray
    t: float = 0.0

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def dx(self) -> float:
        return self.grid.dx

    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2) * self.dx)

    def boundary_ratio(self) -> float:
        mag = np.abs(self.psi)
        return float(max(mag[:2].max(), mag[-2:].max()) / mag.max())

    def aligned(self) -> np.ndarray:
        """Samples rotated so the largest-magnitude sample is real positive."""
        i = int(np.argmax(np.abs(self.psi)))
        return self.psi * np.exp(-1j * np.angle(self.psi[i]))


def grid_eigenstate(model: OscillatorModel, n: int = 0, grid: GridSpec = DEFAULT_GRID,
                    t: float = 0.0) -> GridWavefunction:
    psi = hermite_function_table(model, n, grid.x)[n].astype(complex)
    return GridWavefunction(grid, psi, t)


def _breakpoints(schedule: RampSchedule) -> list[float]:
    points = [0.0]
    if schedule.variant is Variant.RAMP_UP or schedule.plateau:
        points.append(schedule.T)
    return points


def _segments(t0: float, t1: float, dt: float, breakpoints: Sequence[float]):
    """Split [t0, t1] at breakpoints; yield (start, step, count) with the step
    shortened slightly so each piece is a whole number of steps."""
    edges = [t0] + [b for b in breakpoints if t0 < b < t1] + [t1]
    for a, b in zip(edges[:-1], edges[1:]):
        count = max(1, math.ceil((b - a) / dt - 1e-9))
        yield a, (b - a) / count, count


def _second_difference(psi: np.ndarray) -> np.ndarray:
    """Stencil applied with zero (Dirichlet) values outside the box; times dx^2."""
    out = _STENCIL[2] * psi
    out[1:] += _STENCIL[1] * psi[:-1]
    out[:-1] += _STENCIL[3] * psi[1:]
    out[2:] += _STENCIL[0] * psi[:-2]
    out[:-2] += _STENCIL[4] * psi[2:]
    return out


def grid_propagate(initial: GridWavefunction, schedule: RampSchedule, model: OscillatorModel,
                   dt: float = 1e-4, t_end: float = 1.0,
                   observer: Callable[[GridWavefunction], None] | None = None,
                   observe_every: int = 1, check_every: int = 50) -> GridWavefunction:
    """Propagate under H(t) = p^2/2m + S(t) k x^2/2 from ``initial.t`` to ``t_end``.

    The potential is sampled at each step midpoint; steps are aligned with
    the kinks of S(t). Raises DomainOverflowError when the boundary amplitude
    exceeds 1e-8 of the peak.
    """
    if t_end < initial.t:
        raise ValueError("t_end precedes the initial time")
    if initial.boundary_ratio() > 1e-10:
        raise DomainOverflowError("initial state is not contained by the grid")
    grid = initial.grid
    x, M = grid.x, grid.points
    hbar = model.hbar
    kin = -(hbar**2) / (2.0 * model.m) / grid.dx**2
    half_k_x2 = 0.5 * model.k * x**2

    psi = initial.psi.astype(complex)
    if observer is not None:
        observer(initial)
    step_no = 0
    for start, h, count in _segments(float(initial.t), float(t_end), dt, _breakpoints(schedule)):
        c = 0.5j * h / hbar
        band = np.zeros((5, M), dtype=complex)
        for row in range(5):
            band[row] = c * kin * _STENCIL[4 - row]
        band[2] += 1.0
        for i in range(count):
            t_mid = start + (i + 0.5) * h
            v = schedule.S(t_mid) * half_k_x2
            h_psi = kin * _second_difference(psi) + v * psi
            ab = band.copy()
            ab[2] += c * v
            psi = solve_banded((2, 2), ab, psi - c * h_psi, overwrite_ab=True,
                               overwrite_b=True, check_finite=False)
            step_no += 1
            t_now = start + (i + 1) * h
            if step_no % check_every == 0 or (i == count - 1):
                mag = np.abs(psi)
                if max(mag[:2].max(), mag[-2:].max()) > 1e-8 * mag.max():
                    raise DomainOverflowError(f"wavefunction reached the grid edge at t={t_now:.6g}")
                if not np.all(np.isfinite(psi)):
                    raise NumericalFailure(f"non-finite grid wavefunction at t={t_now:.6g}")
            if observer is not None and step_no % observe_every == 0:
                observer(GridWavefunction(grid, psi, t_now))
    return GridWavefunction(grid, psi, float(t_end))


def grid_energy(state: GridWavefunction, schedule: RampSchedule, model: OscillatorModel) -> float:
    """<psi| H(t) |psi> with a spectral kinetic term."""
    grid = state.grid
    k = 2 * np.pi * np.fft.fftfreq(grid.points, d=grid.dx)
    spectrum = np.abs(np.fft.fft(state.psi)) ** 2
    kinetic = model.hbar**2 / (2 * model.m) * np.sum(k**2 * spectrum) * grid.dx / grid.points
    potential = schedule.S(state.t) * 0.5 * model.k * np.sum(grid.x**2 * np.abs(state.psi) ** 2) * grid.dx
    return float(kinetic + potential)


@dataclass(frozen=True)
class GaussianState:
    t: float
    eps: complex
    eps_dot: complex
    arg_eps: float  # continuous branch of arg(eps)
    model: OscillatorModel
    error_estimate: float | None = None

    @property
    def wronskian(self) -> float:
        """Im(conj(eps) eps'); stays at omega."""
        return float((np.conj(self.eps) * self.eps_dot).imag)

    @property
    def width(self) -> float:
        """Standard deviation of |psi|^2."""
        mdl = self.model
        return abs(self.eps) * math.sqrt(mdl.hbar / (2 * mdl.m * mdl.omega))

    def wavefunction(self, x) -> np.ndarray:
        mdl = self.model
        x = np.asarray(x, dtype=float)
        pref = (mdl.m * mdl.omega / (math.pi * mdl.hbar)) ** 0.25 / math.sqrt(abs(self.eps))
        pref = pref * np.exp(-0.5j * self.arg_eps)
        return pref * np.exp(0.5j * mdl.m * (self.eps_dot / self.eps) * x**2 / mdl.hbar)

    def h0_energy(self) -> float:
        """<H0> = hbar w (|eps|^2 + |eps'|^2 / w^2) / 4, zero-ramp value hbar w / 2."""
        w = self.model.omega
        return self.model.hbar * w * (abs(self.eps) ** 2 + abs(self.eps_dot) ** 2 / w**2) / 4

    def energy(self, schedule: RampSchedule) -> float:
        """<H(t)> = hbar w (S(t) |eps|^2 + |eps'|^2 / w^2) / 4."""
        w = self.model.omega
        s = schedule.S(self.t)
        return self.model.hbar * w * (s * abs(self.eps) ** 2 + abs(self.eps_dot) ** 2 / w**2) / 4


def _classical_run(schedule: RampSchedule, model: OscillatorModel, times: Sequence[float], dt: float):
    times = sorted(float(t) for t in times)
    if times and times[0] < 0:
        raise ValueError("Gaussian oracle starts at t = 0")
    stiffness = model.k / model.m
    f = lambda y, t: np.array([y[1], -stiffness * schedule.S(t) * y[0]])  # noqa: E731
    y = np.array([1.0 + 0j, 1j * model.omega])
    arg = 0.0
    t = 0.0
    out = []
    pending = list(times)
    while pending and pending[0] == 0.0:
        out.append((pending.pop(0), y.copy(), arg))
    horizon = pending[-1] if pending else 0.0
    stops = sorted(set(pending) | {b for b in _breakpoints(schedule) if 0 < b < horizon})
    for stop in stops:
        for start, h, count in _segments(t, stop, dt, []):
            for i in range(count):
                prev = y[0]
                y = rk4_step(f, y, start + i * h, h)
                arg += float(np.angle(y[0] / prev))
        if not np.all(np.isfinite(y)) or abs(y[0]) > 1e150:
            raise NumericalFailure(f"classical amplitude blew up before t={stop:.6g}")
        t = stop
        while pending and pending[0] <= stop:
            out.append((pending.pop(0), y.copy(), arg))
    return out


def gaussian_trajectory(schedule: RampSchedule, model: OscillatorModel, times: Sequence[float],
                        dt: float = 1e-4, richardson: bool = False) -> list[GaussianState]:
    """Gaussian oracle at each requested time (one integration pass).

    With ``richardson`` the run is repeated at dt/2 and the error estimate
    |eps_dt - eps_dt/2| / 15 is attached to each state.
    """
    coarse = _classical_run(schedule, model, times, dt)
    fine = _classical_run(schedule, model, times, dt / 2) if richardson else None
    states = []
    for i, (t, y, arg) in enumerate(coarse):
        err = None
        if fine is not None:
            err = float(np.max(np.abs(fine[i][1] - y)) / 15)
            t, y, arg = fine[i]
        states.append(GaussianState(t, complex(y[0]), complex(y[1]), arg, model, err))
    return states


def gaussian_evolve(schedule: RampSchedule, model: OscillatorModel, t: float,
                    dt: float = 1e-4, richardson: bool = False) -> GaussianState:
    return gaussian_trajectory(schedule, model, [t], dt, richardson)[0]


def gaussian_grid(state: GaussianState, n_max: int, model: OscillatorModel) -> GridSpec:
    """Grid adequate for both the Gaussian and psi_{n_max} of ``model``."""
    base = default_grid(n_max, model, state.model)
    half_width = max(base.half_width, 12.0 * state.width)
    chirp = state.model.m * abs((state.eps_dot / state.eps).real) * half_width / state.model.hbar
    k_max = chirp + 1.0 / state.width + math.sqrt(2 * n_max + 1) * model.alpha
    points = max(base.points, int(math.ceil(2 * half_width * 4 * k_max / math.pi)))
    return GridSpec(half_width, points + points % 2)


def gaussian_on_grid(state: GaussianState, grid: GridSpec = DEFAULT_GRID) -> GridWavefunction:
    return GridWavefunction(grid, state.wavefunction(grid.x), state.t)


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    t: float
    indices: np.ndarray
    amplitudes: np.ndarray
    norm: float

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def completeness_defect(self) -> float:
        return float(self.norm - np.sum(self.populations))


@lru_cache(maxsize=16)
def _basis_table(model: OscillatorModel, n_max: int, grid: GridSpec) -> np.ndarray:
    table = hermite_function_table(model, n_max, grid.x)
    table.setflags(write=False)
    return table


def project_onto_basis(state, model: OscillatorModel, n_max: int,
                       grid: GridSpec | None = None) -> ProjectionResult:
    """D_n = integral psi_n(x) psi(x, t) dx for n = 0..n_max by quadrature.

    ``state`` is a GridWavefunction (its own grid is used) or a GaussianState
    (sampled on ``grid`` or an automatically sized one). Warns with
    CompletenessWarning when 1 - sum |D_n|^2 exceeds 1e-6.
    """
    if isinstance(state, GaussianState):
        state = gaussian_on_grid(state, grid or gaussian_grid(state, n_max, model))
    table = _basis_table(model, n_max, state.grid)
    amps = table @ state.psi * state.dx
    result = ProjectionResult(float(state.t), np.arange(n_max + 1), amps, state.norm())
    if result.completeness_defect > 1e-6:
        warnings.warn(f"projection onto {n_max + 1} states misses {result.completeness_defect:.2e} "
                      f"of the norm at t={state.t:.4g}", CompletenessWarning, stacklevel=2)
    return result
