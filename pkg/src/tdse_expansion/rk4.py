"""Classic fixed-step fourth-order Runge-Kutta and the trajectory driver."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable

import numpy as np

from .coupled_system import CoefficientState, CoupledSystem, Fixed, Growing, grow_frontier
from .hamiltonian import RampSchedule
from .oscillator_basis import OscillatorModel

Field = Callable[[np.ndarray, float], np.ndarray]


def rk4_step(f: Field, y, t, h):
    """y_{j+1} = y_j + (z1 + 2 z2 + 2 z3 + z4)/6 with z_i = h * f(...)."""
    z1 = h * f(y, t)
    z2 = h * f(y + z1 / 2, t + h / 2)
    z3 = h * f(y + z2 / 2, t + h / 2)
    z4 = h * f(y + z3, t + h)
    return y + (z1 + 2 * z2 + 2 * z3 + z4) / 6


def _re_dot(u, v):
    return np.sum(u.real * v.real + u.imag * v.imag)


def rk4_step_with_norm_change(f: Field, y, t, h):
    """RK4 step plus the exact change of ||y||^2 it causes.

    Only valid when f(y, t) = A(t) y with A(t) skew-Hermitian. Then every
    term Re<y, A y> vanishes identically and is dropped analytically, which
    leaves a sum of O(h^2) terms whose rounding error is O(eps h^2) rather
    than O(eps). The returned change is what ||y_{j+1}||^2 - ||y_j||^2 would be
    in exact arithmetic.
    """
    k1 = f(y, t)
    k2 = f(y + h * k1 / 2, t + h / 2)
    k3 = f(y + h * k2 / 2, t + h / 2)
    k4 = f(y + h * k3, t + h)
    step = h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
    # Re<y,k2> = h/2 Re<y,A2 k1>, Re<y,k3> = h/2 Re<y,A2 k2>, Re<y,k4> = h Re<y,A4 k3>
    cross = (_re_dot(y, f(k1, t + h / 2)) + _re_dot(y, f(k2, t + h / 2))
             + _re_dot(y, f(k3, t + h)))
    change = (h * h / 3) * cross + _re_dot(step, step)
    return y + step, change


@dataclass(frozen=True)
class StepperConfig:
    h: float
    steps: int

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("step size must be positive")
        if self.steps < 0:
            raise ValueError("step count must be non-negative")

    @classmethod
    def to_time(cls, h: float, end_time: float) -> "StepperConfig":
        steps = round(end_time / h)
        if not math.isclose(steps * h, end_time, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(f"end time {end_time} is not a whole number of steps of {h}")
        return cls(h=h, steps=steps)

    @property
    def end_time(self) -> float:
        return self.steps * self.h


@dataclass(frozen=True, eq=False)
class IntegrationResult:
    state: CoefficientState
    status: str  # "completed" | "aborted" | "non-finite"
    steps_taken: int
    message: str = ""

    @property
    def completed(self) -> bool:
        return self.status == "completed"


def _squared_norm(c) -> float:
    # overflow here is the breakdown being detected, not a bug
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.sum(c.real**2 + c.imag**2))


def integrate(initial: CoefficientState, config: StepperConfig, schedule: RampSchedule,
              model: OscillatorModel, observers: Iterable[Callable[[CoefficientState], None]] = (),
              abort_ceiling: float = 1e6, track_norm_drift: bool = False,
              precision: str = "double") -> IntegrationResult:
    """Advance ``initial`` by ``config.steps`` RK4 steps.

    Observers are called with the initial state and after every step.
    GROWING states get their frontier extended once per step, before the
    first stage. The run halts early if the squared norm passes
    ``abort_ceiling`` or any coefficient goes non-finite.

    ``precision="extended"`` carries the state in long double.
    ``track_norm_drift`` accumulates the exact per-step norm change into
    ``state.norm_drift``. It is meaningful for FIXED truncations only, where
    the generator is skew-Hermitian.
    """
    if precision not in ("double", "extended"):
        raise ValueError("precision must be 'double' or 'extended'")
    if track_norm_drift and not isinstance(initial.policy, Fixed):
        raise ValueError("norm drift tracking needs a FIXED truncation")
    cdtype = np.clongdouble if precision == "extended" else np.complex128
    rdtype = np.longdouble if precision == "extended" else float
    observers = list(observers)

    system = CoupledSystem(schedule, model, stride=initial.stride, dtype=cdtype,
                           capacity=initial.size)
    h = rdtype(repr(config.h)) if precision == "extended" else config.h
    t0 = rdtype(initial.t)
    state = replace(initial, coeffs=initial.coeffs.astype(cdtype),
                    norm_drift=0.0 if track_norm_drift else initial.norm_drift)
    drift = rdtype(0)
    for obs in observers:
        obs(state)

    growing = isinstance(state.policy, Growing)
    for step in range(config.steps):
        if growing:
            state = grow_frontier(state)
        t = t0 + step * h
        if track_norm_drift:
            c, change = rk4_step_with_norm_change(system.derivative, state.coeffs, t, h)
            drift += change
        else:
            c = rk4_step(system.derivative, state.coeffs, t, h)
        state = replace(state, t=t0 + (step + 1) * h, coeffs=c,
                        norm_drift=float(drift) if track_norm_drift else state.norm_drift)
        norm2 = _squared_norm(c)
        if not math.isfinite(norm2):
            return IntegrationResult(state, "non-finite", step + 1,
                                     f"non-finite coefficients at t={float(state.t):.6g}")
        for obs in observers:
            obs(state)
        if norm2 > abort_ceiling:
            return IntegrationResult(state, "aborted", step + 1,
                                     f"norm {norm2:.3e} passed ceiling {abort_ceiling:g} "
                                     f"at t={float(state.t):.6g}")
    return IntegrationResult(state, "completed", config.steps)
