"""Coupled equations for the expansion coefficients C_n(t).

    i hbar dC_n/dt = sum_l C_l V_nl(t) exp(i w_nl t),   w_nl = (E_n - E_l)/hbar

For the quadratic variation only l = n, n +- 2 contribute, with
w_{n,n+2} = -2w. Coefficients are kept in the interaction picture (the
e^{-iE_n t/hbar} phase is stripped); :func:`to_complex_amplitudes` puts it back.

Storage is one complex slot per stored index. With ``stride=2`` (default) only
even indices 0, 2, 4, ... are stored, which is all a ground-state start can
ever reach.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from .errors import NumericalFailure
from .hamiltonian import RampSchedule, scalar_factor
from .oscillator_basis import OscillatorModel, x2_half_band

# One RK4 step evaluates the field four times, each application of the
# tridiagonal coupling reaches one stored slot further.
RK4_REACH = 4


@dataclass(frozen=True)
class Growing:
    """Active set grows with the integrator's reach, so no truncation ever
    acts on the dynamics (up to ``reach`` new slots per step)."""

    reach: int = RK4_REACH


@dataclass(frozen=True)
class Fixed:
    """Static truncation to ``size`` stored slots."""

    size: int = 512

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("FIXED size must be at least 1")


Policy = Union[Growing, Fixed]


@dataclass(frozen=True, eq=False)
class CoefficientState:
    t: float
    coeffs: np.ndarray
    policy: Policy
    stride: int = 2
    # cumulative norm change of the integrator map, when tracked
    norm_drift: float | None = None

    @property
    def size(self) -> int:
        return self.coeffs.size

    @property
    def indices(self) -> np.ndarray:
        return self.stride * np.arange(self.size)

    @property
    def real(self) -> np.ndarray:
        return self.coeffs.real

    @property
    def imag(self) -> np.ndarray:
        return self.coeffs.imag

    @property
    def variable_count(self) -> int:
        """Real plus imaginary components in the active set."""
        return 2 * self.size

    def nonzero_variable_count(self) -> int:
        return int(np.count_nonzero(self.coeffs.real) + np.count_nonzero(self.coeffs.imag))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.coeffs)))


@dataclass(frozen=True, eq=False)
class RhsEvaluation:
    t: float
    derivative: np.ndarray

    @property
    def real(self):
        return self.derivative.real

    @property
    def imag(self):
        return self.derivative.imag


def initial_state(policy: Policy = Growing(), stride: int = 2, dtype=np.complex128) -> CoefficientState:
    """Ground state: C_0 = 1, every other coefficient zero."""
    if stride not in (1, 2):
        raise ValueError("stride must be 1 (all indices) or 2 (even only)")
    size = policy.size if isinstance(policy, Fixed) else 1
    coeffs = np.zeros(size, dtype=dtype)
    coeffs[0] = 1
    return CoefficientState(t=0.0, coeffs=coeffs, policy=policy, stride=stride)


class CoupledSystem:
    """Precomputed band of V(t)/hbar for one (schedule, model, stride).

    ``derivative(c, t)`` is the raw linear field used inside the stepper; it
    does no validation. Band arrays grow on demand.
    """

    def __init__(self, schedule: RampSchedule, model: OscillatorModel, stride: int = 2,
                 dtype=np.complex128, capacity: int = 64):
        self.schedule = schedule
        self.model = model
        self.stride = stride
        self.shift = 2 // stride  # slots between index n and n + 2
        self.cdtype = np.dtype(dtype)
        self.rdtype = np.longdouble if self.cdtype == np.clongdouble else np.float64
        self._two_omega = self.rdtype(2) * self.rdtype(model.omega)
        self._capacity = 0
        self._ensure(capacity)

    def _ensure(self, size: int):
        if size <= self._capacity:
            return
        cap = max(size, 2 * self._capacity)
        rd = self.rdtype
        n = self.stride * np.arange(cap)
        diag, sup = x2_half_band(self.model, n, dtype=rd)
        factor = rd(self.model.k) / rd(self.model.hbar)
        self._diag = factor * diag
        self._sup = factor * sup
        self._capacity = cap

    def derivative(self, c: np.ndarray, t) -> np.ndarray:
        s = scalar_factor(self.schedule, t)
        if s == 0:
            return np.zeros_like(c)
        size = c.size
        self._ensure(size)
        q = self.shift
        wt = self._two_omega * t
        down = np.cos(wt) - 1j * np.sin(wt)  # exp(-2i w t), multiplies C_{n+2}
        out = self._diag[:size] * c
        if size > q:
            band = self._sup[: size - q]
            out[:-q] += band * down * c[q:]
            out[q:] += band * np.conj(down) * c[:-q]
        return (-1j * s) * out


def rhs(state: CoefficientState, schedule: RampSchedule, model: OscillatorModel,
        t: float | None = None) -> RhsEvaluation:
    """dC/dt on the state's active set (out-of-range neighbors count as zero)."""
    if not state.is_finite():
        raise NumericalFailure(f"non-finite coefficients at t={state.t}")
    t = state.t if t is None else t
    system = CoupledSystem(schedule, model, stride=state.stride, dtype=state.coeffs.dtype,
                           capacity=state.size)
    return RhsEvaluation(t=t, derivative=system.derivative(state.coeffs, t))


def grow_frontier(state: CoefficientState, slots: int | None = None) -> CoefficientState:
    """Append zero slots at the top of the active set (GROWING policy only)."""
    if not isinstance(state.policy, Growing):
        raise TypeError("grow_frontier requires the GROWING policy")
    slots = state.policy.reach if slots is None else slots
    # full-index storage needs twice the slots for the same reach in n
    slots *= 2 // state.stride
    coeffs = np.concatenate([state.coeffs, np.zeros(slots, dtype=state.coeffs.dtype)])
    return replace(state, coeffs=coeffs)


def to_complex_amplitudes(state: CoefficientState, model: OscillatorModel):
    """Schroedinger-picture amplitudes C_n(t) exp(-i E_n t / hbar).

    Returns ``(indices, amplitudes)`` as arrays.
    """
    n = state.indices
    phase = model.omega * (n + 0.5) * float(state.t)
    amps = state.coeffs.astype(np.complex128) * np.exp(-1j * phase)
    return n, amps
