"""Time profile of the quadratic Hamiltonian variation.

H(t) = p^2/2m + S(t) k x^2/2, so V(t) = H(t) - H0 = s(t) * k * x^2/2 with the
scalar factor s(t) = S(t) - 1 returned by :func:`scalar_factor`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .oscillator_basis import OscillatorModel, x2_half_matrix_element


class Variant(str, enum.Enum):
    RAMP_UP = "ramp-up"
    RAMP_DOWN = "ramp-down"


@dataclass(frozen=True)
class RampSchedule:
    """Linear ramp of rate ``eta`` switched on at t = 0.

    RAMP_UP holds the value reached at ``T`` for all t >= T. RAMP_DOWN keeps
    decreasing without a plateau unless ``plateau`` is set.
    """

    eta: float = 1.0
    T: float = 1.0
    variant: Variant = Variant.RAMP_UP
    plateau: bool = False

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if not self.T > 0:
            raise ValueError("ramp end T must be positive")
        if not math.isfinite(self.eta):
            raise ValueError("ramp rate must be finite")

    def S(self, t: float) -> float:
        return 1.0 + scalar_factor(self, t)


def scalar_factor(schedule: RampSchedule, t: float) -> float:
    if t <= 0.0:
        return 0.0
    if schedule.variant is Variant.RAMP_UP:
        # the tie at t == T goes to the plateau branch
        return schedule.eta * (t if t < schedule.T else schedule.T)
    if schedule.plateau and t >= schedule.T:
        return -schedule.eta * schedule.T
    return -schedule.eta * t


@dataclass(frozen=True)
class CouplingRow:
    n: int
    diag: float
    sup: float
    sub: float
    omega_sup: float
    omega_sub: float
    omega_diag: float = 0.0


def coupling_row(schedule: RampSchedule, model: OscillatorModel, n: int, t: float) -> CouplingRow:
    """Row n of V(t) in the H0 eigenbasis with its transition frequencies.

    ``sup`` couples to n + 2, ``sub`` to n - 2 (zero for n < 2).
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    s = scalar_factor(schedule, t) * model.k
    sub = s * x2_half_matrix_element(model, n, n - 2) if n >= 2 else 0.0
    two_omega = 2.0 * model.omega
    return CouplingRow(
        n=n,
        diag=s * x2_half_matrix_element(model, n, n),
        sup=s * x2_half_matrix_element(model, n, n + 2),
        sub=sub,
        omega_sup=-two_omega,
        omega_sub=two_omega,
    )


def post_ramp_model(schedule: RampSchedule, model: OscillatorModel) -> OscillatorModel:
    """Oscillator whose eigenbasis diagonalizes H(t) for t >= T."""
    if schedule.variant is not Variant.RAMP_UP:
        raise ValueError("only RAMP_UP has a final Hamiltonian")
    return model.with_spring(model.k * (1.0 + schedule.eta * schedule.T))
