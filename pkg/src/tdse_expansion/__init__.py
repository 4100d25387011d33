"""Expansion of a driven harmonic oscillator in its unperturbed eigenbasis,
with independent grid and Gaussian reference solutions."""

__version__ = "0.1.0"

from .config import ExperimentConfig, Solver  # noqa: E402
from .coupled_system import (CoefficientState, Fixed, Growing, grow_frontier,  # noqa: E402
                             initial_state, rhs, to_complex_amplitudes)
from .diagnostics import (Recorder, average_energy, detect_breakdown, norm,  # noqa: E402
                          stationarity_probe)
from .hamiltonian import RampSchedule, Variant, coupling_row, post_ramp_model, scalar_factor  # noqa: E402
from .oscillator_basis import (OscillatorModel, eigenfunction_eval, hermite_eval,  # noqa: E402
                               normalization_constant, overlap_quadrature, x2_half_matrix_element)
from .rk4 import StepperConfig, integrate, rk4_step  # noqa: E402

__all__ = [
    "ExperimentConfig", "Solver", "CoefficientState", "Fixed", "Growing", "grow_frontier",
    "initial_state", "rhs", "to_complex_amplitudes", "Recorder", "average_energy",
    "detect_breakdown", "norm", "stationarity_probe", "RampSchedule", "Variant", "coupling_row",
    "post_ramp_model", "scalar_factor", "OscillatorModel", "eigenfunction_eval", "hermite_eval",
    "normalization_constant", "overlap_quadrature", "x2_half_matrix_element", "StepperConfig",
    "integrate", "rk4_step",
]
