"""Shared trajectories and the acceptance summary printed at the end of a run."""
from dataclasses import dataclass

import pytest

from tdse_expansion.coupled_system import Fixed, Growing, initial_state
from tdse_expansion.diagnostics import Recorder
from tdse_expansion.hamiltonian import RampSchedule
from tdse_expansion.oscillator_basis import OscillatorModel
from tdse_expansion.rk4 import IntegrationResult, StepperConfig, integrate

STANDARD = RampSchedule()
UNIT = OscillatorModel()

ACCEPTANCE_LINES: list[str] = []


@dataclass
class Run:
    result: IntegrationResult
    recorder: Recorder


def _standard_run(policy, end_time=3.0, snapshot_every=0, abort_ceiling=1e6) -> Run:
    recorder = Recorder(UNIT, every=1, snapshot_every=snapshot_every, snapshot_n_max=200)
    result = integrate(initial_state(policy), StepperConfig.to_time(0.001, end_time), STANDARD, UNIT,
                       observers=[recorder], abort_ceiling=abort_ceiling)
    return Run(result, recorder)


@pytest.fixture(scope="session")
def growing_run() -> Run:
    """GROWING policy, unit parameters, standard ramp, every step recorded up to the abort."""
    return _standard_run(Growing(), end_time=3.2, snapshot_every=100)


@pytest.fixture(scope="session")
def fixed_run() -> Run:
    """FIXED(512), unit parameters, standard ramp, t in [0, 3], snapshots every 0.1."""
    return _standard_run(Fixed(512), end_time=3.0, snapshot_every=100)


@pytest.fixture
def acceptance(request):
    """Call with (passed, detail); records one summary line per criterion."""
    def report(passed: bool, detail: str):
        line = f"[{'PASS' if passed else 'FAIL'}] {request.node.name}: {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return passed
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
