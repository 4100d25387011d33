"""Norm and average-energy observables, breakdown detection, recording, and the
post-ramp stationarity probe."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

from .coupled_system import CoefficientState, to_complex_amplitudes
from .hamiltonian import RampSchedule, Variant, post_ramp_model
from .oscillator_basis import GridSpec, OscillatorModel, default_grid, overlap_matrix
from .oracles import GaussianState, GridWavefunction, project_onto_basis

CSV_COLUMNS = ("t", "norm", "energy", "basis_size", "max_index", "frontier_mag")


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    norm: float
    energy: float
    basis_size: int
    max_index: int
    frontier_mag: float

    def row(self) -> tuple:
        return (self.t, self.norm, self.energy, self.basis_size, self.max_index, self.frontier_mag)


def _total(values) -> float:
    """Pairwise sum of non-negative terms; inf once it leaves double range."""
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.sum(np.asarray(values, dtype=float)))


def _populations(coeffs) -> np.ndarray:
    c = np.asarray(coeffs)
    with np.errstate(over="ignore"):
        return (c.real**2 + c.imag**2).astype(float)


def norm(state: CoefficientState) -> float:
    """sum |C_n|^2."""
    return _total(_populations(state.coeffs))


def average_energy(state: CoefficientState, model: OscillatorModel) -> float:
    """sum E_n |C_n|^2 over the active set."""
    return populations_energy(state.indices, _populations(state.coeffs), model)


def populations_energy(indices, populations, model: OscillatorModel) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        return _total(model.eigenenergy(np.asarray(indices, dtype=float)) * populations)


def record(state: CoefficientState, model: OscillatorModel) -> DiagnosticsRecord:
    p = _populations(state.coeffs)
    nonzero = np.flatnonzero(p)
    return DiagnosticsRecord(
        t=float(state.t),
        norm=_total(p),
        energy=populations_energy(state.indices, p, model),
        basis_size=state.size,
        max_index=int(state.indices[nonzero[-1]]) if nonzero.size else 0,
        frontier_mag=float(abs(state.coeffs[-1])),
    )


@dataclass(frozen=True, eq=False)
class Snapshot:
    """Schroedinger-picture amplitudes on the H0 eigenbasis at time t.

    ``norm`` is taken over the whole state, before any truncation.
    """

    t: float
    indices: np.ndarray
    amplitudes: np.ndarray
    norm: float | None = None

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def snapshot(state: CoefficientState, model: OscillatorModel, n_max: int | None = None,
             total: float | None = None) -> Snapshot:
    """Amplitudes up to ``n_max``; ``total`` is the full-state norm when the
    caller already has it."""
    total = norm(state) if total is None else total
    if n_max is not None:
        count = min(state.size, n_max // state.stride + 1) if n_max >= 0 else 0
        state = replace(state, coeffs=state.coeffs[:count])
    n, amps = to_complex_amplitudes(state, model)
    return Snapshot(float(state.t), n, amps, total)


@dataclass
class Recorder:
    """Observer that keeps a DiagnosticsRecord every ``every`` calls and,
    optionally, amplitude snapshots truncated at ``snapshot_n_max``."""

    model: OscillatorModel
    every: int = 1
    snapshot_every: int = 0
    snapshot_n_max: int = 200
    records: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    _calls: int = 0

    def __call__(self, state: CoefficientState):
        i = self._calls
        self._calls += 1
        total = None
        if i % self.every == 0:
            self.records.append(record(state, self.model))
            total = self.records[-1].norm
        if self.snapshot_every and i % self.snapshot_every == 0:
            self.snapshots.append(snapshot(state, self.model, self.snapshot_n_max, total))


@dataclass(frozen=True)
class BreakdownReport:
    threshold: float
    period: float
    time: float | None  # None means the threshold was never crossed

    @property
    def broke_down(self) -> bool:
        return self.time is not None

    @property
    def within_one_period(self) -> bool:
        return self.time is not None and self.time < self.period

    def describe(self) -> str:
        if self.time is None:
            return f"no breakdown at threshold {self.threshold:g}"
        return (f"breakdown at t={self.time:.6g} (threshold {self.threshold:g}, "
                f"period {self.period:.4g}, within one period: {self.within_one_period})")


def detect_breakdown(series: Sequence[DiagnosticsRecord], threshold: float = 0.1,
                     model: OscillatorModel | None = None) -> BreakdownReport:
    """First record with |norm - 1| > threshold."""
    if not series:
        raise ValueError("empty diagnostics series")
    period = 2 * math.pi / (model or OscillatorModel()).omega
    for rec in series:
        if not abs(rec.norm - 1.0) <= threshold:
            return BreakdownReport(threshold, period, rec.t)
    return BreakdownReport(threshold, period, None)


@dataclass(frozen=True, eq=False)
class StationarityReport:
    times: np.ndarray
    indices: np.ndarray  # post-ramp eigenbasis indices
    populations: np.ndarray  # shape (len(times), len(indices))
    norms: np.ndarray  # total norm of each sample

    @property
    def leakage(self) -> np.ndarray:
        """Norm not accounted for by the probed post-ramp modes, per sample."""
        return self.norms - self.populations.sum(axis=1)

    @property
    def drift_per_index(self) -> np.ndarray:
        return self.populations.max(axis=0) - self.populations.min(axis=0)

    @property
    def max_drift(self) -> float:
        return float(self.drift_per_index.max())


Sample = Union[Snapshot, GridWavefunction, GaussianState]


def _trim(sample: Snapshot, floor: float):
    mags = np.abs(sample.amplitudes)
    keep = np.flatnonzero(mags > floor * mags.max())
    last = keep[-1] + 1 if keep.size else 1
    return sample.indices[:last], sample.amplitudes[:last]


def stationarity_probe(samples: Sequence[Sample], schedule: RampSchedule, model: OscillatorModel,
                       n_post: int = 60, grid: GridSpec | None = None,
                       amplitude_floor: float = 1e-14) -> StationarityReport:
    """Populations |D_m|^2 in the eigenbasis of the post-ramp Hamiltonian at
    each sample time, and their drift across the samples. The report also
    carries each sample's total norm, so norm that escaped the probed modes
    shows up as ``leakage``.

    Snapshots are rotated with an overlap matrix; trailing amplitudes below
    ``amplitude_floor`` times the largest one are dropped first. Grid and
    Gaussian oracle states are projected directly.
    """
    if schedule.variant is not Variant.RAMP_UP:
        raise ValueError("stationarity probe needs a RAMP_UP schedule")
    post = post_ramp_model(schedule, model)
    times, rows, norms = [], [], []
    overlaps: dict = {}
    for sample in samples:
        t = float(sample.t)
        if t < schedule.T - 1e-12:
            raise ValueError(f"sample at t={t} precedes the end of the ramp T={schedule.T}")
        if isinstance(sample, Snapshot):
            n, amps = _trim(sample, amplitude_floor)
            key = (int(n[-1]), int(n[1] - n[0]) if n.size > 1 else 1)
            if key not in overlaps:
                g = grid or default_grid(max(n_post, int(n[-1])), model, post)
                overlaps[key] = overlap_matrix(post, np.arange(n_post + 1), model, n, g)
            d = overlaps[key] @ amps
            total = sample.norm if sample.norm is not None else float(np.sum(np.abs(sample.amplitudes) ** 2))
        else:
            projection = project_onto_basis(sample, post, n_post, grid=grid)
            d, total = projection.amplitudes, projection.norm
        times.append(t)
        rows.append(np.abs(d) ** 2)
        norms.append(total)
    return StationarityReport(np.array(times), np.arange(n_post + 1), np.array(rows).reshape(-1, n_post + 1),
                              np.array(norms))
