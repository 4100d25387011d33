"""Run a configured solver into a common trajectory record, write CSV and
manifest files, compare two runs, and emit series growth tables."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .config import ExperimentConfig, Solver
from .coupled_system import initial_state
from .diagnostics import (CSV_COLUMNS, DiagnosticsRecord, Recorder, detect_breakdown,
                          populations_energy, record, snapshot)
from .errors import DomainOverflowError
from .oracles import (gaussian_trajectory, grid_eigenstate, grid_energy, grid_propagate,
                      project_onto_basis)
from .rk4 import StepperConfig, integrate
from .series import SeriesSpec, normalization_tail, partial_sums, sup_growth_profile, tail_bounds

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_BREAKDOWN_ABORT = 4


@dataclass(eq=False)
class Trajectory:
    """Diagnostics rows plus populations |C_n|^2 for n = 0..n_max at the same times.

    The CSV ``energy`` column is sum E_n |C_n|^2 for expansion runs and the
    expectation value of H(t) for the oracles. ``h0_energies`` is
    sum E_n |C_n|^2 for every solver and is what comparisons use.
    """

    config: ExperimentConfig
    records: list[DiagnosticsRecord] = field(default_factory=list)
    populations: list[np.ndarray] = field(default_factory=list)
    h0_energies: list[float] = field(default_factory=list)
    status: str = "completed"  # "completed" | "aborted" | "non-finite"
    message: str = ""
    wall_time: float = 0.0

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    @property
    def exit_code(self) -> int:
        return {"completed": EXIT_OK, "aborted": EXIT_BREAKDOWN_ABORT}.get(self.status, EXIT_NUMERICAL)

    def column(self, name: str) -> np.ndarray:
        if name == "h0_energy":
            return np.array(self.h0_energies)
        return np.array([getattr(r, name) for r in self.records])


def _full_populations(indices: np.ndarray, pops: np.ndarray, n_max: int) -> np.ndarray:
    out = np.zeros(n_max + 1)
    keep = indices <= n_max
    out[indices[keep]] = pops[keep]
    return out


def _projected_record(t: float, energy: float, pops: np.ndarray) -> DiagnosticsRecord:
    nonzero = np.flatnonzero(pops > 0)
    return DiagnosticsRecord(t=t, norm=math.fsum(pops), energy=energy, basis_size=pops.size,
                             max_index=int(nonzero[-1]) if nonzero.size else 0,
                             frontier_mag=float(math.sqrt(pops[-1])))


def _run_expansion(config: ExperimentConfig, n_max: int, traj: Trajectory):
    model = config.model
    recorder = Recorder(model, every=config.record_every, snapshot_every=config.record_every,
                        snapshot_n_max=n_max)
    result = integrate(initial_state(config.policy), StepperConfig(config.h, config.steps),
                       config.schedule, model, observers=[recorder],
                       abort_ceiling=config.abort_ceiling, precision=config.precision)
    traj.status, traj.message = result.status, result.message
    traj.records = recorder.records
    traj.populations = [_full_populations(s.indices, s.populations, n_max) for s in recorder.snapshots]
    # an early halt is recorded even when it falls between cadence points
    if not result.completed and traj.records[-1].t != float(result.state.t):
        traj.records.append(record(result.state, model))
        snap = snapshot(result.state, model, n_max)
        traj.populations.append(_full_populations(snap.indices, snap.populations, n_max))
    traj.h0_energies = [r.energy for r in traj.records]


def _run_grid(config: ExperimentConfig, n_max: int, traj: Trajectory):
    model, schedule = config.model, config.schedule
    every = ExperimentConfig.steps_between(config.record_interval, config.grid_dt)

    def observe(state):
        pops = project_onto_basis(state, model, max(n_max, config.project_n_max)).populations
        traj.h0_energies.append(populations_energy(np.arange(pops.size), pops, model))
        traj.records.append(_projected_record(state.t, grid_energy(state, schedule, model),
                                              pops[: config.project_n_max + 1]))
        traj.populations.append(pops[: n_max + 1])

    grid_propagate(grid_eigenstate(model, 0, config.grid), schedule, model, dt=config.grid_dt,
                   t_end=config.end_time, observer=observe, observe_every=every)


def _run_gaussian(config: ExperimentConfig, n_max: int, traj: Trajectory):
    model, schedule = config.model, config.schedule
    count = round(config.end_time / config.record_interval)
    times = [i * config.record_interval for i in range(count + 1)]
    top = max(n_max, config.project_n_max)
    for state in gaussian_trajectory(schedule, model, times):
        pops = project_onto_basis(state, model, top).populations
        traj.h0_energies.append(populations_energy(np.arange(pops.size), pops, model))
        traj.records.append(_projected_record(state.t, state.energy(schedule),
                                              pops[: config.project_n_max + 1]))
        traj.populations.append(pops[: n_max + 1])


def simulate(config: ExperimentConfig, n_max: int | None = None) -> Trajectory:
    """Run the configured solver; populations are kept up to ``n_max``
    (``config.compare_n_max`` by default)."""
    n_max = config.compare_n_max if n_max is None else n_max
    start = time.perf_counter()
    runner = {Solver.GROWING: _run_expansion, Solver.FIXED: _run_expansion,
              Solver.GRID: _run_grid, Solver.GAUSSIAN: _run_gaussian}[config.solver]
    traj = Trajectory(config)
    try:
        runner(config, n_max, traj)
    except (ArithmeticError, DomainOverflowError) as exc:
        # rows recorded before the failure are kept
        traj.status, traj.message = "non-finite", f"{type(exc).__name__}: {exc}"
    traj.wall_time = time.perf_counter() - start
    return traj


# --- output -----------------------------------------------------------------

def csv_text(records: Sequence[DiagnosticsRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([f"{r.t:.15g}", f"{r.norm:.15g}", f"{r.energy:.15g}", r.basis_size,
                         r.max_index, f"{r.frontier_mag:.15g}"])
    return buf.getvalue()


def atomic_write(path: str | Path, text: str) -> Path:
    """Write to a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def manifest_path(csv_path: str | Path) -> Path:
    return Path(f"{csv_path}.manifest.json")


def write_run(traj: Trajectory, path: str | Path | None = None) -> tuple[Path, Path]:
    """Diagnostics CSV plus a JSON manifest carrying the resolved config,
    library version, status and wall time."""
    path = Path(path or traj.config.output)
    atomic_write(path, csv_text(traj.records))
    breakdown = (detect_breakdown(traj.records, traj.config.threshold, traj.config.model)
                 if traj.records else None)
    manifest = {
        "version": __version__,
        "config": traj.config.as_dict(),
        "columns": list(CSV_COLUMNS),
        "status": traj.status,
        "message": traj.message,
        "records": len(traj.records),
        "breakdown_time": breakdown.time if breakdown else None,
        "wall_time_s": round(traj.wall_time, 6),
    }
    mpath = atomic_write(manifest_path(path), json.dumps(manifest, indent=2) + "\n")
    return path, mpath


def run_experiment(config: ExperimentConfig) -> tuple[Trajectory, int]:
    traj = simulate(config)
    if traj.records:
        write_run(traj)
    return traj, traj.exit_code


# --- comparison ---------------------------------------------------------------

def _first_exceeding(times, diffs, tol) -> float | None:
    hits = np.flatnonzero(~(np.abs(diffs) <= tol))
    return float(times[hits[0]]) if hits.size else None


def _integrated(times, values) -> float:
    values = np.abs(values)
    if times.size < 2:
        return 0.0
    return float(np.sum(0.5 * (values[1:] + values[:-1]) * np.diff(times)))


def compare_trajectories(a: Trajectory, b: Trajectory, tolerance: float = 1e-4) -> dict:
    """Differences at the sample times the two runs share.

    Reports max and time-integrated absolute differences of norm, energy and
    per-mode populations, plus the first time each exceeds ``tolerance``.
    """
    ta = np.round(a.times, 9)
    tb = np.round(b.times, 9)
    common, ia, ib = np.intersect1d(ta, tb, return_indices=True)
    report = {"samples": int(common.size), "tolerance": tolerance,
              "t_first": float(common[0]) if common.size else None,
              "t_last": float(common[-1]) if common.size else None,
              "status": [a.status, b.status]}
    if not common.size:
        return report
    for name in ("norm", "h0_energy"):
        d = a.column(name)[ia] - b.column(name)[ib]
        report[name] = {"max_abs_diff": float(np.max(np.abs(d))),
                        "integrated_abs_diff": _integrated(common, d),
                        "first_disagreement_t": _first_exceeding(common, d, tolerance)}
    if a.populations and b.populations:
        n = min(a.populations[0].size, b.populations[0].size)
        pa = np.array([a.populations[i][:n] for i in ia])
        pb = np.array([b.populations[i][:n] for i in ib])
        d = pa - pb
        per_time = np.nanmax(np.abs(d), axis=1)
        worst = np.unravel_index(np.argmax(np.abs(d)), d.shape)
        report["populations"] = {"n_max": n - 1,
                                 "max_abs_diff": float(per_time.max()),
                                 "worst_mode": int(worst[1]),
                                 "worst_t": float(common[worst[0]]),
                                 "integrated_max_diff": _integrated(common, per_time),
                                 "first_disagreement_t": _first_exceeding(common, per_time, tolerance)}
    return report


def compare_solvers(config_a: ExperimentConfig, config_b: ExperimentConfig,
                    tolerance: float = 1e-4) -> dict:
    if (config_a.schedule, config_a.model) != (config_b.schedule, config_b.model):
        raise ValueError("compared runs must share schedule and model")
    n_max = min(config_a.compare_n_max, config_b.compare_n_max)
    # numpy and the banded solver release the GIL for most of the work
    with ThreadPoolExecutor(max_workers=2) as pool:
        fa = pool.submit(simulate, config_a, n_max)
        fb = pool.submit(simulate, config_b, n_max)
        a, b = fa.result(), fb.result()
    report = compare_trajectories(a, b, tolerance)
    report["solvers"] = [config_a.solver.value, config_b.solver.value]
    report["configs"] = [config_a.as_dict(), config_b.as_dict()]
    return report


# --- series -------------------------------------------------------------------

def series_report(spec: SeriesSpec, N_list: Sequence[int], windows: Sequence[float],
                  out: str | Path, tail_N: Sequence[int] = (100, 1000, 10000),
                  values: bool = False) -> list[Path]:
    """Growth profile CSV (N, window, sup_lower_bound, argmax) at ``out``, the
    normalization-tail table next to it, and optionally the raw (N, x, value)
    triples."""
    out = Path(out)
    rows = sup_growth_profile(spec, N_list, windows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("N", "window", "sup_lower_bound", "argmax"))
    for r in rows:
        w.writerow((r.N, f"{r.window:.15g}", f"{r.sup:.15g}", f"{r.argmax:.15g}"))
    written = [atomic_write(out, buf.getvalue())]

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("N", "tail", "lower_bound", "upper_bound"))
    for N in tail_N:
        lo, hi = tail_bounds(N)
        w.writerow((N, f"{normalization_tail(N):.15g}", f"{lo:.15g}", f"{hi:.15g}"))
    written.append(atomic_write(out.with_name(out.stem + ".tail.csv"), buf.getvalue()))

    if values:
        x = spec.grid(max(windows))
        sums = partial_sums(spec, list(N_list), x)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("N", "x", "value"))
        for N, row in zip(N_list, sums):
            for xi, v in zip(x, row):
                w.writerow((N, f"{xi:.15g}", f"{v:.15g}"))
        written.append(atomic_write(out.with_name(out.stem + ".values.csv"), buf.getvalue()))
    return written
