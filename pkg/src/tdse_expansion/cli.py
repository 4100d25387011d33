"""Command-line entry point.

    tdse-lab simulate --preset fig1
    tdse-lab simulate --variant ramp-down --solver grid --end-time 1.0
    tdse-lab compare --preset oracle-check --solver-b grid
    tdse-lab series --N 4 16 64 256 --window 4 8
    tdse-lab probe-stationarity --solver gaussian
    tdse-lab config > run.ini

Exit status: 0 success, 2 configuration error, 3 numerical failure,
4 run halted on the abort ceiling (its data is still written).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys

import numpy as np

from .config import FIELD_NAMES, PRESETS, ExperimentConfig, Solver, default_ini, resolve
from .errors import ConfigError
from .experiment import (EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, atomic_write, compare_solvers,
                         run_experiment, series_report)
from .hamiltonian import Variant
from .series import SeriesSpec

log = logging.getLogger("tdse_expansion")

# flags that mirror ExperimentConfig fields: (field, type)
_FIELD_FLAGS = {
    "eta": float, "T": float, "variant": str, "m": float, "k": float, "hbar": float,
    "solver": str, "fixed_size": int, "h": float, "end_time": float, "precision": str,
    "abort_ceiling": float, "grid_half_width": float, "grid_points": int, "grid_dt": float,
    "project_n_max": int, "record_interval": float, "compare_n_max": int, "threshold": float,
    "output": str,
}


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--config", metavar="INI", help="sectioned key = value file")
    for name, kind in _FIELD_FLAGS.items():
        flag = "--" + name.replace("_", "-")
        extra = {}
        if name == "variant":
            extra["choices"] = [v.value for v in Variant]
        elif name == "solver":
            extra["choices"] = [s.value for s in Solver]
        elif name == "precision":
            extra["choices"] = ["double", "extended"]
        p.add_argument(flag, dest=name, type=kind, default=None, **extra)
    p.add_argument("--plateau", dest="plateau", action=argparse.BooleanOptionalAction, default=None)


def _config_from(args) -> ExperimentConfig:
    overrides = {name: getattr(args, name) for name in FIELD_NAMES}
    return resolve(args.preset, args.config, overrides)


def _cmd_simulate(args) -> int:
    config = _config_from(args)
    traj, code = run_experiment(config)
    final = traj.records[-1] if traj.records else None
    log.info("%s run: %s (%d records, %.2fs)", config.solver.value, traj.status,
             len(traj.records), traj.wall_time)
    if traj.message:
        log.info("%s", traj.message)
    if final is not None:
        print(f"wrote {config.output}: t_end={final.t:.6g} norm={final.norm:.6g} "
              f"energy={final.energy:.6g} status={traj.status}")
    return code


def _cmd_compare(args) -> int:
    config_a = _config_from(args)
    b_changes = {"solver": args.solver_b}
    if args.fixed_size_b is not None:
        b_changes["fixed_size"] = args.fixed_size_b
    config_b = config_a.replace(**b_changes)
    report = compare_solvers(config_a, config_b, tolerance=args.tolerance)
    text = json.dumps(report, indent=2) + "\n"
    if args.report:
        atomic_write(args.report, text)
        print(f"wrote {args.report}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_series(args) -> int:
    spec = SeriesSpec(alpha=args.alpha, spacing=args.spacing, x_max=max(args.window),
                      include_gaussian=args.include_gaussian)
    paths = series_report(spec, args.N, args.window, args.output, tail_N=args.tail_N,
                          values=args.values)
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def _cmd_probe(args) -> int:
    from .diagnostics import snapshot, stationarity_probe
    from .coupled_system import initial_state
    from .oracles import gaussian_trajectory, grid_eigenstate, grid_propagate
    from .rk4 import StepperConfig, integrate

    if args.solver is None:
        args.solver = Solver.GAUSSIAN.value
    config = _config_from(args)
    schedule, model = config.schedule, config.model
    count = round((config.end_time - schedule.T) / args.sample_interval)
    times = [schedule.T + i * args.sample_interval for i in range(count + 1)]
    if config.solver is Solver.GAUSSIAN:
        samples = gaussian_trajectory(schedule, model, times)
    elif config.solver is Solver.GRID:
        samples = []
        wanted = {round(t, 9) for t in times}
        grid_propagate(grid_eigenstate(model, 0, config.grid), schedule, model, dt=config.grid_dt,
                       t_end=config.end_time,
                       observer=lambda s: samples.append(s) if round(s.t, 9) in wanted else None,
                       observe_every=1)
    else:
        samples = []
        every = ExperimentConfig.steps_between(args.sample_interval, config.h)
        if every is None:
            raise ConfigError("sample interval must be a whole number of steps h")

        def keep(state):
            step = round(state.t / config.h)
            if step % every == 0 and state.t >= schedule.T - 1e-12:
                samples.append(snapshot(state, model))

        result = integrate(initial_state(config.policy), StepperConfig(config.h, config.steps),
                           schedule, model, observers=[keep], abort_ceiling=config.abort_ceiling)
        if not result.completed:
            log.error("%s", result.message)
            return EXIT_NUMERICAL
    report = stationarity_probe(samples, schedule, model, n_post=args.n_post)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "leakage"] + [f"p{n}" for n in report.indices])
    for t, leak, row in zip(report.times, report.leakage, report.populations):
        w.writerow([f"{t:.15g}", f"{leak:.15g}"] + [f"{p:.15g}" for p in row])
    atomic_write(config.output, buf.getvalue())
    worst = int(np.argmax(report.drift_per_index))
    print(f"wrote {config.output}: max population drift {report.max_drift:.3e} "
          f"(mode {worst}) over t in [{report.times[0]:.4g}, {report.times[-1]:.4g}], "
          f"final leakage {report.leakage[-1]:.3e}")
    return EXIT_OK


def _cmd_config(args) -> int:
    sys.stdout.write(default_ini())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tdse-lab", description=__doc__.splitlines()[0] or None,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one solver and write the diagnostics CSV")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("compare", help="run two solvers and report their differences")
    _add_config_flags(p)
    p.add_argument("--solver-b", required=True, choices=[s.value for s in Solver])
    p.add_argument("--fixed-size-b", type=int)
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.add_argument("--report", help="JSON report path (stdout if omitted)")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("series", help="growth profile of the differentiated series")
    p.add_argument("--N", type=int, nargs="+", default=[4, 16, 64, 256])
    p.add_argument("--window", type=float, nargs="+", default=[4.0, 8.0])
    p.add_argument("--tail-N", type=int, nargs="+", default=[100, 1000, 10000])
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--spacing", type=float, default=0.01)
    p.add_argument("--include-gaussian", action="store_true")
    p.add_argument("--values", action="store_true", help="also write (N, x, value) triples")
    p.add_argument("--output", default="series_growth.csv")
    p.set_defaults(func=_cmd_series)

    p = sub.add_parser("probe-stationarity",
                       help="post-ramp populations over time (Gaussian oracle unless --solver)")
    _add_config_flags(p)
    p.add_argument("--sample-interval", type=float, default=0.1)
    p.add_argument("--n-post", type=int, default=60)
    p.set_defaults(func=_cmd_probe)

    p = sub.add_parser("config", help="print the full config schema with defaults")
    p.set_defaults(func=_cmd_config)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        code = args.func(args)
        return EXIT_OK if code is None else int(code)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
