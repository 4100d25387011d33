"""Regenerate the norm and energy data of the GROWING-basis run and print
the threshold crossings the acceptance suite checks.

    python3 scripts/reproduce_figures.py [--out-dir results]
"""
import argparse
from pathlib import Path

import numpy as np

from tdse_expansion.config import resolve
from tdse_expansion.diagnostics import detect_breakdown
from tdse_expansion.experiment import simulate, write_run


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="results")
    args = parser.parse_args()
    out = Path(args.out_dir)

    config = resolve("fig1").replace(output=str(out / "growing_run.csv"))
    traj = simulate(config)
    csv_path, manifest = write_run(traj)
    t, norm, energy = traj.times, traj.column("norm"), traj.column("energy")

    report = detect_breakdown(traj.records, 0.1, config.model)
    print(f"wrote {csv_path} and {manifest} ({len(t)} rows, {traj.wall_time:.2f}s, {traj.status})")
    print(report.describe())
    above = np.flatnonzero(norm > 100)
    if above.size:
        print(f"norm first exceeds 100 at t={t[above[0]]:.4f}")
    d = np.diff(energy)
    peaks = [i for i in np.flatnonzero((d[:-1] > 0) & (d[1:] <= 0)) + 1 if t[i] > config.T]
    if peaks:
        print(f"energy: starts at {energy[0]}, first post-ramp maximum {energy[peaks[0]]:.5f} "
              f"at t={t[peaks[0]]:.3f}, ends at {energy[-1]:.4g}")


if __name__ == "__main__":
    main()
