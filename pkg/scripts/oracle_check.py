"""Cross-check the truncated expansion against both reference solvers and
write the JSON comparison reports.

    python3 scripts/oracle_check.py [--out-dir results]
"""
import argparse
import json
from pathlib import Path

from tdse_expansion.config import resolve
from tdse_expansion.experiment import atomic_write, compare_solvers


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--record-interval", type=float, default=0.01)
    args = parser.parse_args()
    out = Path(args.out_dir)

    base = resolve("oracle-check").replace(record_interval=args.record_interval)
    pairs = {
        "fixed_vs_grid": (base, base.replace(solver="grid")),
        "fixed_vs_gaussian": (base.replace(end_time=3.0), base.replace(solver="gaussian", end_time=3.0)),
        "growing_vs_fixed": (resolve("fig1").replace(compare_n_max=100),
                             resolve("fig1").replace(solver="fixed", compare_n_max=100)),
    }
    for name, (a, b) in pairs.items():
        report = compare_solvers(a, b)
        path = atomic_write(out / f"{name}.json", json.dumps(report, indent=2) + "\n")
        pops, norms = report.get("populations", {}), report["norm"]
        print(f"{name}: t in [{report['t_first']}, {report['t_last']}], "
              f"max population diff {pops.get('max_abs_diff', float('nan')):.2e}, "
              f"max norm diff {norms['max_abs_diff']:.2e}, "
              f"first norm disagreement t={norms['first_disagreement_t']} -> {path}")


if __name__ == "__main__":
    main()
