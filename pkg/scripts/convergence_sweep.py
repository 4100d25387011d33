"""Truncation sweep: FIXED(N) runs on the standard ramp for several N,
compared with the Gaussian oracle at t = 3. FIXED(N) keeps N even-index
slots, so its largest index is 2N - 2.

    python3 scripts/convergence_sweep.py [--sizes 4 8 16 32 64 256 512]
"""
import argparse

import numpy as np

from tdse_expansion.coupled_system import Fixed, initial_state
from tdse_expansion.diagnostics import norm, snapshot
from tdse_expansion.hamiltonian import RampSchedule
from tdse_expansion.oracles import gaussian_evolve, project_onto_basis
from tdse_expansion.oscillator_basis import OscillatorModel
from tdse_expansion.rk4 import StepperConfig, integrate


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[4, 8, 16, 32, 64, 256, 512])
    parser.add_argument("--end-time", type=float, default=3.0)
    parser.add_argument("--h", type=float, default=0.001)
    parser.add_argument("--compare-n-max", type=int, default=100)
    args = parser.parse_args()

    schedule, model = RampSchedule(), OscillatorModel()
    exact = project_onto_basis(gaussian_evolve(schedule, model, args.end_time), model,
                               args.compare_n_max).populations[::2]
    print(f"{'N':>6} {'max n':>6} {'|norm-1|':>10} {'pop above n=400':>16} {'max |dP| vs oracle':>19}")
    for size in sorted(args.sizes):
        result = integrate(initial_state(Fixed(size)), StepperConfig.to_time(args.h, args.end_time),
                           schedule, model)
        snap = snapshot(result.state, model)
        pops = snap.populations
        tail = float(pops[snap.indices > 400].sum())
        low = pops[: exact.size]
        diff = float(np.abs(low - exact[: low.size]).max())
        print(f"{size:>6} {snap.indices[-1]:>6} {abs(norm(result.state) - 1):>10.2e} {tail:>16.2e} {diff:>19.2e}")


if __name__ == "__main__":
    main()
