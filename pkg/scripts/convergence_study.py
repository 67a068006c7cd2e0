"""Step-size dependence of the forward integrator and of both VL field-update modes.

For the Figure 3 instance, prints the auxiliary/reference sigma_z deviation
for the held-per-step and per-stage field updates over a ladder of step
counts, together with the RK4 final-state error against a fine reference.
"""
import argparse
import time

import numpy as np

from qubit_tddft.model import build_initial_state, load_experiment
from qubit_tddft.propagator import propagate_state
from qubit_tddft.vlmap import vl_from_spec


def parse_args():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--steps", type=int, nargs="+", default=[1250, 2500, 5000, 10000, 20000])
    p.add_argument("--skip-stage", action="store_true")
    return p.parse_args()


def main():
    args = parse_args()
    spec = load_experiment("paper_fig3_xy")
    psi0 = build_initial_state(spec)
    fine = propagate_state(spec.model, spec.schedule, psi0, spec.t_end, 8 * max(args.steps)).meta["final_state"]

    print(f"{'steps':>7} {'dt':>9} {'rk4 err':>10} {'vl step':>10} {'ratio':>6} {'vl stage':>10} {'time':>6}")
    prev = None
    for n in args.steps:
        grid = spec.with_grid(n_steps=n)
        start = time.perf_counter()
        rk4 = np.abs(propagate_state(grid.model, grid.schedule, psi0, grid.t_end, n).meta["final_state"] - fine).max()
        step = vl_from_spec(grid, "step").max_sigma_deviation
        stage = float("nan") if args.skip_stage else vl_from_spec(grid, "stage").max_sigma_deviation
        ratio = prev / step if prev else float("nan")
        prev = step
        elapsed = time.perf_counter() - start
        print(f"{n:7d} {grid.dt:9.2e} {rk4:10.2e} {step:10.3e} {ratio:6.2f} {stage:10.2e} {elapsed:6.2f}")


if __name__ == "__main__":
    main()
