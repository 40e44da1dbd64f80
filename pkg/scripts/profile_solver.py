#!/usr/bin/env python3
"""Time the inner convex solves across planner iterations on one scenario."""
import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from secuav.convex_backend import solve
from secuav.harness import derive_scenario, load_scenario
from secuav.planner import best_effort_trajectory, equal_power
from secuav.power_alloc import optimize_power
from secuav.trajectory_sca import assemble, initialize_slacks, solve_step


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenario", default=str(
        Path(__file__).resolve().parent.parent / "scenarios" / "paper_fig2.json"))
    parser.add_argument("--duration", type=float, default=80.0)
    parser.add_argument("--steps", type=int, default=8)
    args = parser.parse_args()

    scen = derive_scenario(load_scenario(args.scenario), "T", args.duration)
    traj = best_effort_trajectory(scen)
    powers = equal_power(scen)
    u, _, _ = initialize_slacks(traj, scen)
    print(f"N = {scen.n_slots} slots, K = {scen.n_eves} eavesdroppers")
    for m in range(1, args.steps + 1):
        prog = assemble(traj, u, powers, scen)
        t0 = time.perf_counter()
        res = solve(prog)
        dt_solve = time.perf_counter() - t0
        print(f"iter {m}: {res.status:9s} {res.newton_iters:4d} newton steps "
              f"{1e3 * dt_solve:7.1f} ms  gap {res.duality_gap:.2e} "
              f"objective {res.objective:+.6f}")
        sol = solve_step(traj, u, powers, scen)
        if sol.status == "numerical_trouble":
            break
        traj, u = sol.trajectory, sol.u
        powers = optimize_power(traj, scen).schedule
    return 0


if __name__ == "__main__":
    sys.exit(main())
