"""Objective and Xi against the number of expansion points.

    python3 scripts/sweep_points.py [system.yaml | shipped name] [--mode bi] [--points 1 2 4 8 16]
"""

from __future__ import annotations

import argparse
import time

from gasflex.analysis import approximation_error_delta
from gasflex.formulation import FormulationConfig
from gasflex.network import load_system_file
from gasflex.runs import solve_system
from gasflex.solver import SolveOptions
from gasflex.toys import SHIPPED, shipped_system


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("system", nargs="?", default="case24_12")
    ap.add_argument("--mode", default="uni", choices=["uni", "bi"])
    ap.add_argument("--points", type=int, nargs="+", default=[1, 2, 4, 8, 16])
    ap.add_argument("--gap", type=float, default=1e-6)
    ap.add_argument("--time-limit", type=float, default=600.0)
    args = ap.parse_args()

    system = shipped_system(args.system) if args.system in SHIPPED else load_system_file(args.system)
    opts = SolveOptions(mip_gap=args.gap, time_limit=args.time_limit)
    print(f"{'points':>6} {'objective':>16} {'xi':>10} {'seconds':>8}")
    for n in args.points:
        start = time.perf_counter()
        sched = solve_system(system, args.mode, FormulationConfig(points=n), opts)
        xi = approximation_error_delta(sched, system).xi
        print(f"{n:>6} {sched.objective:>16.4f} {xi:>10.4f} {time.perf_counter() - start:>8.2f}")


if __name__ == "__main__":
    main()
