"""Uni vs bi on the shipped reversal toy: cost, direction changes, linepack use.

    python3 scripts/run_reversal.py [--backend cbc]
"""

from __future__ import annotations

import argparse

from gasflex.analysis import approximation_error_delta, compare_runs, verify_directions
from gasflex.runs import solve_system
from gasflex.toys import shipped_system


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--backend", default="highs", choices=["highs", "cbc"])
    args = ap.parse_args()

    system = shipped_system("toy_reversal")
    uni = solve_system(system, "uni", backend=args.backend)
    bi = solve_system(system, "bi", backend=args.backend)
    cmp = compare_runs(uni, bi, system)

    print(f"cost uni {cmp.cost_uni:.2f}  bi {cmp.cost_bi:.2f}  savings {cmp.savings_pct:.2f}%")
    print(f"GFPP share uni {cmp.gfpp_share['uni']:.1f}%  bi {cmp.gfpp_share['bi']:.1f}%")
    for sched in (uni, bi):
        err = approximation_error_delta(sched, system)
        dirs = verify_directions(sched, system)
        print(f"{sched.mode}: xi {err.xi:.4f}  consistency {dirs.consistency:.2f}")
        print("  flow   " + " ".join(f"{v:7.2f}" for v in sched.get("q", "A-B")))
        for c in dirs.changes:
            print(f"  {c.pipeline} turns {c.old:+d} -> {c.new:+d} at hour {c.hour}")
    for mode, table in cmp.linepack.items():
        for key, (charge, discharge) in table.items():
            print(f"linepack {mode} {key}: charge {charge:.2f}  discharge {discharge:.2f}")


if __name__ == "__main__":
    main()
