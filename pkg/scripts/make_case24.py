"""Write ``case24_12.yaml``: a synthetic 24-bus power / 12-node gas system.

The power side uses the IEEE RTS-24 branch list (parallel circuits merged)
and its nodal peak loads. The gas side is a 12-node network that is radial
except for the m4-m5 pipeline. Generator, wind, gas and cost data are
illustrative and not a reproduction of any published case.

    python3 scripts/make_case24.py [output.yaml]
"""

from __future__ import annotations

import sys
from pathlib import Path

import yaml

HOURS = 24

# (from, to, reactance p.u. on 100 MVA, rating MW); duplicates are parallel circuits
RTS_BRANCHES = [
    (1, 2, 0.0139, 175), (1, 3, 0.2112, 175), (1, 5, 0.0845, 175), (2, 4, 0.1267, 175),
    (2, 6, 0.1920, 175), (3, 9, 0.1190, 175), (3, 24, 0.0839, 400), (4, 9, 0.1037, 175),
    (5, 10, 0.0883, 175), (6, 10, 0.0605, 175), (7, 8, 0.0614, 175), (8, 9, 0.1651, 175),
    (8, 10, 0.1651, 175), (9, 11, 0.0839, 400), (9, 12, 0.0839, 400), (10, 11, 0.0839, 400),
    (10, 12, 0.0839, 400), (11, 13, 0.0476, 500), (11, 14, 0.0418, 500), (12, 13, 0.0476, 500),
    (12, 23, 0.0966, 500), (13, 23, 0.0865, 500), (14, 16, 0.0389, 500), (15, 16, 0.0173, 500),
    (15, 21, 0.0490, 500), (15, 21, 0.0490, 500), (15, 24, 0.0519, 500), (16, 17, 0.0259, 500),
    (16, 19, 0.0231, 500), (17, 18, 0.0144, 500), (17, 22, 0.1053, 500), (18, 21, 0.0259, 500),
    (18, 21, 0.0259, 500), (19, 20, 0.0396, 500), (19, 20, 0.0396, 500), (20, 23, 0.0216, 500),
    (20, 23, 0.0216, 500), (21, 22, 0.0678, 500),
]

PEAK_LOAD = {1: 108, 2: 97, 3: 180, 4: 74, 5: 71, 6: 136, 7: 125, 8: 171, 9: 175, 10: 195,
             13: 265, 14: 194, 15: 317, 16: 100, 18: 333, 19: 181, 20: 128}

# hourly share of the daily peak
PROFILE = [0.67, 0.63, 0.60, 0.59, 0.59, 0.60, 0.74, 0.86, 0.95, 0.96, 0.96, 0.95,
           0.95, 0.95, 0.93, 0.94, 0.99, 1.00, 1.00, 0.96, 0.91, 0.83, 0.73, 0.63]

# id, bus, capacity MW, cost per MWh (non-GFPP) or gas node and efficiency (GFPP)
GENERATORS = [
    ("G1", 1, 152, ("m5", 2.2)), ("G2", 2, 152, ("m3", 2.2)), ("G3", 7, 350, 24.0),
    ("G4", 13, 591, 30.0), ("G5", 15, 60, ("m12", 2.5)), ("G6", 15, 155, 18.0),
    ("G7", 16, 155, ("m10", 2.0)), ("G8", 18, 400, 12.0), ("G9", 21, 400, 14.0),
    ("G10", 22, 300, ("m8", 1.9)), ("G11", 23, 310, ("m7", 1.9)), ("G12", 23, 350, ("m6", 2.1)),
]

WIND = {"W1": (3, 250.0, 0.0), "W2": (5, 250.0, 6.0)}

GAS_NODES = {f"m{i}": (30.0, 70.0) for i in range(1, 13)}
# declared orientations follow the supply layout: GS1 at m1, GS2 at m9, GS3 at m12
PIPELINES = [
    ("m1", "m2"), ("m2", "m3"), ("m3", "m4"), ("m2", "m5"), ("m4", "m5"), ("m5", "m6"),
    ("m6", "m7"), ("m6", "m8"), ("m9", "m8"), ("m9", "m10"), ("m10", "m11"), ("m12", "m11"),
]
SUPPLIERS = [("GS1", "m1", 2600.0, 9.0), ("GS2", "m9", 1400.0, 11.0), ("GS3", "m12", 1000.0, 13.0)]
GAS_LOADS = {"GD1": ("m4", 250.0), "GD2": ("m7", 200.0), "GD3": ("m11", 300.0)}
GAS_PROFILE = [0.80, 0.78, 0.76, 0.75, 0.76, 0.80, 0.90, 1.00, 0.98, 0.95, 0.92, 0.90,
               0.90, 0.92, 0.95, 0.98, 1.00, 1.05, 1.10, 1.10, 1.05, 1.00, 0.92, 0.85]


def wind_series(capacity: float, shift: float) -> list[float]:
    import math

    return [
        round(capacity * (0.45 + 0.35 * math.cos(2 * math.pi * (t - 3 - shift) / 24)), 3)
        for t in range(HOURS)
    ]


def build() -> dict:
    merged: dict[tuple[int, int], list[float]] = {}
    for a, b, x, cap in RTS_BRANCHES:
        entry = merged.setdefault((a, b), [0.0, 0.0])
        entry[0] += 100.0 / x
        entry[1] += cap

    series: dict[str, list[float]] = {}
    loads = []
    for bus, peak in PEAK_LOAD.items():
        lid = f"L{bus}"
        loads.append({"id": lid, "node": f"n{bus}", "demand": lid})
        series[lid] = [round(peak * s, 3) for s in PROFILE]
    wind = []
    for wid, (bus, cap, shift) in WIND.items():
        wind.append({"id": wid, "node": f"n{bus}", "forecast": wid})
        series[wid] = wind_series(cap, shift)

    gens = []
    for gid, bus, cap, spec in GENERATORS:
        g = {"id": gid, "node": f"n{bus}", "capacity": float(cap)}
        if isinstance(spec, tuple):
            g.update(cost=0.0, gfpp=True, gas_node=spec[0], eta=spec[1])
        else:
            g["cost"] = spec
        gens.append(g)

    gas_loads = []
    for did, (node, base) in GAS_LOADS.items():
        gas_loads.append({"id": did, "node": node, "demand": did})
        series[did] = [round(base * s, 3) for s in GAS_PROFILE]

    level = 50.0
    pipes = []
    for i, (a, b) in enumerate(PIPELINES):
        s = 12.0 + 2.0 * (i % 3)
        pipes.append({"from": a, "to": b, "weymouth": 60.0 - 2.0 * (i % 4), "linepack": s,
                      "initial_linepack": s * level})

    return {
        "format_version": 1,
        "meta": {
            "name": "case24_12",
            "description": "Synthetic 24-bus power / 12-node meshed gas system (RTS-24 topology; "
                           "illustrative generator, wind and gas data).",
            "hours": HOURS,
            "units": {"power": "MW", "gas": "MWh", "pressure": "bar", "currency": "EUR"},
        },
        "power": {
            "nodes": [{"id": f"n{i}", **({"reference": True} if i == 13 else {})} for i in range(1, 25)],
            "lines": [
                {"from": f"n{a}", "to": f"n{b}", "susceptance": round(bsum, 4), "capacity": float(cap)}
                for (a, b), (bsum, cap) in merged.items()
            ],
            "generators": gens,
            "wind": wind,
            "loads": loads,
        },
        "gas": {
            "nodes": [{"id": n, "pr_min": lo, "pr_max": hi} for n, (lo, hi) in GAS_NODES.items()],
            "pipelines": pipes,
            "suppliers": [{"id": i, "node": n, "capacity": c, "cost": k} for i, n, c, k in SUPPLIERS],
            "loads": gas_loads,
        },
        "series": series,
    }


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        Path(__file__).resolve().parent.parent / "src" / "gasflex" / "data" / "case24_12.yaml"
    )
    out.write_text(yaml.safe_dump(build(), sort_keys=False, default_flow_style=None, width=120))
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
