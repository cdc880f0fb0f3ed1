"""Small generated systems for property tests and experiment scripts."""

from __future__ import annotations

from importlib import resources

import numpy as np

from .network import (
    ElectricLoad,
    GasLoad,
    GasNetwork,
    GasNode,
    GasSupplier,
    Generator,
    IntegratedSystem,
    Line,
    Pipeline,
    PowerNetwork,
    PowerNode,
    WindFarm,
    load_system,
)

SHIPPED = ("toy_minimal", "toy_reversal", "toy_counterexample", "case24_12")


def shipped_system(name: str) -> IntegratedSystem:
    """Load one of the systems bundled in ``gasflex/data``."""
    if name not in SHIPPED:
        raise KeyError(f"unknown shipped system {name!r}; choose from {SHIPPED}")
    return load_system(resources.files("gasflex").joinpath(f"data/{name}.yaml").read_text())


def shipped_path(name: str):
    return resources.files("gasflex").joinpath(f"data/{name}.yaml")


def random_system(
    seed: int,
    gas_nodes: int = 4,
    pipelines: int = 4,
    hours: int = 4,
    compressor_prob: float = 0.0,
) -> IntegratedSystem:
    """A random but always feasible integrated system.

    Every gas node hosts an expensive backstop supplier and every power node
    an expensive generator, and all pressure boxes share the band
    [35, 50] bar. Initial linepacks correspond to one common pressure in that
    band, so the zero-flow schedule at that pressure is feasible for both
    model variants. Cheap suppliers and GFPPs are scattered so that
    pipeline flows, and their directions, matter for the optimum.
    """
    if not 2 <= gas_nodes:
        raise ValueError("need at least two gas nodes")
    if not gas_nodes - 1 <= pipelines <= gas_nodes * (gas_nodes - 1) // 2:
        raise ValueError("pipeline count must allow a connected simple graph")
    rng = np.random.default_rng(seed)
    r = lambda lo, hi: float(np.round(rng.uniform(lo, hi), 3))  # noqa: E731

    gids = [f"m{i + 1}" for i in range(gas_nodes)]
    gnodes = tuple(GasNode(g, r(20.0, 35.0), r(50.0, 70.0)) for g in gids)

    # random spanning tree, then extra chords
    order = list(rng.permutation(gas_nodes))
    edges = set()
    for i in range(1, gas_nodes):
        a, b = order[i], order[int(rng.integers(0, i))]
        edges.add(frozenset((a, b)))
    while len(edges) < pipelines:
        a, b = rng.choice(gas_nodes, size=2, replace=False)
        edges.add(frozenset((int(a), int(b))))
    level = r(36.0, 49.0)
    pipes = []
    # declared orientation follows a random ranking: no directed cycles, which
    # would pin every pressure on the cycle in the unidirectional model
    rank = {int(v): i for i, v in enumerate(rng.permutation(gas_nodes))}
    for e in sorted(tuple(sorted(e)) for e in edges):
        a, b = (e[0], e[1]) if rank[e[0]] < rank[e[1]] else (e[1], e[0])
        s = r(0.5, 2.0)
        gamma = r(1.05, 1.4) if rng.random() < compressor_prob else 1.0
        pipes.append(Pipeline(gids[a], gids[b], r(1.0, 3.0), s, round(s * level, 6), gamma))

    pids = ["n1", "n2", "n3"]
    pnodes = (PowerNode("n1", True), PowerNode("n2"), PowerNode("n3"))
    lines = (Line("n1", "n2", r(20, 60), r(80, 150)), Line("n2", "n3", r(20, 60), r(80, 150)))

    gens = [Generator(f"B{i + 1}", n, 400.0, r(70.0, 90.0)) for i, n in enumerate(pids)]
    for i in range(int(rng.integers(1, 3))):
        gens.append(
            Generator(f"F{i + 1}", pids[int(rng.integers(0, 3))], r(40, 90), 0.0, True, r(1.6, 2.4),
                      gids[int(rng.integers(0, gas_nodes))])
        )
    wind = (WindFarm("W1", pids[int(rng.integers(0, 3))], tuple(r(0, 30) for _ in range(hours))),)
    eloads = tuple(
        ElectricLoad(f"L{i + 1}", n, tuple(r(10, 70) for _ in range(hours))) for i, n in enumerate(pids)
    )

    suppliers = [GasSupplier(f"X{i + 1}", g, 2000.0, r(30.0, 45.0)) for i, g in enumerate(gids)]
    for i in range(int(rng.integers(1, 3))):
        suppliers.append(GasSupplier(f"S{i + 1}", gids[int(rng.integers(0, gas_nodes))], r(40, 150), r(5.0, 15.0)))
    gloads = tuple(
        GasLoad(f"D{i + 1}", gids[int(rng.integers(0, gas_nodes))], tuple(r(0, 60) for _ in range(hours)))
        for i in range(int(rng.integers(1, 3)))
    )
    return IntegratedSystem(
        name=f"random{seed}",
        power=PowerNetwork(pnodes, lines, tuple(gens), wind, eloads),
        gas=GasNetwork(gnodes, tuple(pipes), tuple(suppliers), gloads),
        hours=hours,
        currency="EUR",
    )
