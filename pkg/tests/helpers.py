"""Tiny hand-checkable systems built in code."""

from __future__ import annotations

from gasflex.network import (
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
)


def tiny(
    hours: int = 2,
    elec: float | list[float] = 0.0,
    gas: float | list[float] = 0.0,
    generators: list[Generator] | None = None,
    suppliers: list[GasSupplier] | None = None,
    gamma: float = 1.0,
    boxes=((30.0, 60.0), (20.0, 50.0)),
    k: float = 2.0,
    s: float = 1.0,
    h0: float = 40.0,
    lines: bool = True,
) -> IntegratedSystem:
    """Two power nodes (n1 reference, n2), two gas nodes A -> B, load at n2 and B."""
    series = lambda v: tuple(v) if isinstance(v, list) else (float(v),) * hours  # noqa: E731
    gens = generators if generators is not None else [Generator("G1", "n1", 100.0, 10.0)]
    sups = suppliers if suppliers is not None else [GasSupplier("SA", "A", 500.0, 3.0)]
    return IntegratedSystem(
        name="tiny",
        power=PowerNetwork(
            (PowerNode("n1", True), PowerNode("n2")),
            (Line("n1", "n2", 10.0, 100.0),) if lines else (),
            tuple(gens),
            (),
            (ElectricLoad("L", "n2", series(elec)),),
        ),
        gas=GasNetwork(
            (GasNode("A", *boxes[0]), GasNode("B", *boxes[1])),
            (Pipeline("A", "B", k, s, h0, gamma),),
            tuple(sups),
            (GasLoad("D", "B", series(gas)),),
        ),
        hours=hours,
    )
