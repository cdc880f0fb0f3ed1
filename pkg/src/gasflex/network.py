"""Integrated power and gas system description: data classes, loader, validator.

Systems are read from a YAML (or JSON) document following
``schema/system-v1.schema.json``. Units are fixed: MW for power, bar for
pressure and MWh for gas quantities, so that a GFPP conversion factor is a
pure ratio (MWh of gas per MWh of electricity).
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import jsonschema
import yaml

FORMAT_VERSION = 1
UNITS = {"power": "MW", "gas": "MWh", "pressure": "bar"}


class SystemLoadError(ValueError):
    """The document cannot be turned into an :class:`IntegratedSystem`.

    ``problems`` holds one path-qualified message per defect.
    """

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


@dataclass(frozen=True)
class Violation:
    entity: str
    rule: str
    message: str

    def __str__(self) -> str:
        return f"{self.entity}: [{self.rule}] {self.message}"


# --- power side -------------------------------------------------------------


@dataclass(frozen=True)
class PowerNode:
    id: str
    reference: bool = False


@dataclass(frozen=True)
class Line:
    from_node: str
    to_node: str
    susceptance: float
    capacity: float

    @property
    def key(self) -> str:
        return f"{self.from_node}-{self.to_node}"


@dataclass(frozen=True)
class Generator:
    id: str
    node: str
    capacity: float
    cost: float
    gfpp: bool = False
    eta: float | None = None
    gas_node: str | None = None


@dataclass(frozen=True)
class WindFarm:
    id: str
    node: str
    forecast: tuple[float, ...]


@dataclass(frozen=True)
class ElectricLoad:
    id: str
    node: str
    demand: tuple[float, ...]


@dataclass(frozen=True)
class PowerNetwork:
    nodes: tuple[PowerNode, ...]
    lines: tuple[Line, ...] = ()
    generators: tuple[Generator, ...] = ()
    wind: tuple[WindFarm, ...] = ()
    loads: tuple[ElectricLoad, ...] = ()

    @property
    def reference_nodes(self) -> list[str]:
        return [n.id for n in self.nodes if n.reference]


# --- gas side ---------------------------------------------------------------


@dataclass(frozen=True)
class GasNode:
    id: str
    pr_min: float
    pr_max: float


@dataclass(frozen=True)
class Pipeline:
    """Pipeline with declared orientation ``from_node -> to_node``.

    The orientation is the fixed flow direction of the unidirectional model.
    A compression ratio above 1 lets the outlet pressure exceed the inlet
    pressure by at most that factor.
    """

    from_node: str
    to_node: str
    weymouth: float
    linepack: float
    initial_linepack: float
    compression: float = 1.0

    @property
    def key(self) -> str:
        return f"{self.from_node}-{self.to_node}"

    @property
    def has_compressor(self) -> bool:
        return self.compression > 1.0


@dataclass(frozen=True)
class GasSupplier:
    id: str
    node: str
    capacity: float
    cost: float


@dataclass(frozen=True)
class GasLoad:
    id: str
    node: str
    demand: tuple[float, ...]


@dataclass(frozen=True)
class GasNetwork:
    nodes: tuple[GasNode, ...]
    pipelines: tuple[Pipeline, ...] = ()
    suppliers: tuple[GasSupplier, ...] = ()
    loads: tuple[GasLoad, ...] = ()

    def node(self, node_id: str) -> GasNode:
        return self._nodes[node_id]

    @cached_property
    def _nodes(self) -> dict[str, GasNode]:
        return {n.id: n for n in self.nodes}

    def pipeline(self, key: str) -> Pipeline:
        return self._pipelines[key]

    @cached_property
    def _pipelines(self) -> dict[str, Pipeline]:
        return {p.key: p for p in self.pipelines}


@dataclass(frozen=True)
class IntegratedSystem:
    name: str
    power: PowerNetwork
    gas: GasNetwork
    hours: int
    first_hour: int = 1
    description: str = ""
    currency: str = ""

    @property
    def horizon(self) -> range:
        return range(self.first_hour, self.first_hour + self.hours)

    @property
    def gfpps(self) -> list[Generator]:
        return [g for g in self.power.generators if g.gfpp]

    # coupling sets, derived from host-node fields

    @cached_property
    def generators_at(self) -> dict[str, list[Generator]]:
        return _group(self.power.generators, "node", [n.id for n in self.power.nodes])

    @cached_property
    def wind_at(self) -> dict[str, list[WindFarm]]:
        return _group(self.power.wind, "node", [n.id for n in self.power.nodes])

    @cached_property
    def electric_loads_at(self) -> dict[str, list[ElectricLoad]]:
        return _group(self.power.loads, "node", [n.id for n in self.power.nodes])

    @cached_property
    def suppliers_at(self) -> dict[str, list[GasSupplier]]:
        return _group(self.gas.suppliers, "node", [n.id for n in self.gas.nodes])

    @cached_property
    def gfpps_at(self) -> dict[str, list[Generator]]:
        return _group(self.gfpps, "gas_node", [n.id for n in self.gas.nodes])

    @cached_property
    def gas_loads_at(self) -> dict[str, list[GasLoad]]:
        return _group(self.gas.loads, "node", [n.id for n in self.gas.nodes])

    def electric_demand(self, t_index: int) -> float:
        return sum(load.demand[t_index] for load in self.power.loads)

    def gas_demand(self, t_index: int) -> float:
        return sum(load.demand[t_index] for load in self.gas.loads)

    def window(self, start: int, stop: int) -> "IntegratedSystem":
        """Sub-system over hour positions ``start:stop`` (0-based, stop exclusive)."""
        if not 0 <= start < stop <= self.hours:
            raise ValueError(f"invalid window [{start}, {stop}) for a {self.hours}-hour horizon")
        power = replace(
            self.power,
            wind=tuple(replace(w, forecast=w.forecast[start:stop]) for w in self.power.wind),
            loads=tuple(replace(d, demand=d.demand[start:stop]) for d in self.power.loads),
        )
        gas = replace(
            self.gas, loads=tuple(replace(d, demand=d.demand[start:stop]) for d in self.gas.loads)
        )
        return replace(
            self, power=power, gas=gas, hours=stop - start, first_hour=self.first_hour + start
        )

    def fingerprint(self) -> str:
        doc = to_document(self)
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]


def _group(items, attr: str, keys: list[str]) -> dict[str, list]:
    out: dict[str, list] = {k: [] for k in keys}
    for item in items:
        out.setdefault(getattr(item, attr), []).append(item)
    return out


# --- loading ----------------------------------------------------------------


def _schema() -> dict:
    text = resources.files("gasflex").joinpath("schema/system-v1.schema.json").read_text()
    return json.loads(text)


def _path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def load_system(document: str | Mapping[str, Any]) -> IntegratedSystem:
    """Build an :class:`IntegratedSystem` from YAML/JSON text or an already-parsed mapping."""
    if isinstance(document, str):
        try:
            document = yaml.safe_load(document)
        except yaml.YAMLError as exc:
            raise SystemLoadError([f"<root>: not a valid YAML/JSON document ({exc})"]) from exc
    if not isinstance(document, Mapping):
        raise SystemLoadError(["<root>: expected a mapping"])

    validator = jsonschema.Draft202012Validator(_schema())
    errors = sorted(validator.iter_errors(document), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        raise SystemLoadError([f"{_path(e.absolute_path)}: {e.message}" for e in errors])

    problems: list[str] = []
    meta = document["meta"]
    hours = meta["hours"]
    series = document["series"]

    def get_series(ref: str, where: str) -> tuple[float, ...]:
        if ref not in series:
            problems.append(f"{where}: unknown series {ref!r}")
            return tuple([0.0] * hours)
        values = tuple(float(x) for x in series[ref])
        if len(values) != hours:
            problems.append(
                f"{where}: series {ref!r} has length {len(values)}, expected {hours}"
            )
        return values

    pw, gs = document["power"], document["gas"]
    power_nodes = tuple(PowerNode(n["id"], bool(n.get("reference", False))) for n in pw["nodes"])
    gas_nodes = tuple(GasNode(n["id"], float(n["pr_min"]), float(n["pr_max"])) for n in gs["nodes"])
    pids = {n.id for n in power_nodes}
    gids = {n.id for n in gas_nodes}

    def need(node: str, known: set[str], where: str) -> None:
        if node not in known:
            problems.append(f"{where}: unknown node {node!r}")

    for section, nodes in (("power.nodes", power_nodes), ("gas.nodes", gas_nodes)):
        for nid, count in Counter(n.id for n in nodes).items():
            if count > 1:
                problems.append(f"{section}: duplicate node id {nid!r}")

    lines = []
    for i, rec in enumerate(pw["lines"]):
        where = f"power.lines[{i}]"
        need(rec["from"], pids, where + ".from")
        need(rec["to"], pids, where + ".to")
        lines.append(Line(rec["from"], rec["to"], float(rec["susceptance"]), float(rec["capacity"])))

    gens = []
    for i, rec in enumerate(pw["generators"]):
        where = f"power.generators[{i}]"
        need(rec["node"], pids, where + ".node")
        gfpp = bool(rec.get("gfpp", False))
        gas_node = rec.get("gas_node")
        if gfpp and gas_node is None:
            problems.append(f"{where}.gas_node: GFPP {rec['id']!r} needs a gas node")
        if gas_node is not None:
            need(gas_node, gids, where + ".gas_node")
        eta = rec.get("eta")
        gens.append(
            Generator(
                rec["id"],
                rec["node"],
                float(rec["capacity"]),
                float(rec["cost"]),
                gfpp,
                None if eta is None else float(eta),
                gas_node,
            )
        )

    wind = []
    for i, rec in enumerate(pw["wind"]):
        where = f"power.wind[{i}]"
        need(rec["node"], pids, where + ".node")
        wind.append(WindFarm(rec["id"], rec["node"], get_series(rec["forecast"], where + ".forecast")))

    eloads = []
    for i, rec in enumerate(pw["loads"]):
        where = f"power.loads[{i}]"
        need(rec["node"], pids, where + ".node")
        eloads.append(ElectricLoad(rec["id"], rec["node"], get_series(rec["demand"], where + ".demand")))

    pipes = []
    for i, rec in enumerate(gs["pipelines"]):
        where = f"gas.pipelines[{i}]"
        need(rec["from"], gids, where + ".from")
        need(rec["to"], gids, where + ".to")
        pipes.append(
            Pipeline(
                rec["from"],
                rec["to"],
                float(rec["weymouth"]),
                float(rec["linepack"]),
                float(rec["initial_linepack"]),
                float(rec.get("compression", 1.0)),
            )
        )
    for key, count in Counter(p.key for p in pipes).items():
        if count > 1:
            problems.append(f"gas.pipelines: duplicate pipeline {key!r}")

    suppliers = []
    for i, rec in enumerate(gs["suppliers"]):
        need(rec["node"], gids, f"gas.suppliers[{i}].node")
        suppliers.append(GasSupplier(rec["id"], rec["node"], float(rec["capacity"]), float(rec["cost"])))

    gloads = []
    for i, rec in enumerate(gs["loads"]):
        where = f"gas.loads[{i}]"
        need(rec["node"], gids, where + ".node")
        gloads.append(GasLoad(rec["id"], rec["node"], get_series(rec["demand"], where + ".demand")))

    for section, items in (
        ("power.generators", gens),
        ("power.wind", wind),
        ("power.loads", eloads),
        ("gas.suppliers", suppliers),
        ("gas.loads", gloads),
    ):
        for eid, count in Counter(x.id for x in items).items():
            if count > 1:
                problems.append(f"{section}: duplicate id {eid!r}")

    if problems:
        raise SystemLoadError(problems)

    return IntegratedSystem(
        name=meta["name"],
        power=PowerNetwork(power_nodes, tuple(lines), tuple(gens), tuple(wind), tuple(eloads)),
        gas=GasNetwork(gas_nodes, tuple(pipes), tuple(suppliers), tuple(gloads)),
        hours=hours,
        first_hour=meta.get("first_hour", 1),
        description=meta.get("description", ""),
        currency=meta.get("units", {}).get("currency", ""),
    )


def load_system_file(path: str | Path) -> IntegratedSystem:
    return load_system(Path(path).read_text())


def to_document(system: IntegratedSystem) -> dict[str, Any]:
    """Inverse of :func:`load_system`; series are keyed by entity id."""
    units = dict(UNITS)
    if system.currency:
        units["currency"] = system.currency
    meta: dict[str, Any] = {"name": system.name, "hours": system.hours, "units": units}
    if system.first_hour != 1:
        meta["first_hour"] = system.first_hour
    if system.description:
        meta["description"] = system.description
    series: dict[str, list[float]] = {}

    def gen_rec(g: Generator) -> dict:
        rec: dict[str, Any] = {"id": g.id, "node": g.node, "capacity": g.capacity, "cost": g.cost}
        if g.gfpp:
            rec["gfpp"] = True
        if g.eta is not None:
            rec["eta"] = g.eta
        if g.gas_node is not None:
            rec["gas_node"] = g.gas_node
        return rec

    def pipe_rec(p: Pipeline) -> dict:
        rec = {
            "from": p.from_node,
            "to": p.to_node,
            "weymouth": p.weymouth,
            "linepack": p.linepack,
            "initial_linepack": p.initial_linepack,
        }
        if p.compression != 1.0:
            rec["compression"] = p.compression
        return rec

    def with_series(key: str, values: tuple[float, ...]) -> str:
        series[key] = list(values)
        return key

    return {
        "format_version": FORMAT_VERSION,
        "meta": meta,
        "power": {
            "nodes": [
                {"id": n.id, "reference": True} if n.reference else {"id": n.id}
                for n in system.power.nodes
            ],
            "lines": [
                {"from": ln.from_node, "to": ln.to_node, "susceptance": ln.susceptance, "capacity": ln.capacity}
                for ln in system.power.lines
            ],
            "generators": [gen_rec(g) for g in system.power.generators],
            "wind": [
                {"id": w.id, "node": w.node, "forecast": with_series(w.id, w.forecast)}
                for w in system.power.wind
            ],
            "loads": [
                {"id": d.id, "node": d.node, "demand": with_series(d.id, d.demand)}
                for d in system.power.loads
            ],
        },
        "gas": {
            "nodes": [{"id": n.id, "pr_min": n.pr_min, "pr_max": n.pr_max} for n in system.gas.nodes],
            "pipelines": [pipe_rec(p) for p in system.gas.pipelines],
            "suppliers": [
                {"id": s.id, "node": s.node, "capacity": s.capacity, "cost": s.cost}
                for s in system.gas.suppliers
            ],
            "loads": [
                {"id": d.id, "node": d.node, "demand": with_series(d.id, d.demand)}
                for d in system.gas.loads
            ],
        },
        "series": series,
    }


def dump_system(system: IntegratedSystem) -> str:
    return yaml.safe_dump(to_document(system), sort_keys=False, default_flow_style=None)


# --- validation -------------------------------------------------------------


def validate_system(system: IntegratedSystem) -> list[Violation]:
    """Check every data invariant; an empty list means the system is usable."""
    out: list[Violation] = []

    def bad(entity: str, rule: str, message: str) -> None:
        out.append(Violation(entity, rule, message))

    pw, gs = system.power, system.gas
    refs = pw.reference_nodes
    if len(refs) != 1:
        bad("power.nodes", "reference-node", f"expected exactly one reference node, found {len(refs)}")
    pids = {n.id for n in pw.nodes}
    gids = {n.id for n in gs.nodes}

    for ln in pw.lines:
        ent = f"line {ln.key}"
        if ln.from_node not in pids or ln.to_node not in pids:
            bad(ent, "host-node", "endpoint does not exist")
        if ln.from_node == ln.to_node:
            bad(ent, "distinct-endpoints", "line connects a node to itself")
        if not ln.capacity > 0:
            bad(ent, "line-capacity", f"capacity must be > 0, got {ln.capacity}")
        if not ln.susceptance > 0:
            bad(ent, "susceptance", f"susceptance must be > 0, got {ln.susceptance}")

    for g in pw.generators:
        ent = f"generator {g.id}"
        if g.node not in pids:
            bad(ent, "host-node", f"unknown power node {g.node!r}")
        if g.capacity < 0:
            bad(ent, "capacity", f"capacity must be >= 0, got {g.capacity}")
        if g.gfpp:
            if g.eta is None or not g.eta > 0:
                bad(ent, "conversion-factor", "GFPP needs a conversion factor eta > 0")
            if g.gas_node not in gids:
                bad(ent, "coupling", f"GFPP gas node {g.gas_node!r} does not exist")
        else:
            if g.eta is not None:
                bad(ent, "conversion-factor", "conversion factor given for a non-GFPP")
            if g.gas_node is not None:
                bad(ent, "coupling", "gas node given for a non-GFPP")

    for w in pw.wind:
        ent = f"wind {w.id}"
        if w.node not in pids:
            bad(ent, "host-node", f"unknown power node {w.node!r}")
        if len(w.forecast) != system.hours:
            bad(ent, "series-length", f"forecast has {len(w.forecast)} values, expected {system.hours}")
        if any(x < 0 for x in w.forecast):
            bad(ent, "non-negative", "negative forecast value")

    for d in pw.loads:
        ent = f"electric load {d.id}"
        if d.node not in pids:
            bad(ent, "host-node", f"unknown power node {d.node!r}")
        if len(d.demand) != system.hours:
            bad(ent, "series-length", f"demand has {len(d.demand)} values, expected {system.hours}")
        if any(x < 0 for x in d.demand):
            bad(ent, "non-negative", "negative demand value")

    for n in gs.nodes:
        ent = f"gas node {n.id}"
        if n.pr_min < 0:
            bad(ent, "pressure-bounds", f"pr_min must be >= 0, got {n.pr_min}")
        if n.pr_min > n.pr_max:
            bad(ent, "pressure-bounds", f"pr_min {n.pr_min} exceeds pr_max {n.pr_max}")

    for p in gs.pipelines:
        ent = f"pipeline {p.key}"
        if p.from_node not in gids or p.to_node not in gids:
            bad(ent, "host-node", "endpoint does not exist")
            continue
        if p.from_node == p.to_node:
            bad(ent, "distinct-endpoints", "pipeline connects a node to itself")
        if not p.weymouth > 0:
            bad(ent, "weymouth-constant", f"must be > 0, got {p.weymouth}")
        if not p.linepack > 0:
            bad(ent, "linepack-constant", f"must be > 0, got {p.linepack}")
        if p.compression < 1:
            bad(ent, "compression-ratio", f"must be >= 1, got {p.compression}")
        cap = p.linepack * (gs.node(p.from_node).pr_max + gs.node(p.to_node).pr_max) / 2
        if p.initial_linepack < 0:
            bad(ent, "initial-linepack", f"must be >= 0, got {p.initial_linepack}")
        elif p.initial_linepack > cap:
            bad(
                ent,
                "initial-linepack",
                f"initial linepack {p.initial_linepack} exceeds the maximum {cap} reachable at maximum pressures",
            )

    for s in gs.suppliers:
        ent = f"supplier {s.id}"
        if s.node not in gids:
            bad(ent, "host-node", f"unknown gas node {s.node!r}")
        if s.capacity < 0:
            bad(ent, "capacity", f"capacity must be >= 0, got {s.capacity}")

    for d in gs.loads:
        ent = f"gas load {d.id}"
        if d.node not in gids:
            bad(ent, "host-node", f"unknown gas node {d.node!r}")
        if len(d.demand) != system.hours:
            bad(ent, "series-length", f"demand has {len(d.demand)} values, expected {system.hours}")
        if any(x < 0 for x in d.demand):
            bad(ent, "non-negative", "negative demand value")

    return out
