"""Post-solve physics checks and comparison metrics for uni/bi schedules."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .formulation import BigMConfig, derive_big_m
from .network import IntegratedSystem
from .solver import ScheduleSolution

EPS_DEN = 1e-9


@dataclass
class DeltaEntry:
    value: float
    defined: bool


@dataclass
class ApproxErrorReport:
    """Normalized Weymouth residual per (pipeline, hour) and its RMS aggregate."""

    pipelines: list[str]
    hours: list[int]
    delta: dict[tuple[str, int], DeltaEntry]
    xi: float = 0.0
    undefined: int = 0

    def grid(self) -> np.ndarray:
        """``len(pipelines) x len(hours)`` array, NaN where undefined."""
        out = np.full((len(self.pipelines), len(self.hours)), np.nan)
        for i, k in enumerate(self.pipelines):
            for j, t in enumerate(self.hours):
                e = self.delta[(k, t)]
                if e.defined:
                    out[i, j] = e.value
        return out


def weymouth_delta(q: float, k: float, pr_m: float, pr_u: float, eps: float = EPS_DEN) -> DeltaEntry:
    """``|q^2 - K^2 D| / (K^2 D)`` with ``D`` the squared-pressure drop along the flow.

    ``D`` is oriented by the sign of ``q`` (by its magnitude when ``q == 0``), so the
    value is non-negative and does not depend on the stored pipeline orientation.
    """
    diff = pr_m * pr_m - pr_u * pr_u
    if q > 0:
        oriented = diff
    elif q < 0:
        oriented = -diff
    else:
        oriented = abs(diff)
    den = k * k * oriented
    if abs(den) < eps:
        return DeltaEntry(math.nan, False)
    return DeltaEntry(abs(q * q - den) / abs(den), True)


def approximation_error_delta(
    schedule: ScheduleSolution, system: IntegratedSystem, eps: float = EPS_DEN
) -> ApproxErrorReport:
    passive = [p for p in system.gas.pipelines if not p.has_compressor]
    delta = {}
    for p in passive:
        q = schedule.get("q", p.key)
        prm = schedule.get("pr", p.from_node)
        pru = schedule.get("pr", p.to_node)
        for j, t in enumerate(schedule.hours):
            delta[(p.key, t)] = weymouth_delta(float(q[j]), p.weymouth, float(prm[j]), float(pru[j]), eps)
    report = ApproxErrorReport([p.key for p in passive], list(schedule.hours), delta)
    report.undefined = sum(1 for e in delta.values() if not e.defined)
    report.xi = approximation_error_xi(report)
    return report


def approximation_error_xi(report: ApproxErrorReport) -> float:
    """Root mean square of Delta over the full pipeline-hour grid.

    Undefined entries add nothing to the sum but still count in the
    normalization ``|T| * |Z|``.
    """
    cells = len(report.pipelines) * len(report.hours)
    if cells == 0:
        return 0.0
    defined = [e.value for e in report.delta.values() if e.defined]
    if not defined:
        warnings.warn("all approximation-error entries are undefined; reporting 0", stacklevel=2)
        return 0.0
    return math.sqrt(sum(v * v for v in defined) / cells)


def delta_difference_grid(uni: ApproxErrorReport, bi: ApproxErrorReport) -> np.ndarray:
    """``Delta_uni - Delta_bi`` per pipeline (rows) and hour (columns)."""
    if uni.pipelines != bi.pipelines or uni.hours != bi.hours:
        raise ValueError("error reports cover different pipelines or hours")
    return uni.grid() - bi.grid()


# --- flow directions ----------------------------------------------------------


@dataclass
class DirectionEntry:
    pipeline: str
    hour: int
    flow: float
    direction: int
    pressure_sign: int
    consistent: bool


@dataclass
class DirectionChange:
    pipeline: str
    hour: int
    old: int
    new: int


@dataclass
class DirectionReport:
    entries: list[DirectionEntry]
    changes: list[DirectionChange] = field(default_factory=list)

    @property
    def inconsistent(self) -> list[DirectionEntry]:
        return [e for e in self.entries if not e.consistent]

    @property
    def consistency(self) -> float:
        if not self.entries:
            return 1.0
        return sum(e.consistent for e in self.entries) / len(self.entries)


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def verify_directions(
    schedule: ScheduleSolution,
    system: IntegratedSystem,
    tol_flow: float | dict[str, float] | None = None,
    bigm: BigMConfig | None = None,
) -> DirectionReport:
    """Compare each optimal flow's sign with the one the exact Weymouth equation implies.

    Compressor pipelines are exempt. ``tol_flow`` defaults to 1e-6 times the
    pipeline's big-M flow bound.
    """
    bigm = bigm or derive_big_m(system)
    entries = []
    for p in system.gas.pipelines:
        if p.has_compressor:
            continue
        if tol_flow is None:
            tol = 1e-6 * bigm.flow[p.key]
        elif isinstance(tol_flow, dict):
            tol = tol_flow[p.key]
        else:
            tol = float(tol_flow)
        q = schedule.get("q", p.key)
        prm = schedule.get("pr", p.from_node)
        pru = schedule.get("pr", p.to_node)
        for j, t in enumerate(schedule.hours):
            flow = float(q[j])
            ps = _sign(float(prm[j]) ** 2 - float(pru[j]) ** 2)
            small = abs(flow) <= tol
            entries.append(
                DirectionEntry(p.key, t, flow, 0 if small else _sign(flow), ps, small or _sign(flow) == ps)
            )

    changes = []
    if schedule.has("y"):
        for p in system.gas.pipelines:
            y = np.round(schedule.get("y", p.key)).astype(int)
            for j in range(1, len(y)):
                if y[j] != y[j - 1]:
                    changes.append(
                        DirectionChange(p.key, schedule.hours[j], 1 if y[j - 1] else -1, 1 if y[j] else -1)
                    )
    return DirectionReport(entries, changes)


# --- linepack -----------------------------------------------------------------


@dataclass
class LinepackProfile:
    pipeline: str
    linepack: np.ndarray
    charge: np.ndarray
    discharge: np.ndarray
    initial: float

    @property
    def total_charge(self) -> float:
        return float(self.charge.sum())

    @property
    def total_discharge(self) -> float:
        return float(self.discharge.sum())


def linepack_profile(schedule: ScheduleSolution, system: IntegratedSystem) -> dict[str, LinepackProfile]:
    out = {}
    for p in system.gas.pipelines:
        h = np.asarray(schedule.get("h", p.key), dtype=float)
        h0 = schedule.initial_linepack.get(p.key, p.initial_linepack)
        step = np.diff(np.concatenate([[h0], h]))
        out[p.key] = LinepackProfile(p.key, h, np.maximum(step, 0.0), np.maximum(-step, 0.0), h0)
    return out


# --- run comparison -------------------------------------------------------------


@dataclass
class ComparisonReport:
    cost_uni: float
    cost_bi: float
    savings_pct: float
    gfpp_share: dict[str, float]
    linepack: dict[str, dict[str, tuple[float, float]]]
    ramp: dict[str, dict[str, np.ndarray]]


def gfpp_share(schedule: ScheduleSolution, system: IntegratedSystem) -> float:
    """GFPP production as a percentage of total electricity demand."""
    produced = sum(float(schedule.get("p", g.id).sum()) for g in system.gfpps)
    demand = sum(sum(d.demand) for d in system.power.loads)
    return 100.0 * produced / demand if demand > 0 else 0.0


def ramp_utilization(schedule: ScheduleSolution, system: IntegratedSystem) -> dict[str, np.ndarray]:
    """Hour-to-hour production change as a percentage of installed capacity.

    The first hour has no predecessor and is reported as NaN.
    """
    out = {}
    for g in system.power.generators:
        p = schedule.get("p", g.id)
        r = np.full(len(p), np.nan)
        if g.capacity > 0:
            r[1:] = 100.0 * np.diff(p) / g.capacity
        out[g.id] = r
    return out


def compare_runs(uni: ScheduleSolution, bi: ScheduleSolution, system: IntegratedSystem) -> ComparisonReport:
    fp = system.fingerprint()
    if uni.system != fp or bi.system != fp:
        raise ValueError("schedules were not computed on the given system")
    if uni.hours != bi.hours:
        raise ValueError("schedules cover different horizons")
    savings = 100.0 * (uni.objective - bi.objective) / uni.objective if uni.objective else 0.0
    linepack = {}
    for label, sched in (("uni", uni), ("bi", bi)):
        prof = linepack_profile(sched, system)
        linepack[label] = {k: (v.total_charge, v.total_discharge) for k, v in prof.items()}
    return ComparisonReport(
        cost_uni=uni.objective,
        cost_bi=bi.objective,
        savings_pct=savings,
        gfpp_share={"uni": gfpp_share(uni, system), "bi": gfpp_share(bi, system)},
        linepack=linepack,
        ramp={"uni": ramp_utilization(uni, system), "bi": ramp_utilization(bi, system)},
    )


# --- exactness of an optimum ------------------------------------------------------


def exactness_residuals(
    schedule: ScheduleSolution, system: IntegratedSystem, bigm: BigMConfig | None = None
) -> dict[str, float]:
    """Worst-case residuals of the identities every optimum must satisfy.

    Keys: ``direction_overlap`` (max over pipeline-hours of min(q+, q-)/M_flow),
    ``phi_product``, ``binary``, ``linepack_balance``, ``terminal_shortfall``,
    ``gas_balance`` and ``power_balance`` (both relative to total demand).
    """
    bigm = bigm or derive_big_m(system)
    gs, pw = system.gas, system.power
    res = dict.fromkeys(
        ("direction_overlap", "phi_product", "binary", "linepack_balance",
         "terminal_shortfall", "gas_balance", "power_balance"),
        0.0,
    )
    bi = schedule.has("y")
    n = len(schedule.hours)

    for p in gs.pipelines:
        k = p.key
        h = schedule.get("h", k)
        inflow = schedule.get("qin", k) - schedule.get("qout", k)
        if bi:
            inflow = inflow + schedule.get("qinr", k) - schedule.get("qoutr", k)
            qp, qm, y = schedule.get("qp", k), schedule.get("qm", k), schedule.get("y", k)
            res["direction_overlap"] = max(
                res["direction_overlap"], float(np.max(np.minimum(qp, qm))) / bigm.flow[k]
            )
            res["binary"] = max(res["binary"], float(np.max(np.abs(y - np.round(y)))))
            if schedule.has("phim") and k in schedule.values["phim"]:
                prm, pru = schedule.get("pr", p.from_node), schedule.get("pr", p.to_node)
                res["phi_product"] = max(
                    res["phi_product"],
                    float(np.max(np.abs(schedule.get("phim", k) - prm * y))),
                    float(np.max(np.abs(schedule.get("phiu", k) - pru * y))),
                )
        h0 = schedule.initial_linepack.get(k, p.initial_linepack)
        prev = np.concatenate([[h0], h[:-1]])
        res["linepack_balance"] = max(res["linepack_balance"], float(np.max(np.abs(h - prev - inflow))))
        res["terminal_shortfall"] = max(res["terminal_shortfall"], p.initial_linepack - float(h[-1]))

    gas_dem = sum(sum(d.demand) for d in gs.loads) or 1.0
    for node in gs.nodes:
        lhs = np.zeros(n)
        for s in system.suppliers_at[node.id]:
            lhs += schedule.get("g", s.id)
        for g in system.gfpps_at[node.id]:
            lhs -= g.eta * schedule.get("p", g.id)
        for p in gs.pipelines:
            k = p.key
            if p.from_node == node.id:
                lhs -= schedule.get("qin", k)
                if bi:
                    lhs += schedule.get("qoutr", k)
            if p.to_node == node.id:
                lhs += schedule.get("qout", k)
                if bi:
                    lhs -= schedule.get("qinr", k)
        dem = np.zeros(n)
        for d in system.gas_loads_at[node.id]:
            dem += np.asarray(d.demand)
        res["gas_balance"] = max(res["gas_balance"], float(np.max(np.abs(lhs - dem))) / gas_dem)

    el_dem = sum(sum(d.demand) for d in pw.loads) or 1.0
    for node in pw.nodes:
        lhs = np.zeros(n)
        for g in system.generators_at[node.id]:
            lhs += schedule.get("p", g.id)
        for w in system.wind_at[node.id]:
            lhs += schedule.get("w", w.id)
        for ln in pw.lines:
            if ln.from_node == node.id:
                lhs -= schedule.get("f", ln.key)
            elif ln.to_node == node.id:
                lhs += schedule.get("f", ln.key)
        dem = np.zeros(n)
        for d in system.electric_loads_at[node.id]:
            dem += np.asarray(d.demand)
        res["power_balance"] = max(res["power_balance"], float(np.max(np.abs(lhs - dem))) / el_dem)
    return res
