"""Build the unidirectional LP and the bidirectional MILP for an integrated system.

Every gas pipeline ``(m, u)`` is relaxed with tangent planes of the concave
Weymouth flow function ``K * sqrt(pr_m**2 - pr_u**2)`` taken at fixed pressure
expansion points, then tightened so that flow can only run from the higher to
the lower pressure end and vanishes when both end pressures coincide.

Variable names follow ``<symbol>_<entity>_t<hour>`` with pipeline and line
entities written ``<from>_<to>``, e.g. ``pr_m4_t15`` or ``y_m6_m8_t15``.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Literal, Mapping

from .model import INF, OptModel
from .network import IntegratedSystem, Pipeline

log = logging.getLogger(__name__)

Mode = Literal["uni", "bi"]

POWER_SYMBOLS = ("p", "w", "theta", "f")
GAS_SYMBOLS_UNI = ("g", "pr", "q", "qin", "qout", "h")
GAS_SYMBOLS_BI = GAS_SYMBOLS_UNI + ("qp", "qm", "qinr", "qoutr", "y", "phim", "phiu")


class FormulationError(ValueError):
    pass


@dataclass(frozen=True)
class FormulationConfig:
    """Knobs of the formulation.

    ``m_flow``, ``m_pressure`` and ``m_slope`` override the derived big-M
    constants, either for every pipeline (a number) or per pipeline key.
    """

    points: int = 5
    eps_pr: float = 0.1
    tightening: bool = True
    m_flow: float | Mapping[str, float] | None = None
    m_pressure: float | Mapping[str, float] | None = None
    m_slope: float | Mapping[str, float] | None = None

    def __post_init__(self):
        if self.points < 1:
            raise ValueError("expansion point count must be >= 1")
        if not self.eps_pr > 0:
            raise ValueError("eps_pr must be > 0")


@dataclass
class BigMConfig:
    flow: dict[str, float]
    pressure: dict[str, float]
    slope: dict[str, float]

    def __post_init__(self):
        for label, table in (("flow", self.flow), ("pressure", self.pressure), ("slope", self.slope)):
            for key, val in table.items():
                if not (math.isfinite(val) and val > 0):
                    raise ValueError(f"big-M {label} for pipeline {key} must be finite and > 0, got {val}")


@dataclass
class LinepackBoundary:
    """Initial linepack per pipeline and the optional end-of-horizon floor."""

    initial: dict[str, float]
    terminal_floor: dict[str, float] | None

    @classmethod
    def from_system(cls, system: IntegratedSystem) -> "LinepackBoundary":
        h0 = {p.key: p.initial_linepack for p in system.gas.pipelines}
        return cls(initial=h0, terminal_floor=dict(h0))


@dataclass
class FormulationArtifacts:
    model: OptModel
    mode: Mode
    hours: list[int]
    index: dict[str, dict[str, list[int]]] = field(default_factory=dict)
    points: dict[str, list[tuple[float, float]]] = field(default_factory=dict)
    reverse_points: dict[str, list[tuple[float, float]]] = field(default_factory=dict)
    plane_big_m: dict[str, list[float]] = field(default_factory=dict)
    bigm: BigMConfig | None = None
    boundary: LinepackBoundary | None = None
    tightening: bool = True

    def ids(self, symbol: str, key: str) -> list[int]:
        return self.index[symbol][key]

    def add_series(self, symbol: str, key: str, lower: float = 0.0, upper: float = INF, kind="continuous", bounds=None) -> list[int]:
        """Create one variable per hour; ``bounds`` optionally gives per-hour ``(lo, up)``."""
        ids = []
        for i, t in enumerate(self.hours):
            lo, up = bounds[i] if bounds is not None else (lower, upper)
            ids.append(self.model.var(f"{symbol}_{key.replace('-', '_')}_t{t}", lo, up, kind))
        self.index.setdefault(symbol, {})[key] = ids
        return ids


def _merge(*terms: tuple[int, float]) -> list[tuple[int, float]]:
    acc: dict[int, float] = defaultdict(float)
    for vid, coef in terms:
        acc[vid] += coef
    return [(v, c) for v, c in acc.items() if c != 0.0]


# --- Weymouth planes ----------------------------------------------------------


def weymouth_plane_coefficients(k: float, pr_m: float, pr_u: float) -> tuple[float, float]:
    """Coefficients ``(c_m, c_u)`` of the tangent plane ``q <= c_m*pr_m - c_u*pr_u``.

    The plane touches ``K*sqrt(pr_m**2 - pr_u**2)`` along the ray through the
    expansion point and lies above it everywhere else on ``pr_m >= pr_u >= 0``.
    """
    if not k > 0:
        raise ValueError(f"Weymouth constant must be > 0, got {k}")
    if not (pr_m > pr_u >= 0):
        raise ValueError(f"degenerate expansion point ({pr_m}, {pr_u}): need PR_m > PR_u >= 0")
    root = math.sqrt(pr_m * pr_m - pr_u * pr_u)
    return k * pr_m / root, k * pr_u / root


def expansion_points(
    pipeline: Pipeline, count: int, system: IntegratedSystem, reverse: bool = False
) -> list[tuple[float, float]]:
    """Fixed pressure points ``(PR_upstream, PR_downstream)`` for the plane family.

    Points run from the corner (max upstream, min downstream pressure) towards
    the centre of the pressure box, stopping short of the diagonal, so their
    rays through the origin fan out across the admissible cone. Position
    ``i`` sits at fraction ``i/count`` of that segment, which makes the point
    set for ``2n`` a superset of the set for ``n``.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    up_id, down_id = (pipeline.to_node, pipeline.from_node) if reverse else (pipeline.from_node, pipeline.to_node)
    a = system.gas.node(up_id)
    b = system.gas.node(down_id)
    corner = (a.pr_max, max(b.pr_min, 0.0))
    if not corner[0] > corner[1]:
        direction = "reverse" if reverse else "forward"
        raise FormulationError(f"pipeline {pipeline.key} cannot carry {direction} flow")
    mid = ((a.pr_min + a.pr_max) / 2, (b.pr_min + b.pr_max) / 2)
    d0 = corner[0] - corner[1]
    d1 = mid[0] - mid[1]
    s_end = 1.0 if d1 > 0 else d0 / (d0 - d1)
    pts = []
    for i in range(count):
        s = s_end * i / count
        pts.append((corner[0] + s * (mid[0] - corner[0]), corner[1] + s * (mid[1] - corner[1])))
    return pts


def derive_big_m(system: IntegratedSystem, config: FormulationConfig | None = None) -> BigMConfig:
    config = config or FormulationConfig()
    flow, pressure, slope = {}, {}, {}
    for p in system.gas.pipelines:
        pm = system.gas.node(p.from_node).pr_max
        pu = system.gas.node(p.to_node).pr_max
        # K*sqrt(a^2 - b^2) <= K*a in either direction
        flow[p.key] = _override(config.m_flow, p.key, p.weymouth * max(pm, pu))
        pressure[p.key] = _override(config.m_pressure, p.key, max(pm, pu))
        slope[p.key] = _override(config.m_slope, p.key, 10.0 * flow[p.key] / config.eps_pr)
    return BigMConfig(flow, pressure, slope)


def _override(value, key: str, default: float) -> float:
    if value is None:
        return default
    if isinstance(value, Mapping):
        return float(value.get(key, default))
    return float(value)


def _plane_big_m(c_up: float, c_down: float, up_box: tuple[float, float], down_box: tuple[float, float], m_flow: float) -> float:
    # The deactivated plane must admit q = 0 anywhere in the pressure box:
    # c_up*pr_up - c_down*pr_down + M >= 0 at (min upstream, max downstream).
    return max(m_flow, c_down * down_box[1] - c_up * up_box[0])


# --- blocks -------------------------------------------------------------------


def build_objective(system: IntegratedSystem, art: FormulationArtifacts) -> None:
    """Production cost of non-GFPPs plus gas supply cost; GFPPs pay through their gas."""
    terms = []
    for g in system.power.generators:
        if g.gfpp:
            continue
        terms += [(vid, g.cost) for vid in art.ids("p", g.id)]
    for s in system.gas.suppliers:
        terms += [(vid, s.cost) for vid in art.ids("g", s.id)]
    art.model.set_objective(terms)


def build_power_block(system: IntegratedSystem, art: FormulationArtifacts) -> None:
    pw = system.power
    refs = pw.reference_nodes
    if len(refs) != 1:
        raise FormulationError(f"power network needs exactly one reference node, found {len(refs)}")
    m = art.model
    for g in pw.generators:
        art.add_series("p", g.id, 0.0, g.capacity)
    for w in pw.wind:
        art.add_series("w", w.id, bounds=[(0.0, x) for x in w.forecast])
    for n in pw.nodes:
        art.add_series("theta", n.id, -math.pi, math.pi)
    for ln in pw.lines:
        art.add_series("f", ln.key, -ln.capacity, ln.capacity)

    for i, t in enumerate(art.hours):
        for ln in pw.lines:
            f = art.ids("f", ln.key)[i]
            th_n = art.ids("theta", ln.from_node)[i]
            th_r = art.ids("theta", ln.to_node)[i]
            m.add(
                [(f, 1.0), (th_n, -ln.susceptance), (th_r, ln.susceptance)],
                "=",
                0.0,
                f"dcflow_{ln.from_node}_{ln.to_node}_t{t}",
            )
        m.add([(art.ids("theta", refs[0])[i], 1.0)], "=", 0.0, f"refangle_{refs[0]}_t{t}")

        for n in pw.nodes:
            terms = [(art.ids("p", g.id)[i], 1.0) for g in system.generators_at[n.id]]
            terms += [(art.ids("w", w.id)[i], 1.0) for w in system.wind_at[n.id]]
            for ln in pw.lines:
                if ln.from_node == n.id:
                    terms.append((art.ids("f", ln.key)[i], -1.0))
                elif ln.to_node == n.id:
                    terms.append((art.ids("f", ln.key)[i], 1.0))
            demand = sum(d.demand[i] for d in system.electric_loads_at[n.id])
            m.add(_merge(*terms), "=", demand, f"pbal_{n.id}_t{t}")


def build_common_gas_block(system: IntegratedSystem, art: FormulationArtifacts) -> None:
    gs = system.gas
    for s in gs.suppliers:
        art.add_series("g", s.id, 0.0, s.capacity)
    for n in gs.nodes:
        art.add_series("pr", n.id, n.pr_min, n.pr_max)
    for p in gs.pipelines:
        # In the bidirectional model the pressure order of a passive pipeline
        # follows its direction binary, so the ratio bound only applies to
        # compressor pipelines there.
        if art.mode == "bi" and not p.has_compressor:
            continue
        for i, t in enumerate(art.hours):
            m_id = art.ids("pr", p.from_node)[i]
            u_id = art.ids("pr", p.to_node)[i]
            art.model.add([(u_id, 1.0), (m_id, -p.compression)], "<=", 0.0, f"compress_{p.from_node}_{p.to_node}_t{t}")


def _linepack_rows(system, art, p: Pipeline, net_terms_at) -> None:
    """Linepack definition, intertemporal balance, and terminal floor."""
    m = art.model
    h = art.ids("h", p.key)
    tag = f"{p.from_node}_{p.to_node}"
    h0 = art.boundary.initial[p.key]
    for i, t in enumerate(art.hours):
        m.add(
            [(h[i], 1.0), (art.ids("pr", p.from_node)[i], -p.linepack / 2), (art.ids("pr", p.to_node)[i], -p.linepack / 2)],
            "=",
            0.0,
            f"lpdef_{tag}_t{t}",
        )
        terms = [(h[i], 1.0)] + [(vid, -c) for vid, c in net_terms_at(i)]
        if i == 0:
            m.add(terms, "=", h0, f"lpbal_{tag}_t{t}")
        else:
            m.add(terms + [(h[i - 1], -1.0)], "=", 0.0, f"lpbal_{tag}_t{t}")
    floor = art.boundary.terminal_floor
    if floor is not None:
        m.add([(h[-1], 1.0)], ">=", floor[p.key], f"lpend_{tag}")


def _gas_balance(system: IntegratedSystem, art: FormulationArtifacts, withdrawals) -> None:
    """Nodal gas balance; ``withdrawals(p, i)`` yields ``(node, var, coef)`` pipeline offtakes."""
    m = art.model
    per_node: dict[str, list[list[tuple[int, float]]]] = {
        n.id: [[] for _ in art.hours] for n in system.gas.nodes
    }
    for p in system.gas.pipelines:
        for i in range(len(art.hours)):
            for node, vid, coef in withdrawals(p, i):
                per_node[node][i].append((vid, -coef))
    for n in system.gas.nodes:
        for i, t in enumerate(art.hours):
            terms = [(art.ids("g", s.id)[i], 1.0) for s in system.suppliers_at[n.id]]
            terms += [(art.ids("p", g.id)[i], -g.eta) for g in system.gfpps_at[n.id]]
            terms += per_node[n.id][i]
            demand = sum(d.demand[i] for d in system.gas_loads_at[n.id])
            m.add(_merge(*terms), "=", demand, f"gbal_{n.id}_t{t}")


def build_unidirectional_gas_block(
    system: IntegratedSystem, art: FormulationArtifacts, points: Mapping[str, list], bigm: BigMConfig
) -> None:
    m = art.model
    for p in system.gas.pipelines:
        if not p.has_compressor and not points.get(p.key):
            raise FormulationError(f"no expansion points for pipeline {p.key}")
        art.add_series("q", p.key, 0.0, bigm.flow[p.key])
        art.add_series("qin", p.key)
        art.add_series("qout", p.key)
        art.add_series("h", p.key)

    for p in system.gas.pipelines:
        tag = f"{p.from_node}_{p.to_node}"
        q, qin, qout = art.ids("q", p.key), art.ids("qin", p.key), art.ids("qout", p.key)
        prm, pru = art.ids("pr", p.from_node), art.ids("pr", p.to_node)
        for i, t in enumerate(art.hours):
            m.add([(q[i], 1.0), (qin[i], -0.5), (qout[i], -0.5)], "=", 0.0, f"qavg_{tag}_t{t}")
        _linepack_rows(system, art, p, lambda i: [(qin[i], 1.0), (qout[i], -1.0)])

        if p.has_compressor:
            continue
        coefs = [weymouth_plane_coefficients(p.weymouth, a, b) for a, b in points[p.key]]
        art.points[p.key] = list(points[p.key])
        slope = bigm.slope[p.key]
        for i, t in enumerate(art.hours):
            if art.tightening:
                m.add([(prm[i], 1.0), (pru[i], -1.0)], ">=", 0.0, f"order_{tag}_t{t}")
                m.add([(q[i], 1.0), (prm[i], -slope), (pru[i], slope)], "<=", 0.0, f"qslope_{tag}_t{t}")
            for v, (cm, cu) in enumerate(coefs):
                m.add([(q[i], 1.0), (prm[i], -cm), (pru[i], cu)], "<=", 0.0, f"wey_{tag}_v{v}_t{t}")

    def withdrawals(p, i):
        yield p.from_node, art.ids("qin", p.key)[i], 1.0
        yield p.to_node, art.ids("qout", p.key)[i], -1.0

    _gas_balance(system, art, withdrawals)


def build_bidirectional_gas_block(
    system: IntegratedSystem,
    art: FormulationArtifacts,
    points: Mapping[str, list],
    bigm: BigMConfig,
    reverse_points: Mapping[str, list] | None = None,
) -> None:
    m = art.model
    reverse_points = reverse_points or {}
    gs = system.gas
    for p in gs.pipelines:
        if not p.has_compressor and not points.get(p.key):
            raise FormulationError(f"no expansion points for pipeline {p.key}")
        mf = bigm.flow[p.key]
        art.add_series("q", p.key, 0.0 if p.has_compressor else -mf, mf)
        for sym in ("qp", "qm", "qin", "qout", "qinr", "qoutr", "h"):
            art.add_series(sym, p.key)
        can_reverse = p.has_compressor or bool(reverse_points.get(p.key))
        art.add_series("y", p.key, 0.0 if can_reverse else 1.0, 1.0, kind="binary")
        if not can_reverse:
            log.info("pipeline %s admits no reverse flow; direction fixed forward", p.key)
        if art.tightening and not p.has_compressor:
            art.add_series("phim", p.key)
            art.add_series("phiu", p.key)

    for p in gs.pipelines:
        tag = f"{p.from_node}_{p.to_node}"
        k = p.key
        q, qp, qm, y = (art.ids(s, k) for s in ("q", "qp", "qm", "y"))
        qin, qout, qinr, qoutr = (art.ids(s, k) for s in ("qin", "qout", "qinr", "qoutr"))
        prm, pru = art.ids("pr", p.from_node), art.ids("pr", p.to_node)
        mf = bigm.flow[k]
        for i, t in enumerate(art.hours):
            m.add([(q[i], 1.0), (qp[i], -1.0), (qm[i], 1.0)], "=", 0.0, f"qsplit_{tag}_t{t}")
            m.add([(qp[i], 1.0), (y[i], -mf)], "<=", 0.0, f"qpgate_{tag}_t{t}")
            m.add([(qm[i], 1.0), (y[i], mf)], "<=", mf, f"qmgate_{tag}_t{t}")
            m.add([(qp[i], 1.0), (qin[i], -0.5), (qout[i], -0.5)], "=", 0.0, f"qpavg_{tag}_t{t}")
            m.add([(qm[i], 1.0), (qinr[i], -0.5), (qoutr[i], -0.5)], "=", 0.0, f"qmavg_{tag}_t{t}")
            if p.has_compressor:
                m.add([(q[i], 1.0)], ">=", 0.0, f"compdir_{tag}_t{t}")
        _linepack_rows(
            system, art, p,
            lambda i: [(qin[i], 1.0), (qout[i], -1.0), (qinr[i], 1.0), (qoutr[i], -1.0)],
        )

        if p.has_compressor:
            continue

        box_m = (gs.node(p.from_node).pr_min, gs.node(p.from_node).pr_max)
        box_u = (gs.node(p.to_node).pr_min, gs.node(p.to_node).pr_max)
        fwd = [weymouth_plane_coefficients(p.weymouth, a, b) for a, b in points[k]]
        rev = [weymouth_plane_coefficients(p.weymouth, a, b) for a, b in reverse_points.get(k, [])]
        art.points[k] = list(points[k])
        art.reverse_points[k] = list(reverse_points.get(k, []))
        fwd_m = [_plane_big_m(cm, cu, box_m, box_u, mf) for cm, cu in fwd]
        rev_m = [_plane_big_m(cu, cm, box_u, box_m, mf) for cu, cm in rev]
        art.plane_big_m[k] = fwd_m + rev_m

        if art.tightening:
            phim, phiu = art.ids("phim", k), art.ids("phiu", k)
            mp = bigm.pressure[k]
            slope = bigm.slope[k]
        for i, t in enumerate(art.hours):
            if art.tightening:
                # phim = pr_m * y and phiu = pr_u * y, exact for binary y
                m.add([(phim[i], 1.0), (phiu[i], -1.0)], ">=", 0.0, f"orderfwd_{tag}_t{t}")
                m.add(
                    [(pru[i], 1.0), (prm[i], -1.0), (phiu[i], -1.0), (phim[i], 1.0)],
                    ">=", 0.0, f"orderrev_{tag}_t{t}",
                )
                for phi, pr, side in ((phim, prm, "m"), (phiu, pru, "u")):
                    m.add([(phi[i], 1.0), (y[i], -mp)], "<=", 0.0, f"phi{side}up_{tag}_t{t}")
                    m.add([(phi[i], 1.0), (y[i], mp)], ">=", 0.0, f"phi{side}lo_{tag}_t{t}")
                    m.add([(phi[i], 1.0), (pr[i], -1.0), (y[i], mp)], "<=", mp, f"phi{side}prup_{tag}_t{t}")
                    m.add([(phi[i], 1.0), (pr[i], -1.0), (y[i], -mp)], ">=", -mp, f"phi{side}prlo_{tag}_t{t}")
                m.add(
                    [(qp[i], 1.0), (phim[i], -slope), (phiu[i], slope)],
                    "<=", 0.0, f"qpslope_{tag}_t{t}",
                )
                m.add(
                    _merge((qm[i], 1.0), (pru[i], -slope), (prm[i], slope), (phiu[i], slope), (phim[i], -slope)),
                    "<=", 0.0, f"qmslope_{tag}_t{t}",
                )
            for v, ((cm, cu), mv) in enumerate(zip(fwd, fwd_m)):
                m.add(
                    [(qp[i], 1.0), (prm[i], -cm), (pru[i], cu), (y[i], mv)],
                    "<=", mv, f"weyfwd_{tag}_v{v}_t{t}",
                )
            for v, ((cu, cm), mv) in enumerate(zip(rev, rev_m)):
                m.add(
                    [(qm[i], 1.0), (pru[i], -cu), (prm[i], cm), (y[i], -mv)],
                    "<=", 0.0, f"weyrev_{tag}_v{v}_t{t}",
                )

    def withdrawals(p, i):
        k = p.key
        yield p.from_node, art.ids("qin", k)[i], 1.0
        yield p.from_node, art.ids("qoutr", k)[i], -1.0
        yield p.to_node, art.ids("qinr", k)[i], 1.0
        yield p.to_node, art.ids("qout", k)[i], -1.0

    _gas_balance(system, art, withdrawals)


# --- assembly -------------------------------------------------------------------


def build_model(
    system: IntegratedSystem,
    mode: Mode,
    config: FormulationConfig | None = None,
    boundary: LinepackBoundary | None = None,
) -> FormulationArtifacts:
    """Formulate the full scheduling problem for ``mode`` ("uni" or "bi")."""
    if mode not in ("uni", "bi"):
        raise ValueError(f"mode must be 'uni' or 'bi', got {mode!r}")
    config = config or FormulationConfig()
    art = FormulationArtifacts(
        model=OptModel(name=f"{system.name}_{mode}"),
        mode=mode,
        hours=list(system.horizon),
        bigm=derive_big_m(system, config),
        boundary=boundary or LinepackBoundary.from_system(system),
        tightening=config.tightening,
    )
    build_power_block(system, art)
    build_common_gas_block(system, art)
    passive = [p for p in system.gas.pipelines if not p.has_compressor]
    points = {p.key: expansion_points(p, config.points, system) for p in passive}
    if mode == "uni":
        build_unidirectional_gas_block(system, art, points, art.bigm)
    else:
        reverse = {}
        for p in passive:
            try:
                reverse[p.key] = expansion_points(p, config.points, system, reverse=True)
            except FormulationError:
                reverse[p.key] = []
        build_bidirectional_gas_block(system, art, points, art.bigm, reverse)
    build_objective(system, art)
    log.debug(
        "built %s model: %d variables (%d binary), %d constraints",
        mode, art.model.num_variables, art.model.num_binaries, art.model.num_constraints,
    )
    return art
