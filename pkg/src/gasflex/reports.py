"""Report files: long-format CSV tables, plot-data series, and a JSON summary.

Every CSV starts with one ``#`` header line carrying the generation time;
the JSON summary keeps its timestamp on the single ``generated_at`` line.
Everything else is a deterministic function of the inputs.
"""

from __future__ import annotations

import csv
import io
import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from . import __version__
from .analysis import (
    ApproxErrorReport,
    ComparisonReport,
    DirectionReport,
    delta_difference_grid,
    linepack_profile,
)
from .network import IntegratedSystem
from .solver import ScheduleSolution

REPORT_VERSION = 1


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _num(x: float) -> str:
    x = float(x)
    return "" if math.isnan(x) else repr(x)


def write_csv(path: Path, header: list[str], rows, title: str) -> None:
    buf = io.StringIO()
    buf.write(f"# gasflex {__version__} {title} v{REPORT_VERSION} generated {_now()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue())


def write_summary(path: Path, summary: dict[str, Any]) -> None:
    doc = {"generated_at": _now(), "format_version": REPORT_VERSION, **summary}
    head = json.dumps({"generated_at": doc.pop("generated_at")})[1:-1]
    body = json.dumps(doc, indent=1, sort_keys=True)
    path.write_text("{\n" + head + ",\n" + body[2:] + "\n")


def schedule_rows(schedule: ScheduleSolution):
    for sym in sorted(schedule.values):
        for key in sorted(schedule.values[sym]):
            for t, v in zip(schedule.hours, schedule.values[sym][key]):
                yield [sym, key, t, _num(v)]


def write_solution(out: Path, schedule: ScheduleSolution) -> None:
    (out / f"solution_{schedule.mode}.json").write_text(schedule.to_json() + "\n")
    write_csv(out / f"schedule_{schedule.mode}.csv", ["symbol", "entity", "hour", "value"],
              schedule_rows(schedule), f"schedule {schedule.mode}")


def delta_rows(err: ApproxErrorReport):
    for k in err.pipelines:
        for t in err.hours:
            e = err.delta[(k, t)]
            yield [k, t, _num(e.value), int(e.defined)]


def direction_rows(d: DirectionReport):
    for e in d.entries:
        yield [e.pipeline, e.hour, _num(e.flow), e.direction, e.pressure_sign, int(e.consistent)]


def run_summary(schedule: ScheduleSolution, err: ApproxErrorReport, dirs: DirectionReport) -> dict[str, Any]:
    return {
        "mode": schedule.mode,
        "status": schedule.status,
        "objective": schedule.objective,
        "xi": err.xi,
        "delta_undefined": err.undefined,
        "direction_consistency": dirs.consistency,
        "inconsistent": [[e.pipeline, e.hour] for e in dirs.inconsistent],
        "direction_changes": [[c.pipeline, c.hour, c.old, c.new] for c in dirs.changes],
    }


def write_run_reports(out: Path, schedule: ScheduleSolution, err: ApproxErrorReport, dirs: DirectionReport) -> dict:
    m = schedule.mode
    write_solution(out, schedule)
    write_csv(out / f"delta_{m}.csv", ["pipeline", "hour", "delta", "defined"], delta_rows(err), f"delta {m}")
    write_csv(
        out / f"directions_{m}.csv",
        ["pipeline", "hour", "flow", "direction", "pressure_sign", "consistent"],
        direction_rows(dirs), f"directions {m}",
    )
    return run_summary(schedule, err, dirs)


def write_comparison(
    out: Path,
    system: IntegratedSystem,
    cmp: ComparisonReport,
    uni: ScheduleSolution,
    bi: ScheduleSolution,
    err_uni: ApproxErrorReport,
    err_bi: ApproxErrorReport,
) -> dict[str, Any]:
    """Plot-data series: flows, linepack, and the Delta difference grid."""
    keys = [p.key for p in system.gas.pipelines]
    write_csv(
        out / "flows.csv", ["pipeline", "hour", "q_uni", "q_bi"],
        ([k, t, _num(uni.get("q", k)[j]), _num(bi.get("q", k)[j])] for k in keys for j, t in enumerate(uni.hours)),
        "flows",
    )
    lp_u, lp_b = linepack_profile(uni, system), linepack_profile(bi, system)
    write_csv(
        out / "linepack.csv",
        ["pipeline", "hour", "h_uni", "h_bi", "charge_uni", "discharge_uni", "charge_bi", "discharge_bi"],
        (
            [k, t, _num(lp_u[k].linepack[j]), _num(lp_b[k].linepack[j]), _num(lp_u[k].charge[j]),
             _num(lp_u[k].discharge[j]), _num(lp_b[k].charge[j]), _num(lp_b[k].discharge[j])]
            for k in keys for j, t in enumerate(uni.hours)
        ),
        "linepack",
    )
    grid = delta_difference_grid(err_uni, err_bi)
    write_csv(
        out / "delta_difference.csv", ["pipeline", *[str(t) for t in err_uni.hours]],
        ([k, *map(_num, row)] for k, row in zip(err_uni.pipelines, grid)),
        "delta difference (uni - bi)",
    )
    gens = [g.id for g in system.power.generators]
    write_csv(
        out / "ramp.csv", ["generator", "hour", "ramp_pct_uni", "ramp_pct_bi"],
        ([g, t, _num(cmp.ramp["uni"][g][j]), _num(cmp.ramp["bi"][g][j])] for g in gens for j, t in enumerate(uni.hours)),
        "ramp utilization",
    )
    return {
        "cost_uni": cmp.cost_uni,
        "cost_bi": cmp.cost_bi,
        "savings_pct": cmp.savings_pct,
        "gfpp_share_pct": cmp.gfpp_share,
        "linepack_totals": {
            mode: {k: {"charge": c, "discharge": d} for k, (c, d) in table.items()}
            for mode, table in cmp.linepack.items()
        },
        "delta_grid_shape": list(grid.shape),
    }
