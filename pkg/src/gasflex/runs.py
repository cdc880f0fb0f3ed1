"""Solve drivers: single-horizon solves and sequential windows with linepack handoff."""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from .formulation import FormulationConfig, LinepackBoundary, Mode, build_model
from .network import IntegratedSystem
from .solver import Backend, ScheduleSolution, SolveOptions, Status, extract_schedule, solve

log = logging.getLogger(__name__)


class SolveFailed(RuntimeError):
    def __init__(self, status: Status, where: str, message: str = ""):
        self.status = status
        self.where = where
        super().__init__(f"{where}: solver status {status.value}" + (f" ({message})" if message else ""))


def solve_system(
    system: IntegratedSystem,
    mode: Mode,
    config: FormulationConfig | None = None,
    options: SolveOptions | None = None,
    backend: Backend | str | None = None,
    boundary: LinepackBoundary | None = None,
    where: str = "horizon",
) -> ScheduleSolution:
    art = build_model(system, mode, config, boundary)
    raw = solve(art.model, options, backend)
    if not raw.status.has_values:
        raise SolveFailed(raw.status, where, raw.message)
    return extract_schedule(art, raw, system)


def windows(hours: int, splits: Sequence[int]) -> list[tuple[int, int]]:
    """0-based ``[start, stop)`` windows; ``splits`` are 1-based first hours of later windows."""
    splits = list(splits)
    if any(not 1 < s < hours for s in splits) or any(b <= a for a, b in zip(splits, splits[1:])):
        raise ValueError(f"split points must be strictly increasing and inside (1, {hours}), got {splits}")
    starts = [0] + [s - 1 for s in splits]
    stops = starts[1:] + [hours]
    return list(zip(starts, stops))


def solve_split(
    system: IntegratedSystem,
    mode: Mode,
    splits: Sequence[int],
    config: FormulationConfig | None = None,
    options: SolveOptions | None = None,
    backend: Backend | str | None = None,
) -> ScheduleSolution:
    """Solve consecutive windows, seeding each with the previous window's final linepack.

    Only the last window keeps the end-of-horizon floor at the original
    initial linepack. Returns the stitched schedule over the full horizon.
    """
    if not splits:
        return solve_system(system, mode, config, options, backend)
    original = LinepackBoundary.from_system(system)
    initial = dict(original.initial)
    parts = []
    spans = windows(system.hours, splits)
    for w, (start, stop) in enumerate(spans):
        sub = system.window(start, stop)
        last = w == len(spans) - 1
        boundary = LinepackBoundary(initial=dict(initial), terminal_floor=original.terminal_floor if last else None)
        label = f"window {w + 1} (hours {sub.first_hour}-{sub.first_hour + sub.hours - 1})"
        sched = solve_system(sub, mode, config, options, backend, boundary, where=label)
        log.info("%s solved: objective %.6g", label, sched.objective)
        parts.append(sched)
        initial = {k: float(v[-1]) for k, v in sched.values["h"].items()}
    return stitch(parts, system, original.initial)


def stitch(parts: Sequence[ScheduleSolution], system: IntegratedSystem, initial_linepack: dict[str, float]) -> ScheduleSolution:
    values: dict[str, dict[str, np.ndarray]] = {}
    for sym, table in parts[0].values.items():
        values[sym] = {k: np.concatenate([p.values[sym][k] for p in parts]) for k in table}
    status = Status.OPTIMAL.value if all(p.status == Status.OPTIMAL.value for p in parts) else Status.FEASIBLE_LIMIT.value
    return ScheduleSolution(
        mode=parts[0].mode,
        hours=[t for p in parts for t in p.hours],
        objective=float(sum(p.objective for p in parts)),
        status=status,
        values=values,
        system=system.fingerprint(),
        initial_linepack=dict(initial_linepack),
        stats={
            "windows": [
                {"hours": [p.hours[0], p.hours[-1]], "objective": p.objective, **p.stats} for p in parts
            ]
        },
        violations=[v for p in parts for v in p.violations],
    )
