"""Backends that solve an :class:`OptModel`, and typed extraction of the schedule.

Two backends are provided:

* ``highs`` solves in-process through :func:`scipy.optimize.milp`.
* ``cbc`` writes the model as MPS into a private temporary directory, runs an
  external CBC executable on it and parses the solution file. The executable
  is taken from ``$GASFLEX_SOLVER``, then ``cbc`` on ``PATH``, then the copy
  bundled with the ``pulp`` package.
"""

from __future__ import annotations

import enum
import importlib.util
import json
import logging
import math
import os
import shutil
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Protocol

import numpy as np
from scipy.optimize import Bounds, LinearConstraint as ScipyLinearConstraint, milp

from .formulation import FormulationArtifacts
from .model import OptModel, export_mps
from .network import IntegratedSystem

log = logging.getLogger(__name__)

SOLVER_ENV = "GASFLEX_SOLVER"
BINARY_TOL = 1e-6
BOUND_TOL = 1e-6


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    FEASIBLE_LIMIT = "feasible-limit"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ERROR = "error"

    @property
    def has_values(self) -> bool:
        return self in (Status.OPTIMAL, Status.FEASIBLE_LIMIT)


class BackendUnavailable(RuntimeError):
    """The requested solver cannot be run on this machine."""


class ScheduleInvariantError(ValueError):
    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__(f"{len(violations)} schedule invariant violation(s): " + "; ".join(violations[:5]))


@dataclass(frozen=True)
class SolveOptions:
    mip_gap: float = 1e-6
    time_limit: float = 3600.0
    threads: int | None = None
    seed: int | None = None
    # re-solve the LP with binaries fixed at the incumbent to clean up MIP tolerance residue
    polish: bool = True

    def __post_init__(self):
        if self.mip_gap < 0:
            raise ValueError("mip_gap must be >= 0")
        if not self.time_limit > 0:
            raise ValueError("time_limit must be > 0")


@dataclass
class RawSolution:
    status: Status
    objective: float = math.nan
    values: dict[str, float] | None = None
    wall_time: float = 0.0
    gap: float | None = None
    backend: str = ""
    message: str = ""


class Backend(Protocol):
    name: str

    def solve(self, model: OptModel, options: SolveOptions) -> RawSolution: ...


class HighsBackend:
    """In-process HiGHS via scipy."""

    name = "highs"

    def solve(self, model: OptModel, options: SolveOptions) -> RawSolution:
        c, a, lo, hi, lb, ub, integrality = model.to_arrays()
        constraints = [ScipyLinearConstraint(a, lo, hi)] if model.num_constraints else []
        opts: dict[str, Any] = {"time_limit": options.time_limit, "disp": False}
        if model.num_binaries:
            opts["mip_rel_gap"] = options.mip_gap
        start = time.perf_counter()
        res = milp(c, integrality=integrality, bounds=Bounds(lb, ub), constraints=constraints, options=opts)
        wall = time.perf_counter() - start

        if res.status == 0:
            status = Status.OPTIMAL
        elif res.status == 2:
            status = Status.INFEASIBLE
        elif res.status == 3:
            status = Status.UNBOUNDED
        elif res.status == 1 and res.x is not None:
            status = Status.FEASIBLE_LIMIT
        else:
            status = Status.ERROR
        x, fun = res.x, res.fun
        if status.has_values and model.num_binaries and options.polish:
            x, fun = _polish(c, constraints, lb, ub, integrality, x, fun)
        values = None
        if status.has_values:
            values = dict(zip(model.variable_names(), map(float, x)))
        gap = getattr(res, "mip_gap", None)
        return RawSolution(
            status=status,
            objective=float(fun) if fun is not None and status.has_values else math.nan,
            values=values,
            wall_time=wall,
            gap=None if gap is None or not model.num_binaries else float(gap),
            backend=self.name,
            message=str(res.message),
        )


def _polish(c, constraints, lb, ub, integrality, x, fun):
    """LP over the continuous part with binaries pinned; falls back to the MIP point."""
    fixed = integrality.astype(bool)
    lb, ub = lb.copy(), ub.copy()
    lb[fixed] = ub[fixed] = np.round(x[fixed])
    res = milp(c, bounds=Bounds(lb, ub), constraints=constraints, options={"disp": False})
    if res.status != 0 or res.fun > fun + 1e-9 * max(1.0, abs(fun)):
        log.debug("polish skipped: %s", res.message)
        return x, fun
    return res.x, res.fun


def find_cbc() -> str | None:
    env = os.environ.get(SOLVER_ENV)
    if env:
        return env
    exe = shutil.which("cbc")
    if exe:
        return exe
    spec = importlib.util.find_spec("pulp")
    if spec and spec.submodule_search_locations:
        root = Path(list(spec.submodule_search_locations)[0]) / "solverdir" / "cbc"
        for sub in ("linux/i64", "linux/arm64", "osx/i64", "win/i64"):
            for name in ("cbc", "cbc.exe"):
                cand = root / sub / name
                if cand.is_file() and os.access(cand, os.X_OK):
                    return str(cand)
    return None


_CBC_STATUS = (
    ("Optimal", Status.OPTIMAL),
    ("Infeasible", Status.INFEASIBLE),
    ("Integer infeasible", Status.INFEASIBLE),
    ("Unbounded", Status.UNBOUNDED),
    ("Stopped", Status.FEASIBLE_LIMIT),
)


def parse_cbc_solution(text: str, n_rows: int) -> tuple[Status, float, dict[str, float]]:
    """Parse a CBC ``-printingOptions all`` solution file (rows first, then columns)."""
    lines = text.splitlines()
    if not lines:
        return Status.ERROR, math.nan, {}
    head = lines[0].strip()
    status = Status.ERROR
    for prefix, st in _CBC_STATUS:
        if head.startswith(prefix):
            status = st
            break
    objective = math.nan
    if "objective value" in head:
        try:
            objective = float(head.rsplit("objective value", 1)[1].split()[0])
        except (IndexError, ValueError):
            pass
    values: dict[str, float] = {}
    body = [ln for ln in lines[1:] if ln.strip()]
    for ln in body[n_rows:]:
        parts = ln.replace("**", " ").split()
        if len(parts) >= 3:
            values[parts[1]] = float(parts[2])
    if status == Status.FEASIBLE_LIMIT and not values:
        status = Status.ERROR
    return status, objective, values


class CbcFileBackend:
    """External CBC run on an exported MPS file."""

    name = "cbc"

    def __init__(self, executable: str | None = None):
        self.executable = executable or find_cbc()

    def solve(self, model: OptModel, options: SolveOptions) -> RawSolution:
        if not self.executable or not Path(self.executable).exists():
            raise BackendUnavailable(
                f"CBC executable not found; set ${SOLVER_ENV} or install cbc (e.g. `pip install pulp`)"
            )
        with tempfile.TemporaryDirectory(prefix="gasflex-") as tmp:
            mps = Path(tmp) / "model.mps"
            sol = Path(tmp) / "model.sol"
            mps.write_text(export_mps(model))
            cmd = [self.executable, str(mps), "-ratio", repr(options.mip_gap), "-sec", repr(options.time_limit)]
            if options.threads:
                cmd += ["-threads", str(options.threads)]
            if options.seed is not None:
                cmd += ["-randomSeed", str(options.seed)]
            cmd += ["-printingOptions", "all", "-solve", "-solu", str(sol)]
            start = time.perf_counter()
            try:
                proc = subprocess.run(cmd, capture_output=True, text=True, timeout=options.time_limit + 60)
            except (OSError, subprocess.TimeoutExpired) as exc:
                return RawSolution(Status.ERROR, backend=self.name, message=str(exc))
            wall = time.perf_counter() - start
            if not sol.exists():
                return RawSolution(Status.ERROR, wall_time=wall, backend=self.name, message=proc.stdout[-2000:])
            status, objective, values = parse_cbc_solution(sol.read_text(), model.num_constraints)
        names = model.variable_names()
        if status.has_values:
            full = {n: values.get(n, 0.0) for n in names}
        else:
            full, objective = None, math.nan
        return RawSolution(status, objective, full, wall, None, self.name, "")


BACKENDS = {"highs": HighsBackend, "cbc": CbcFileBackend}


def get_backend(name: str = "highs", **kwargs) -> Backend:
    try:
        cls = BACKENDS[name]
    except KeyError:
        raise BackendUnavailable(f"unknown backend {name!r}; choose from {sorted(BACKENDS)}") from None
    return cls(**kwargs)


def solve(model: OptModel, options: SolveOptions | None = None, backend: Backend | str | None = None) -> RawSolution:
    options = options or SolveOptions()
    if backend is None or isinstance(backend, str):
        backend = get_backend(backend or "highs")
    raw = backend.solve(model, options)
    log.info(
        "%s: %s objective=%.6g in %.2fs (%d vars, %d binaries, %d rows)",
        backend.name, raw.status.value, raw.objective, raw.wall_time,
        model.num_variables, model.num_binaries, model.num_constraints,
    )
    return raw


# --- schedule -----------------------------------------------------------------


@dataclass
class ScheduleSolution:
    """Optimal values of every decision variable, per symbol, entity and hour."""

    mode: str
    hours: list[int]
    objective: float
    status: str
    values: dict[str, dict[str, np.ndarray]]
    system: str = ""
    initial_linepack: dict[str, float] = field(default_factory=dict)
    stats: dict[str, Any] = field(default_factory=dict)
    violations: list[str] = field(default_factory=list)

    def get(self, symbol: str, key: str) -> np.ndarray:
        return self.values[symbol][key]

    def has(self, symbol: str) -> bool:
        return symbol in self.values

    def flow(self, key: str) -> np.ndarray:
        return self.values["q"][key]

    def to_document(self) -> dict[str, Any]:
        return {
            "format_version": 1,
            "system": self.system,
            "mode": self.mode,
            "status": self.status,
            "objective": self.objective,
            "hours": list(self.hours),
            "initial_linepack": dict(self.initial_linepack),
            "stats": dict(self.stats),
            "values": {
                sym: {k: [float(x) for x in arr] for k, arr in table.items()}
                for sym, table in self.values.items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=1, sort_keys=True)

    @classmethod
    def from_document(cls, doc: dict[str, Any]) -> "ScheduleSolution":
        return cls(
            mode=doc["mode"],
            hours=list(doc["hours"]),
            objective=float(doc["objective"]),
            status=doc["status"],
            values={
                sym: {k: np.asarray(v, dtype=float) for k, v in table.items()}
                for sym, table in doc["values"].items()
            },
            system=doc.get("system", ""),
            initial_linepack=dict(doc.get("initial_linepack", {})),
            stats=dict(doc.get("stats", {})),
        )

    @classmethod
    def from_json(cls, text: str) -> "ScheduleSolution":
        return cls.from_document(json.loads(text))


def extract_schedule(
    artifacts: FormulationArtifacts,
    raw: RawSolution,
    system: IntegratedSystem,
    strict: bool = True,
) -> ScheduleSolution:
    """Map solver values back onto symbols and check binaries and bounds.

    Binary values are never rounded: with ``strict`` any value further than
    1e-6 from {0, 1} raises :class:`ScheduleInvariantError`; otherwise the
    problems are recorded in ``violations``.
    """
    if not raw.status.has_values or raw.values is None:
        raise ValueError(f"solution carries no values (status {raw.status.value})")
    model = artifacts.model
    names = model.variable_names()
    values: dict[str, dict[str, np.ndarray]] = {}
    for sym, table in artifacts.index.items():
        values[sym] = {}
        for key, ids in table.items():
            arr = np.empty(len(ids))
            for j, vid in enumerate(ids):
                name = names[vid]
                if name not in raw.values:
                    raise KeyError(f"variable {name} missing from solver output")
                arr[j] = raw.values[name]
            values[sym][key] = arr

    violations = []
    for vid, spec in enumerate(model.variables):
        x = raw.values[names[vid]]
        if spec.kind == "binary" and abs(x - round(x)) > BINARY_TOL:
            violations.append(f"{names[vid]} = {x!r} is not binary")
        if x < spec.lower - BOUND_TOL or x > spec.upper + BOUND_TOL:
            violations.append(f"{names[vid]} = {x!r} outside [{spec.lower}, {spec.upper}]")
    if violations and strict:
        raise ScheduleInvariantError(violations)

    stats = {"backend": raw.backend}
    if raw.gap is not None:
        stats["gap"] = raw.gap
    return ScheduleSolution(
        mode=artifacts.mode,
        hours=list(artifacts.hours),
        objective=raw.objective,
        status=raw.status.value,
        values=values,
        system=system.fingerprint(),
        initial_linepack=dict(artifacts.boundary.initial),
        stats=stats,
        violations=violations,
    )
