"""Solver-agnostic representation of linear and mixed-integer linear programs.

Constraints are kept row-wise exactly as the formulation code emits them;
matrix assembly happens only when a backend asks for it (:meth:`OptModel.to_arrays`)
or when the model is written out as a free-format MPS document.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np
from scipy import sparse

VarKind = Literal["continuous", "binary"]
Sense = Literal["<=", "=", ">="]

INF = math.inf
_SENSES = ("<=", "=", ">=")
_MPS_SENSE = {"<=": "L", "=": "E", ">=": "G"}
MPS_INF = "-1e30"
_NAME_RE = re.compile(r"^[^\s$*][^\s]*$")


class ModelError(ValueError):
    """Raised when a variable or constraint would break the model invariants."""


@dataclass
class VariableSpec:
    name: str = ""
    lower: float = 0.0
    upper: float = INF
    kind: VarKind = "continuous"

    def check(self) -> None:
        if self.kind not in ("continuous", "binary"):
            raise ModelError(f"unknown variable kind {self.kind!r}")
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise ModelError(f"inconsistent bounds for {self.name!r}: NaN bound")
        if self.lower > self.upper:
            raise ModelError(
                f"inconsistent bounds for {self.name!r}: lower={self.lower} > upper={self.upper}"
            )
        if self.kind == "binary" and (self.lower < 0.0 or self.upper > 1.0):
            raise ModelError(f"binary variable {self.name!r} has bounds outside [0, 1]")


@dataclass
class LinearConstraint:
    terms: list[tuple[int, float]]
    sense: Sense
    rhs: float
    name: str = ""


@dataclass
class OptModel:
    """A minimization problem: variables, row-wise linear constraints, linear objective."""

    name: str = "gasflex"
    variables: list[VariableSpec] = field(default_factory=list)
    constraints: list[LinearConstraint] = field(default_factory=list)
    objective: list[tuple[int, float]] = field(default_factory=list)

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    @property
    def num_binaries(self) -> int:
        return sum(1 for v in self.variables if v.kind == "binary")

    def add_variable(self, spec: VariableSpec) -> int:
        spec.check()
        self.variables.append(spec)
        return len(self.variables) - 1

    def var(
        self, name: str, lower: float = 0.0, upper: float = INF, kind: VarKind = "continuous"
    ) -> int:
        return self.add_variable(VariableSpec(name=name, lower=lower, upper=upper, kind=kind))

    def _check_terms(self, terms: Sequence[tuple[int, float]], what: str) -> None:
        seen = set()
        n = len(self.variables)
        for vid, coef in terms:
            if not isinstance(vid, (int, np.integer)) or not 0 <= vid < n:
                raise ModelError(f"{what}: unknown variable id {vid!r}")
            if vid in seen:
                raise ModelError(f"{what}: duplicate term for variable id {vid}")
            if not math.isfinite(coef):
                raise ModelError(f"{what}: non-finite coefficient {coef!r} on variable id {vid}")
            seen.add(vid)

    def add_constraint(self, c: LinearConstraint) -> int:
        if c.sense not in _SENSES:
            raise ModelError(f"constraint {c.name!r}: unknown sense {c.sense!r}")
        if not math.isfinite(c.rhs):
            raise ModelError(f"constraint {c.name!r}: non-finite rhs {c.rhs!r}")
        self._check_terms(c.terms, f"constraint {c.name!r}")
        self.constraints.append(c)
        return len(self.constraints) - 1

    def add(self, terms: Iterable[tuple[int, float]], sense: Sense, rhs: float, name: str = "") -> int:
        return self.add_constraint(LinearConstraint(list(terms), sense, float(rhs), name))

    def set_objective(self, terms: Iterable[tuple[int, float]]) -> None:
        terms = list(terms)
        self._check_terms(terms, "objective")
        self.objective = terms

    def copy(self) -> "OptModel":
        return OptModel(
            name=self.name,
            variables=[VariableSpec(v.name, v.lower, v.upper, v.kind) for v in self.variables],
            constraints=[
                LinearConstraint(list(c.terms), c.sense, c.rhs, c.name) for c in self.constraints
            ],
            objective=list(self.objective),
        )

    def fix(self, values: dict[int, float]) -> "OptModel":
        """Copy of the model with the given variables pinned to fixed values."""
        m = self.copy()
        for vid, val in values.items():
            spec = m.variables[vid]
            spec.lower = spec.upper = float(val)
            spec.check()
        return m

    def variable_names(self) -> list[str]:
        """Names as exported; unnamed variables get ``x<id>``."""
        return [v.name or f"x{i}" for i, v in enumerate(self.variables)]

    def constraint_names(self) -> list[str]:
        return [c.name or f"c{i}" for i, c in enumerate(self.constraints)]

    def to_arrays(self):
        """Assemble ``(c, A, row_lower, row_upper, lb, ub, integrality)`` as numpy/scipy objects."""
        n = len(self.variables)
        cost = np.zeros(n)
        for vid, coef in self.objective:
            cost[vid] += coef
        rows, cols, data = [], [], []
        lo = np.empty(len(self.constraints))
        hi = np.empty(len(self.constraints))
        for r, con in enumerate(self.constraints):
            for vid, coef in con.terms:
                rows.append(r)
                cols.append(vid)
                data.append(coef)
            lo[r] = con.rhs if con.sense in ("=", ">=") else -INF
            hi[r] = con.rhs if con.sense in ("=", "<=") else INF
        a = sparse.csr_array((data, (rows, cols)), shape=(len(self.constraints), n))
        lb = np.array([v.lower for v in self.variables], dtype=float)
        ub = np.array([v.upper for v in self.variables], dtype=float)
        integrality = np.array([1 if v.kind == "binary" else 0 for v in self.variables])
        return cost, a, lo, hi, lb, ub, integrality


def _fmt(x: float) -> str:
    return repr(float(x))


def export_mps(model: OptModel) -> str:
    """Write the model as a free-format MPS document (minimization).

    Variable names are preserved; names containing whitespace cannot be
    represented and raise :class:`ModelError`.
    """
    var_names = model.variable_names()
    con_names = model.constraint_names()
    unnamed = sum(1 for v in model.variables if not v.name)
    if unnamed:
        warnings.warn(f"{unnamed} unnamed variable(s) exported with synthesized names", stacklevel=2)
    for nm in (*var_names, *con_names):
        if not _NAME_RE.match(nm):
            raise ModelError(f"name {nm!r} is not representable in MPS")
    if len(set(var_names)) != len(var_names):
        raise ModelError("duplicate variable names")
    if len(set(con_names)) != len(con_names):
        raise ModelError("duplicate constraint names")

    columns: list[list[tuple[str, float]]] = [[] for _ in model.variables]
    for vid, coef in model.objective:
        columns[vid].append(("OBJ", coef))
    for name, con in zip(con_names, model.constraints):
        for vid, coef in con.terms:
            columns[vid].append((name, coef))

    out = [f"NAME {model.name}", "ROWS", " N OBJ"]
    out += [f" {_MPS_SENSE[c.sense]} {name}" for name, c in zip(con_names, model.constraints)]
    out.append("COLUMNS")
    in_int = False
    marker = 0
    for vid, (name, spec) in enumerate(zip(var_names, model.variables)):
        is_int = spec.kind == "binary"
        if is_int != in_int:
            out.append(f" MARKER{marker} 'MARKER' '{'INTORG' if is_int else 'INTEND'}'")
            marker += 1
            in_int = is_int
        entries = columns[vid] or [("OBJ", 0.0)]
        out += [f" {name} {row} {_fmt(coef)}" for row, coef in entries]
    if in_int:
        out.append(f" MARKER{marker} 'MARKER' 'INTEND'")
    out.append("RHS")
    out += [f" RHS {name} {_fmt(c.rhs)}" for name, c in zip(con_names, model.constraints) if c.rhs != 0.0]
    out.append("BOUNDS")
    for name, spec in zip(var_names, model.variables):
        lo, up = spec.lower, spec.upper
        if lo == up:
            out.append(f" FX BND {name} {_fmt(lo)}")
            continue
        # CBC's free-format reader rejects value-less FR/MI lines; 1e30 is infinite for CBC and HiGHS
        out.append(f" LO BND {name} {_fmt(lo) if lo != -INF else MPS_INF}")
        if up != INF:
            out.append(f" UP BND {name} {_fmt(up)}")
        elif spec.kind == "binary":
            out.append(f" UP BND {name} 1.0")
    out.append("ENDATA")
    return "\n".join(out) + "\n"
