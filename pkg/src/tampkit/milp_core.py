"""Linear model layer: variables, constraints, logic encodings, big-M bounds.

A :class:`MilpModel` is an indexed table of variables plus a list of linear
constraints and a linear minimization objective.  Boolean structure (NOT,
AND, OR over 0/1 variables) is lowered to linear rows whose auxiliary
output variables are continuous on [0, 1]; they take integral values
whenever their operands do, so they never have to be branched on.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

__all__ = [
    "VarId",
    "VarKind",
    "VarSpec",
    "LinExpr",
    "Constraint",
    "MilpModel",
    "ModelError",
]

VarId = int

_INF = math.inf


class ModelError(ValueError):
    """Raised for malformed model construction requests."""


class VarKind(enum.Enum):
    BINARY = "binary"
    UNIT_INTERVAL = "unit_interval"
    CONTINUOUS = "continuous"


@dataclass(frozen=True)
class VarSpec:
    """Kind, bounds and structured name of one decision variable."""

    kind: VarKind
    lb: float
    ub: float
    symbol: str
    indices: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.lb > self.ub:
            raise ModelError(
                f"variable {self.name}: lower bound {self.lb} above upper {self.ub}")
        if self.kind in (VarKind.BINARY, VarKind.UNIT_INTERVAL):
            if self.lb < 0.0 or self.ub > 1.0:
                raise ModelError(f"variable {self.name}: 0/1 kind with bounds "
                                 f"[{self.lb}, {self.ub}]")

    @property
    def name(self) -> str:
        if not self.indices:
            return self.symbol
        return f"{self.symbol}[{','.join(str(i) for i in self.indices)}]"


class LinExpr:
    """Sparse linear expression ``sum(coef * var) + const``.

    Terms are normalized on construction: repeated variables collapse into
    a single coefficient and exact-zero coefficients are dropped.
    """

    __slots__ = ("terms", "const")

    def __init__(self, terms: Iterable[tuple[float, VarId]] = (), const: float = 0.0):
        acc: dict[VarId, float] = {}
        for coef, var in terms:
            if not math.isfinite(coef):
                raise ModelError(f"non-finite coefficient {coef} for var {var}")
            acc[var] = acc.get(var, 0.0) + coef
        self.terms: dict[VarId, float] = {v: c for v, c in acc.items() if c != 0.0}
        if not math.isfinite(const):
            raise ModelError(f"non-finite constant {const}")
        self.const = const

    @classmethod
    def of(cls, var: VarId, coef: float = 1.0) -> "LinExpr":
        return cls([(coef, var)])

    def __add__(self, other: "LinExpr | float") -> "LinExpr":
        if isinstance(other, LinExpr):
            merged = [(c, v) for v, c in self.terms.items()]
            merged += [(c, v) for v, c in other.terms.items()]
            return LinExpr(merged, self.const + other.const)
        return LinExpr([(c, v) for v, c in self.terms.items()], self.const + float(other))

    def __sub__(self, other: "LinExpr | float") -> "LinExpr":
        if isinstance(other, LinExpr):
            return self + (other * -1.0)
        return self + (-float(other))

    def __mul__(self, scale: float) -> "LinExpr":
        return LinExpr([(c * scale, v) for v, c in self.terms.items()], self.const * scale)

    __rmul__ = __mul__

    def items(self) -> list[tuple[VarId, float]]:
        return sorted(self.terms.items())

    def __repr__(self) -> str:
        parts = [f"{c:+g}*x{v}" for v, c in self.items()]
        if self.const or not parts:
            parts.append(f"{self.const:+g}")
        return " ".join(parts)


@dataclass(frozen=True)
class Constraint:
    expr: LinExpr
    sense: str  # "<=", ">=", "=="
    rhs: float
    tag: str

    def __post_init__(self) -> None:
        if self.sense not in ("<=", ">=", "=="):
            raise ModelError(f"bad constraint sense {self.sense!r}")
        if not math.isfinite(self.rhs):
            raise ModelError(f"non-finite rhs in constraint {self.tag!r}")


class MilpModel:
    """Mutable MILP container; minimization sense is fixed."""

    def __init__(self) -> None:
        self.variables: list[VarSpec] = []
        self.constraints: list[Constraint] = []
        self.objective: LinExpr = LinExpr()
        self._aux_count = 0

    # ------------------------------------------------------------------
    # variables and constraints

    def add_var(self, kind: VarKind, lb: float = 0.0, ub: float = 1.0,
                symbol: str = "x", indices: Sequence[int] = ()) -> VarId:
        if kind is VarKind.BINARY or kind is VarKind.UNIT_INTERVAL:
            lb, ub = max(lb, 0.0), min(ub, 1.0)
        spec = VarSpec(kind, float(lb), float(ub), symbol, tuple(indices))
        self.variables.append(spec)
        return len(self.variables) - 1

    def add_binary(self, symbol: str, indices: Sequence[int] = ()) -> VarId:
        return self.add_var(VarKind.BINARY, 0.0, 1.0, symbol, indices)

    def add_unit(self, symbol: str, indices: Sequence[int] = ()) -> VarId:
        return self.add_var(VarKind.UNIT_INTERVAL, 0.0, 1.0, symbol, indices)

    def add_continuous(self, lb: float, ub: float, symbol: str,
                       indices: Sequence[int] = ()) -> VarId:
        return self.add_var(VarKind.CONTINUOUS, lb, ub, symbol, indices)

    def fix_var(self, var: VarId, value: float) -> None:
        spec = self.variables[var]
        if value < spec.lb - 1e-12 or value > spec.ub + 1e-12:
            raise ModelError(f"cannot fix {spec.name} to {value}: outside bounds")
        self.variables[var] = VarSpec(spec.kind, value, value, spec.symbol, spec.indices)

    def add_constraint(self, expr: LinExpr, sense: str, rhs: float, tag: str) -> None:
        self._check_vars(expr)
        self.constraints.append(Constraint(expr, sense, float(rhs), tag))

    def set_objective(self, expr: LinExpr) -> None:
        self._check_vars(expr)
        self.objective = expr

    def add_objective_term(self, expr: LinExpr) -> None:
        self.set_objective(self.objective + expr)

    def _check_vars(self, expr: LinExpr) -> None:
        n = len(self.variables)
        for v in expr.terms:
            if not 0 <= v < n:
                raise ModelError(f"unknown variable id {v}")

    # ------------------------------------------------------------------
    # logic encodings

    def _fresh_unit(self, symbol: str) -> VarId:
        self._aux_count += 1
        return self.add_unit(symbol, (self._aux_count,))

    def _check_logic_operand(self, var: VarId) -> None:
        kind = self.variables[var].kind
        if kind is VarKind.CONTINUOUS:
            raise ModelError(
                f"logic operand {self.variables[var].name} must be a 0/1 variable")

    def encode_not(self, operand: VarId, tag: str = "logic_not") -> VarId:
        """Fresh unit-interval variable constrained to ``1 - operand``."""
        self._check_logic_operand(operand)
        out = self._fresh_unit("not")
        self.add_constraint(LinExpr.of(out) + LinExpr.of(operand), "==", 1.0, tag)
        return out

    def encode_and(self, operands: Sequence[VarId], tag: str = "logic_and") -> VarId:
        out = self._fresh_unit("and")
        self.constrain_and(out, operands, tag)
        return out

    def encode_or(self, operands: Sequence[VarId], tag: str = "logic_or") -> VarId:
        out = self._fresh_unit("or")
        self.constrain_or(out, operands, tag)
        return out

    def constrain_and(self, out: VarId, operands: Sequence[VarId], tag: str) -> None:
        """Bind an existing 0/1 variable to the conjunction of the operands."""
        if not operands:
            raise ModelError("AND of zero operands")
        for op in operands:
            self._check_logic_operand(op)
            self.add_constraint(LinExpr.of(out) - LinExpr.of(op), "<=", 0.0, tag)
        total = LinExpr([(1.0, op) for op in operands])
        self.add_constraint(LinExpr.of(out) - total, ">=", 1.0 - len(operands), tag)

    def constrain_or(self, out: VarId, operands: Sequence[VarId], tag: str) -> None:
        """Bind an existing 0/1 variable to the disjunction of the operands."""
        if not operands:
            raise ModelError("OR of zero operands")
        for op in operands:
            self._check_logic_operand(op)
            self.add_constraint(LinExpr.of(out) - LinExpr.of(op), ">=", 0.0, tag)
        total = LinExpr([(1.0, op) for op in operands])
        self.add_constraint(LinExpr.of(out) - total, "<=", 0.0, tag)

    # ------------------------------------------------------------------
    # interval arithmetic over variable bounds

    def expr_bounds(self, expr: LinExpr) -> tuple[float, float]:
        """Range of ``expr`` over the box defined by the variable bounds."""
        lo = hi = expr.const
        for var, coef in expr.terms.items():
            spec = self.variables[var]
            if not (math.isfinite(spec.lb) and math.isfinite(spec.ub)):
                raise ModelError(f"variable {spec.name} is unbounded")
            if coef >= 0.0:
                lo += coef * spec.lb
                hi += coef * spec.ub
            else:
                lo += coef * spec.ub
                hi += coef * spec.lb
        return lo, hi

    def tightest_big_m(self, expr: LinExpr) -> float:
        """Smallest M with ``|expr| <= M`` over the variable-bound box."""
        lo, hi = self.expr_bounds(expr)
        return max(abs(lo), abs(hi))

    # ------------------------------------------------------------------
    # reporting

    def counts(self) -> dict[str, int]:
        binary = sum(1 for s in self.variables if s.kind is VarKind.BINARY)
        return {
            "binary": binary,
            "continuous": len(self.variables) - binary,
            "constraints": len(self.constraints),
        }

    def constraint_counts_by_tag(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for con in self.constraints:
            out[con.tag] = out.get(con.tag, 0) + 1
        return dict(sorted(out.items()))

    def dump(self) -> str:
        """Stable, human-readable listing of variables and constraints."""
        lines = [f"variables: {len(self.variables)}  "
                 f"constraints: {len(self.constraints)}"]
        for i, spec in enumerate(self.variables):
            lines.append(
                f"v{i:<6} {spec.kind.value:<13} [{spec.lb:g}, {spec.ub:g}]  {spec.name}")
        for i, con in enumerate(self.constraints):
            lines.append(f"c{i:<6} {con.tag:<28} {con.expr!r} {con.sense} {con.rhs:g}")
        lines.append(f"minimize {self.objective!r}")
        return "\n".join(lines)
