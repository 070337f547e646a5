"""Internal ranged-row form of a model, shared by presolve and the LP engine."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from tampkit.milp_core import Constraint, LinExpr, MilpModel, VarKind

INF = math.inf


@dataclass
class Row:
    """One ranged linear row: ``lo <= sum(coef * var) <= hi``."""

    cols: dict[int, float]
    lo: float
    hi: float
    tag: str


@dataclass
class RowForm:
    """Bounds, rows and objective over the original variable ids."""

    col_lb: np.ndarray
    col_ub: np.ndarray
    binary: np.ndarray            # kind == binary, per column
    rows: list[Row]
    obj: np.ndarray
    obj_const: float
    fixed: dict[int, float] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.col_lb.shape[0]

    def copy(self) -> "RowForm":
        return RowForm(
            col_lb=self.col_lb.copy(),
            col_ub=self.col_ub.copy(),
            binary=self.binary.copy(),
            rows=[Row(dict(r.cols), r.lo, r.hi, r.tag) for r in self.rows],
            obj=self.obj.copy(),
            obj_const=self.obj_const,
            fixed=dict(self.fixed),
        )


def from_model(model: MilpModel) -> RowForm:
    n = len(model.variables)
    lb = np.empty(n)
    ub = np.empty(n)
    binary = np.zeros(n, dtype=bool)
    for i, spec in enumerate(model.variables):
        lb[i], ub[i] = spec.lb, spec.ub
        binary[i] = spec.kind is VarKind.BINARY

    rows: list[Row] = []
    for con in model.constraints:
        if con.sense == "<=":
            lo, hi = -INF, con.rhs
        elif con.sense == ">=":
            lo, hi = con.rhs, INF
        else:
            lo = hi = con.rhs
        rows.append(Row(dict(con.expr.terms), lo - con.expr.const, hi - con.expr.const, con.tag))

    obj = np.zeros(n)
    for var, coef in model.objective.terms.items():
        obj[var] = coef
    return RowForm(lb, ub, binary, rows, obj, model.objective.const)


def to_model(form: RowForm, template: MilpModel) -> MilpModel:
    """Rebuild a MilpModel (same variable ids) from a row form."""
    out = MilpModel()
    for i, spec in enumerate(template.variables):
        out.add_var(spec.kind, form.col_lb[i], form.col_ub[i], spec.symbol, spec.indices)
    for row in form.rows:
        expr = LinExpr([(c, v) for v, c in sorted(row.cols.items())])
        if row.lo == row.hi:
            out.add_constraint(expr, "==", row.lo, row.tag)
        else:
            if row.hi < INF:
                out.add_constraint(expr, "<=", row.hi, row.tag)
            if row.lo > -INF:
                out.add_constraint(expr, ">=", row.lo, row.tag)
    obj_terms = [(c, int(v)) for v, c in enumerate(form.obj) if c != 0.0]
    out.set_objective(LinExpr(obj_terms, form.obj_const))
    return out
