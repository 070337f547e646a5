"""Model reductions applied before the tree search.

Three reductions run to a fixed point: substitution of variables pinned by
singleton equality rows, interval bound tightening through one- and
two-term rows, and fixing of binaries whose remaining bound interval
excludes one of the two values.  Rows made redundant by the final bounds
are dropped.  The reduced problem has the same optimal value, and the
original solution is recovered by filling the recorded fixings back in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from tampkit.solver.rows import INF, Row, RowForm

_FEAS_TOL = 1e-9
_MAX_PASSES = 200


@dataclass
class PresolveStats:
    fixed_variables: int = 0
    fixed_binaries: int = 0
    dropped_rows: int = 0
    tightened_bounds: int = 0
    passes: int = 0
    binaries_remaining: int = 0
    infeasible: bool = False
    infeasible_reason: str = ""


class _Infeasible(Exception):
    pass


def presolve_rows(form: RowForm) -> tuple[RowForm, PresolveStats]:
    """Run the reductions on a row form; the input is not modified."""
    work = form.copy()
    stats = PresolveStats()
    lb, ub = work.col_lb, work.col_ub
    binary = work.binary
    fixed = work.fixed

    def fix(var: int, value: float) -> None:
        if value < lb[var] - 1e-7 or value > ub[var] + 1e-7:
            raise _Infeasible(f"variable {var} forced to {value} outside "
                              f"[{lb[var]}, {ub[var]}]")
        value = min(max(value, lb[var]), ub[var])
        if binary[var]:
            value = round(value)
        lb[var] = ub[var] = value
        fixed[var] = value
        stats.fixed_variables += 1
        if binary[var]:
            stats.fixed_binaries += 1

    def tighten(var: int, new_lb: float, new_ub: float) -> bool:
        changed = False
        if binary[var]:
            # integral variable: fractional bounds round inward
            if new_lb > _FEAS_TOL:
                new_lb = 1.0 if new_lb > 1e-7 else new_lb
                new_lb = math.ceil(new_lb - 1e-7)
            if new_ub < 1.0 - _FEAS_TOL:
                new_ub = math.floor(new_ub + 1e-7)
        if new_lb > lb[var] + 1e-9:
            lb[var] = new_lb
            changed = True
            stats.tightened_bounds += 1
        if new_ub < ub[var] - 1e-9:
            ub[var] = new_ub
            changed = True
            stats.tightened_bounds += 1
        if lb[var] > ub[var] + 1e-7:
            raise _Infeasible(f"variable {var} bounds crossed: "
                              f"[{lb[var]}, {ub[var]}]")
        if lb[var] > ub[var]:
            lb[var] = ub[var] = 0.5 * (lb[var] + ub[var])
        if lb[var] == ub[var] and var not in fixed:
            fix(var, lb[var])
        return changed

    def process_row(row: Row) -> tuple[bool, bool]:
        """Returns (changed_bounds, keep_row)."""
        changed = False
        for var in [v for v in row.cols if v in fixed]:
            coef = row.cols.pop(var)
            shift = coef * fixed[var]
            if row.lo > -INF:
                row.lo -= shift
            if row.hi < INF:
                row.hi -= shift

        if not row.cols:
            if row.lo > _FEAS_TOL or row.hi < -_FEAS_TOL:
                raise _Infeasible(f"row {row.tag!r} reduced to "
                                  f"{row.lo} <= 0 <= {row.hi}")
            return changed, False

        if len(row.cols) == 1:
            (var, coef), = row.cols.items()
            if coef > 0:
                new_lb = row.lo / coef if row.lo > -INF else -INF
                new_ub = row.hi / coef if row.hi < INF else INF
            else:
                new_lb = row.hi / coef if row.hi < INF else -INF
                new_ub = row.lo / coef if row.lo > -INF else INF
            changed |= tighten(var, new_lb, new_ub)
            return changed, False

        if len(row.cols) == 2:
            (v1, c1), (v2, c2) = row.cols.items()
            for var, coef, ovar, ocoef in ((v1, c1, v2, c2), (v2, c2, v1, c1)):
                if ocoef >= 0:
                    o_min = ocoef * lb[ovar]
                    o_max = ocoef * ub[ovar]
                else:
                    o_min = ocoef * ub[ovar]
                    o_max = ocoef * lb[ovar]
                res_lo = row.lo - o_max if row.lo > -INF else -INF
                res_hi = row.hi - o_min if row.hi < INF else INF
                if coef > 0:
                    changed |= tighten(var,
                                       res_lo / coef if res_lo > -INF else -INF,
                                       res_hi / coef if res_hi < INF else INF)
                else:
                    changed |= tighten(var,
                                       res_hi / coef if res_hi < INF else -INF,
                                       res_lo / coef if res_lo > -INF else INF)
        return changed, True

    def row_redundant(row: Row) -> bool:
        act_lo = act_hi = 0.0
        for var, coef in row.cols.items():
            if coef >= 0:
                act_lo += coef * lb[var]
                act_hi += coef * ub[var]
            else:
                act_lo += coef * ub[var]
                act_hi += coef * lb[var]
        lo_ok = row.lo <= -INF or act_lo >= row.lo - _FEAS_TOL
        hi_ok = row.hi >= INF or act_hi <= row.hi + _FEAS_TOL
        if (row.lo > -INF and act_hi < row.lo - _FEAS_TOL) or \
           (row.hi < INF and act_lo > row.hi + _FEAS_TOL):
            raise _Infeasible(f"row {row.tag!r} unsatisfiable by bounds")
        return lo_ok and hi_ok

    try:
        for var in range(work.n):
            if lb[var] == ub[var] and var not in fixed:
                fix(var, lb[var])

        rows = work.rows
        for _ in range(_MAX_PASSES):
            stats.passes += 1
            any_change = False
            kept: list[Row] = []
            for row in rows:
                changed, keep = process_row(row)
                any_change |= changed
                if keep:
                    kept.append(row)
                else:
                    any_change = True
                    stats.dropped_rows += 1
            rows = kept
            if not any_change:
                break

        final_rows: list[Row] = []
        for row in rows:
            if row_redundant(row):
                stats.dropped_rows += 1
            else:
                final_rows.append(row)
        work.rows = final_rows
    except _Infeasible as exc:
        stats.infeasible = True
        stats.infeasible_reason = str(exc)
        return work, stats

    work.obj_const += sum(work.obj[v] * val for v, val in fixed.items())
    for var in fixed:
        work.obj[var] = 0.0
    stats.binaries_remaining = int(
        (work.binary & (work.col_lb < work.col_ub)).sum())
    return work, stats
