"""Branch-and-bound over LP relaxations with warm-started node solves.

Tree search recursively fixes one binary variable per branch, using the
fractional relaxation value of the parent node to pick the variable.  A
node stops expanding on any of four conditions: its relaxation is integer
feasible, its relaxation is infeasible, its relaxation bound is no better
than the incumbent, or the global gap between incumbent and best open
bound has dropped below the tolerance.  There is no cut generation and no
primal heuristic; the relaxations themselves carry the search.
"""

from __future__ import annotations

import heapq
import math
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from tampkit.milp_core import MilpModel
from tampkit.solver import rows as rowform
from tampkit.solver.lp import (BIG_BOUND, DualSimplex, FEAS_TOL, LpData,
                               LpError, LpTimeout)
from tampkit.solver.presolve import PresolveStats, presolve_rows

__all__ = [
    "SolveOptions",
    "LpResult",
    "Solution",
    "SolveStats",
    "solve_lp",
    "presolve",
    "branch_and_bound",
    "SolverError",
]

INTEGRALITY_TOL = 1e-6


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolveOptions:
    """Knobs for the tree search; defaults favor exact, reproducible runs."""

    gap_tol: float = 1e-6
    time_limit: float | None = None
    branch_rule: str = "most_fractional"      # or "lowest_index"
    node_selection: str = "best_bound"        # or "depth_first"
    deterministic: bool = True
    workers: int = 1

    def __post_init__(self) -> None:
        if self.gap_tol < 0:
            raise ValueError("gap_tol must be nonnegative")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if self.branch_rule not in ("most_fractional", "lowest_index"):
            raise ValueError(f"unknown branch rule {self.branch_rule!r}")
        if self.node_selection not in ("best_bound", "depth_first"):
            raise ValueError(f"unknown node selection {self.node_selection!r}")

    def effective_workers(self) -> int:
        return 1 if self.deterministic else max(1, self.workers)


@dataclass
class LpResult:
    status: str                    # optimal | infeasible | unbounded
    values: list[float] | None
    objective: float | None


@dataclass
class Solution:
    status: str                    # optimal | feasible | infeasible | timeout
    values: list[float] | None
    objective: float | None
    gap: float

    @property
    def usable(self) -> bool:
        return self.status in ("optimal", "feasible")


@dataclass
class SolveStats:
    nodes: int = 0
    lp_solves: int = 0
    presolved_binaries: int = 0
    wall_time_s: float = 0.0
    gap: float = math.inf
    status: str = "unknown"

    def as_record(self) -> dict:
        return {
            "nodes": self.nodes,
            "lp_solves": self.lp_solves,
            "presolved_binaries": self.presolved_binaries,
            "wall_time_s": self.wall_time_s,
            "gap": self.gap,
            "status": self.status,
        }


# ----------------------------------------------------------------------
# public LP interface


def solve_lp(model: MilpModel, deterministic: bool = True, kernel=None) -> LpResult:
    """Solve the continuous relaxation of ``model`` (binaries on [0, 1])."""
    form = rowform.from_model(model)
    data = LpData.from_rowform(form)
    engine = DualSimplex(data, kernel=kernel, deterministic=deterministic)
    try:
        status = engine.solve()
    except LpError as exc:
        raise SolverError(f"LP solve failed: {exc}") from exc
    if status != "optimal":
        return LpResult(status="infeasible", values=None, objective=None)
    if engine.hit_artificial_bound():
        return LpResult(status="unbounded", values=None, objective=None)
    x = engine.x_structural()
    return LpResult(status="optimal", values=[float(v) for v in x],
                    objective=engine.objective())


def presolve(model: MilpModel) -> tuple[MilpModel, dict[int, float], PresolveStats]:
    """Public presolve: reduced model, variable fixings, statistics."""
    form = rowform.from_model(model)
    reduced, stats = presolve_rows(form)
    return rowform.to_model(reduced, model), dict(reduced.fixed), stats


# ----------------------------------------------------------------------
# branch and bound


@dataclass(order=True)
class _Node:
    sort_key: tuple = field(compare=True)
    bound: float = field(compare=False, default=-math.inf)
    depth: int = field(compare=False, default=0)
    fixings: dict[int, float] = field(compare=False, default_factory=dict)
    basis: np.ndarray | None = field(compare=False, default=None)
    vstat: np.ndarray | None = field(compare=False, default=None)


class _Search:
    """Shared search state; thread safe when used by several workers."""

    def __init__(self, base: rowform.RowForm, data: LpData, options: SolveOptions,
                 original: MilpModel):
        self.base = base
        self.data = data
        self.options = options
        self.original = original
        self.branchable = np.nonzero(base.binary & (base.col_lb < base.col_ub))[0]
        self.lock = threading.Lock()
        self.open_heap: list[_Node] = []
        self.open_stack: list[_Node] = []
        self.seq = 0
        self.active = 0
        self.active_bounds: dict[int, float] = {}
        self.incumbent_x: np.ndarray | None = None
        self.incumbent_obj = math.inf
        self.nodes = 0
        self.lp_solves = 0
        self.stop = False
        self.timed_out = False
        self.cv = threading.Condition(self.lock)

    # ---- node pool ---------------------------------------------------

    def push(self, node: _Node) -> None:
        with self.cv:
            if self.options.node_selection == "best_bound":
                heapq.heappush(self.open_heap, node)
            else:
                self.open_stack.append(node)
            self.cv.notify()

    def pop(self) -> _Node | None:
        """Next node to expand, or None when the search is finished."""
        with self.cv:
            while True:
                if self.stop:
                    return None
                node = self._pop_pruned_locked()
                if node is not None:
                    self.active += 1
                    self.active_bounds[id(node)] = node.bound
                    return node
                if self.active == 0:
                    return None
                self.cv.wait(timeout=0.05)

    def _pop_pruned_locked(self) -> _Node | None:
        pool = self.open_heap if self.options.node_selection == "best_bound" \
            else self.open_stack
        while pool:
            node = heapq.heappop(self.open_heap) \
                if self.options.node_selection == "best_bound" else pool.pop()
            if node.bound < self.cutoff():
                return node
        return None

    def node_done(self, node: _Node) -> None:
        with self.cv:
            self.active -= 1
            self.active_bounds.pop(id(node), None)
            self.cv.notify_all()

    def cutoff(self) -> float:
        """Objective value at or above which a node cannot improve."""
        if self.incumbent_obj == math.inf:
            return math.inf
        return self.incumbent_obj - 1e-9 * (1.0 + abs(self.incumbent_obj))

    # ---- bounds and gap ----------------------------------------------

    def best_bound(self) -> float:
        with self.lock:
            bounds = [n.bound for n in (self.open_heap or self.open_stack)]
            bounds.extend(self.active_bounds.values())
            if self.incumbent_obj < math.inf:
                bounds.append(self.incumbent_obj)
            return min(bounds) if bounds else math.inf

    def gap(self) -> float:
        if self.incumbent_obj == math.inf:
            return math.inf
        bound = self.best_bound()
        if bound == math.inf:
            return math.inf
        denom = max(abs(self.incumbent_obj), 1e-10)
        return max(0.0, (self.incumbent_obj - bound) / denom)

    def gap_reached(self) -> bool:
        return self.gap() <= self.options.gap_tol

    # ---- incumbent -----------------------------------------------------

    def offer_incumbent(self, x: np.ndarray, obj: float) -> None:
        with self.lock:
            if obj < self.incumbent_obj - 1e-12:
                self._check_against_original(x)
                self.incumbent_obj = obj
                self.incumbent_x = x.copy()

    def _check_against_original(self, x: np.ndarray) -> None:
        """Incumbents must satisfy the unreduced model, not just the node LP."""
        values = self.original_values(x)
        worst = 0.0
        for con in self.original.constraints:
            act = con.expr.const + sum(c * values[v] for v, c in con.expr.terms.items())
            if con.sense == "<=":
                worst = max(worst, act - con.rhs)
            elif con.sense == ">=":
                worst = max(worst, con.rhs - act)
            else:
                worst = max(worst, abs(act - con.rhs))
        if worst > 50 * FEAS_TOL:
            raise SolverError(
                f"incumbent violates original model by {worst:g}")

    def original_values(self, x: np.ndarray) -> list[float]:
        values = [float(v) for v in x]
        for var, val in self.base.fixed.items():
            values[var] = val
        return values


def _fractional_binaries(x: np.ndarray, branchable: np.ndarray,
                         fixings: dict[int, float]) -> list[tuple[int, float]]:
    out = []
    for j in branchable:
        if int(j) in fixings:
            continue
        frac = x[j] - math.floor(x[j])
        if min(frac, 1.0 - frac) > INTEGRALITY_TOL:
            out.append((int(j), float(x[j])))
    return out


def _branch_var(cands: list[tuple[int, float]], rule: str) -> tuple[int, float]:
    if rule == "lowest_index":
        return cands[0]
    best = cands[0]
    best_score = -1.0
    for j, val in cands:
        score = min(val - math.floor(val), math.ceil(val) - val)
        if score > best_score + 1e-12:
            best, best_score = (j, val), score
    return best


def _worker(search: _Search, deadline: float, kernel) -> None:
    engine = DualSimplex(search.data, kernel=kernel,
                         deterministic=search.options.deterministic)
    lb0 = search.base.col_lb
    ub0 = search.base.col_ub
    while True:
        node = search.pop()
        if node is None:
            return
        try:
            if time.monotonic() > deadline:
                raise LpTimeout
            lb = lb0.copy()
            ub = ub0.copy()
            for var, val in node.fixings.items():
                lb[var] = ub[var] = val
            engine.set_column_bounds(lb, ub)
            if node.basis is not None:
                engine.set_basis(node.basis, node.vstat)
            else:
                engine.reset_to_slack_basis()
            status = engine.solve(deadline=deadline)
            with search.lock:
                search.nodes += 1
                search.lp_solves += 1

            if status == "infeasible":
                continue  # bounding: relaxation infeasible
            obj = engine.objective()
            if obj >= search.cutoff():
                continue  # bounding: no better than incumbent
            x = engine.x_structural()
            cands = _fractional_binaries(x, search.branchable, node.fixings)
            if not cands:
                search.offer_incumbent(x, obj)
                if search.gap_reached():
                    with search.cv:
                        search.stop = True
                        search.cv.notify_all()
                continue

            var, val = _branch_var(cands, search.options.branch_rule)
            basis, vstat = engine.snapshot()
            children = []
            for fix_to in ((1.0, 0.0) if val >= 0.5 else (0.0, 1.0)):
                fixings = dict(node.fixings)
                fixings[var] = fix_to
                with search.lock:
                    search.seq += 1
                    seq = search.seq
                children.append(_Node(
                    sort_key=(obj, seq), bound=obj, depth=node.depth + 1,
                    fixings=fixings, basis=basis, vstat=vstat))
            if search.options.node_selection == "depth_first":
                children.reverse()
            for child in children:
                search.push(child)
        except LpTimeout:
            search.push(node)  # keep its bound visible for gap reporting
            with search.cv:
                search.timed_out = True
                search.stop = True
                search.cv.notify_all()
            return
        except LpError as exc:
            raise SolverError(f"node LP failed: {exc}") from exc
        finally:
            search.node_done(node)


def branch_and_bound(model: MilpModel,
                     options: SolveOptions | None = None,
                     kernel=None) -> tuple[Solution, SolveStats]:
    """Solve a MILP; returns the best solution found plus search statistics."""
    options = options or SolveOptions()
    t0 = time.monotonic()
    deadline = t0 + options.time_limit if options.time_limit else math.inf

    form = rowform.from_model(model)
    reduced, pre_stats = presolve_rows(form)
    stats = SolveStats(presolved_binaries=pre_stats.binaries_remaining)

    if pre_stats.infeasible:
        stats.status = "infeasible"
        stats.gap = math.inf
        stats.wall_time_s = time.monotonic() - t0
        return Solution("infeasible", None, None, math.inf), stats

    data = LpData.from_rowform(reduced)
    search = _Search(reduced, data, options, model)
    search.push(_Node(sort_key=(-math.inf, 0), bound=-math.inf))

    n_workers = options.effective_workers()
    if n_workers == 1:
        _worker(search, deadline, kernel)
    else:
        errors: list[BaseException] = []

        def run() -> None:
            try:
                _worker(search, deadline, kernel)
            except BaseException as exc:  # surfaced after join
                errors.append(exc)
                with search.cv:
                    search.stop = True
                    search.cv.notify_all()

        threads = [threading.Thread(target=run, daemon=True)
                   for _ in range(n_workers)]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
        if errors:
            raise errors[0]

    stats.nodes = search.nodes
    stats.lp_solves = search.lp_solves
    stats.wall_time_s = time.monotonic() - t0

    if search.incumbent_x is not None:
        values = search.original_values(search.incumbent_x)
        obj = search.incumbent_obj
        if search.timed_out:
            gap = search.gap()
            status = "feasible"
        else:
            gap = min(search.gap(), options.gap_tol)
            status = "optimal"
        stats.gap = gap
        stats.status = status
        return Solution(status, values, obj, gap), stats

    if search.timed_out:
        stats.status = "timeout"
        stats.gap = math.inf
        return Solution("timeout", None, None, math.inf), stats
    stats.status = "infeasible"
    stats.gap = math.inf
    return Solution("infeasible", None, None, math.inf), stats
