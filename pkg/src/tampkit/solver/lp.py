"""Bounded-variable dual simplex over a sparse basis factorization.

The engine solves ``min c'x`` subject to ranged rows ``lo <= Ax <= hi`` and
column bounds ``l <= x <= u``.  Rows get slack columns (``Ax - s = 0`` with
``s`` bounded by the row range), so a basis is any m columns of ``[A, -I]``.
The basis is factorized with SuperLU and updated between refactorizations
with product-form etas; per-iteration vector work is delegated to the
pivot kernel (compiled or NumPy, see :mod:`tampkit.solver.pivot`).

Dual simplex is used throughout: the all-slack starting basis is made dual
feasible by choosing each nonbasic bound from the sign of its reduced
cost, and any basis stays dual feasible when column bounds change, which
is what makes warm starts across branch-and-bound nodes cheap.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from tampkit.solver import _pivot_py
from tampkit.solver.pivot import active as _active_kernel
from tampkit.solver.rows import INF, RowForm

AT_LOWER, AT_UPPER, BASIC, FIXED = 0, 1, 2, 3

BIG_BOUND = 1e9          # stand-in for infinite bounds; flags unboundedness
FEAS_TOL = 1e-7          # primal feasibility on bounds and rows
DUAL_TOL = 1e-7
PIVOT_TOL = 1e-9
RATIO_REL_TOL = 1e-9
ETA_LIMIT = 96
STALL_LIMIT = 2000       # degenerate pivots before switching to Bland's rule


class LpError(RuntimeError):
    pass


class LpTimeout(Exception):
    """Raised when the deadline passes mid-solve; search state stays valid."""


@dataclass
class LpData:
    """Immutable LP problem in column/row array form."""

    a_csc: sp.csc_matrix          # m x n
    at_csr: sp.csr_matrix         # n x m (transpose, for pricing)
    col_lb: np.ndarray            # n, clamped to +-BIG_BOUND
    col_ub: np.ndarray
    row_lb: np.ndarray            # m
    row_ub: np.ndarray
    obj: np.ndarray               # n
    obj_const: float
    clamped: np.ndarray           # n bool, true where a bound was artificial

    @property
    def m(self) -> int:
        return self.a_csc.shape[0]

    @property
    def n(self) -> int:
        return self.a_csc.shape[1]

    @classmethod
    def from_rowform(cls, form: RowForm) -> "LpData":
        n = form.n
        m = len(form.rows)
        data, indices, indptr = [], [], [0]
        row_lb = np.empty(m)
        row_ub = np.empty(m)
        # assemble row-major then convert; rows are short so this is cheap
        coo_r, coo_c, coo_v = [], [], []
        for i, row in enumerate(form.rows):
            for var, coef in sorted(row.cols.items()):
                coo_r.append(i)
                coo_c.append(var)
                coo_v.append(coef)
            row_lb[i] = max(row.lo, -BIG_BOUND)
            row_ub[i] = min(row.hi, BIG_BOUND)
        a = sp.coo_matrix((coo_v, (coo_r, coo_c)), shape=(m, n)).tocsc()
        lb = form.col_lb.astype(float).copy()
        ub = form.col_ub.astype(float).copy()
        clamped = (lb < -BIG_BOUND) | (ub > BIG_BOUND)
        np.clip(lb, -BIG_BOUND, BIG_BOUND, out=lb)
        np.clip(ub, -BIG_BOUND, BIG_BOUND, out=ub)
        return cls(a, a.T.tocsr(), lb, ub, row_lb, row_ub,
                   form.obj.astype(float).copy(), form.obj_const, clamped)


class DualSimplex:
    """Reusable dual simplex state over one :class:`LpData` instance."""

    def __init__(self, data: LpData, kernel=None, deterministic: bool = True):
        self.data = data
        self.kernel = kernel if kernel is not None else _active_kernel
        self.m = data.m
        self.n = data.n
        self.ncols = self.n + self.m
        self.c = np.concatenate([data.obj, np.zeros(self.m)])
        self.lb = np.concatenate([data.col_lb, data.row_lb])
        self.ub = np.concatenate([data.col_ub, data.row_ub])
        self.basis = np.arange(self.n, self.n + self.m, dtype=np.int32)
        self.vstat = np.full(self.ncols, AT_LOWER, dtype=np.int8)
        self.vstat[self.basis] = BASIC
        self.xval = np.zeros(self.ncols)
        self.x_basic = np.zeros(self.m)
        self.lb_basic = np.zeros(self.m)
        self.ub_basic = np.zeros(self.m)
        self.d = np.zeros(self.ncols)
        self._lu = None
        self._eta_pos = np.zeros(ETA_LIMIT, dtype=np.int32)
        self._eta_w = np.zeros((ETA_LIMIT, self.m))
        self._eta_k = 0
        self.iterations = 0
        self.deterministic = deterministic

    # ------------------------------------------------------------------
    # bounds and basis management

    def set_column_bounds(self, lb: np.ndarray, ub: np.ndarray) -> None:
        """Install new structural bounds (slack/row bounds never change)."""
        np.clip(lb, -BIG_BOUND, BIG_BOUND, out=self.lb[: self.n])
        np.clip(ub, -BIG_BOUND, BIG_BOUND, out=self.ub[: self.n])

    def set_basis(self, basis: np.ndarray, vstat: np.ndarray) -> None:
        self.basis = basis.astype(np.int32).copy()
        self.vstat = vstat.astype(np.int8).copy()

    def snapshot(self) -> tuple[np.ndarray, np.ndarray]:
        return self.basis.copy(), self.vstat.copy()

    def reset_to_slack_basis(self) -> None:
        self.basis = np.arange(self.n, self.n + self.m, dtype=np.int32)
        self.vstat = np.full(self.ncols, AT_LOWER, dtype=np.int8)
        self.vstat[self.basis] = BASIC

    # ------------------------------------------------------------------
    # factorization

    def _ftran(self, v: np.ndarray) -> np.ndarray:
        out = self._lu.solve(v) if self._lu is not None else v.copy()
        self.kernel.ftran_etas(self._eta_pos, self._eta_w, self._eta_k, out)
        return out

    def _btran(self, v: np.ndarray) -> np.ndarray:
        out = v.copy()
        self.kernel.btran_etas(self._eta_pos, self._eta_w, self._eta_k, out)
        if self._lu is not None:
            out = self._lu.solve(out, trans="T")
        return out

    def _column(self, j: int) -> np.ndarray:
        col = np.zeros(self.m)
        if j < self.n:
            a = self.data.a_csc
            start, end = a.indptr[j], a.indptr[j + 1]
            col[a.indices[start:end]] = a.data[start:end]
        else:
            col[j - self.n] = -1.0
        return col

    def _build_basis_matrix(self) -> sp.csc_matrix:
        rows_idx: list[np.ndarray] = []
        cols_idx: list[np.ndarray] = []
        vals: list[np.ndarray] = []
        a = self.data.a_csc
        for p, j in enumerate(self.basis):
            if j < self.n:
                start, end = a.indptr[j], a.indptr[j + 1]
                rows_idx.append(a.indices[start:end])
                vals.append(a.data[start:end])
                cols_idx.append(np.full(end - start, p, dtype=np.int32))
            else:
                rows_idx.append(np.array([j - self.n], dtype=np.int32))
                vals.append(np.array([-1.0]))
                cols_idx.append(np.array([p], dtype=np.int32))
        return sp.csc_matrix(
            (np.concatenate(vals), (np.concatenate(rows_idx), np.concatenate(cols_idx))),
            shape=(self.m, self.m))

    def _refactor(self) -> None:
        if self.m:
            try:
                self._lu = splu(self._build_basis_matrix())
            except RuntimeError as exc:
                raise LpError(f"singular basis: {exc}") from exc
        self._eta_k = 0
        self._recompute_duals()
        self._normalize_nonbasic()
        self._recompute_x_basic()

    def _recompute_duals(self) -> None:
        if self.m:
            y = self._btran(self.c[self.basis])
            d = np.empty(self.ncols)
            d[: self.n] = self.c[: self.n] - self.data.at_csr @ y
            d[self.n:] = y
        else:
            d = self.c.copy()
        d[self.basis] = 0.0
        self.d = d

    def _normalize_nonbasic(self) -> None:
        """Put every nonbasic variable on a bound consistent with its dual."""
        vs, lb, ub, d = self.vstat, self.lb, self.ub, self.d
        nonbasic = vs != BASIC
        pinched = nonbasic & (lb == ub)
        vs[pinched] = FIXED
        free = nonbasic & ~pinched
        unfixed = free & (vs == FIXED)
        vs[unfixed & (d >= 0.0)] = AT_LOWER
        vs[unfixed & (d < 0.0)] = AT_UPPER
        vs[free & (vs == AT_LOWER) & (d < -DUAL_TOL)] = AT_UPPER
        vs[free & (vs == AT_UPPER) & (d > DUAL_TOL)] = AT_LOWER
        self.xval[pinched] = lb[pinched]
        at_low = free & (vs == AT_LOWER)
        at_up = free & (vs == AT_UPPER)
        self.xval[at_low] = lb[at_low]
        self.xval[at_up] = ub[at_up]

    def _recompute_x_basic(self) -> None:
        if self.m == 0:
            return
        xs = np.zeros(self.n)
        nb_struct = (self.vstat[: self.n] != BASIC)
        xs[nb_struct] = self.xval[: self.n][nb_struct]
        rhs = self.data.a_csc @ xs
        slack_nb = np.nonzero(self.vstat[self.n:] != BASIC)[0]
        rhs[slack_nb] -= self.xval[self.n + slack_nb]
        self.x_basic = self._ftran(-rhs)
        self.lb_basic = self.lb[self.basis]
        self.ub_basic = self.ub[self.basis]

    # ------------------------------------------------------------------
    # main loop

    def solve(self, deadline: float = math.inf, iter_limit: int | None = None) -> str:
        """Run dual simplex to completion; returns "optimal" or "infeasible"."""
        if np.any(self.lb > self.ub + FEAS_TOL):
            return "infeasible"
        self._refactor()
        if self.m == 0:
            return "optimal"
        if iter_limit is None:
            iter_limit = 200 * (self.m + self.n) + 20000
        bland = False
        stall = 0
        retries = 0
        it = 0
        while True:
            it += 1
            self.iterations += 1
            if it > iter_limit:
                raise LpError(f"simplex iteration limit hit ({iter_limit})")
            if it % 128 == 0 and time.monotonic() > deadline:
                raise LpTimeout

            p, sigma = self.kernel.choose_leaving(
                self.x_basic, self.lb_basic, self.ub_basic, self.basis,
                FEAS_TOL, bland)
            if p < 0:
                return "optimal"

            rho = np.zeros(self.m)
            rho[p] = 1.0
            rho = self._btran(rho)
            alpha = np.empty(self.ncols)
            alpha[: self.n] = self.data.at_csr @ rho
            alpha[self.n:] = -rho

            q = self.kernel.dual_ratio(self.d, alpha, self.vstat, sigma,
                                       PIVOT_TOL, RATIO_REL_TOL)
            if q < 0:
                return "infeasible"

            w = self._ftran(self._column(q))
            wp = w[p]
            aq = alpha[q]
            drift = abs(wp - aq) > 1e-7 * (1.0 + abs(aq))
            if abs(wp) <= PIVOT_TOL or drift:
                if self._eta_k > 0 and retries < 6:
                    retries += 1
                    self._refactor()
                    continue
                if abs(wp) <= PIVOT_TOL:
                    raise LpError(f"pivot too small ({wp:g}) after refactor")
            retries = 0

            leave = int(self.basis[p])
            target = self.ub_basic[p] if sigma > 0 else self.lb_basic[p]
            delta = self.x_basic[p] - target
            theta_p = delta / wp
            theta_d = self.d[q] / aq

            if theta_d != 0.0:
                self.d -= theta_d * alpha
            self.d[q] = 0.0
            self.d[leave] = -theta_d

            self.x_basic -= theta_p * w
            self.x_basic[p] = self.xval[q] + theta_p

            self.vstat[leave] = AT_UPPER if sigma > 0 else AT_LOWER
            self.xval[leave] = target
            self.vstat[q] = BASIC
            self.basis[p] = q
            self.lb_basic[p] = self.lb[q]
            self.ub_basic[p] = self.ub[q]

            improvement = theta_d * delta
            if improvement > 1e-14:
                stall = 0
                bland = False
            else:
                stall += 1
                if stall >= STALL_LIMIT:
                    bland = True

            if self._eta_k >= ETA_LIMIT:
                self._refactor()
            else:
                self._eta_pos[self._eta_k] = p
                self._eta_w[self._eta_k] = w
                self._eta_k += 1

    # ------------------------------------------------------------------
    # solution access

    def x_structural(self) -> np.ndarray:
        x = np.empty(self.ncols)
        x[:] = self.xval
        x[self.basis] = self.x_basic
        return x[: self.n]

    def objective(self) -> float:
        return float(self.data.obj @ self.x_structural() + self.data.obj_const)

    def max_bound_violation(self) -> float:
        if self.m == 0:
            return 0.0
        return float(np.maximum(self.lb_basic - self.x_basic,
                                self.x_basic - self.ub_basic).max(initial=0.0))

    def hit_artificial_bound(self) -> bool:
        if not self.data.clamped.any():
            return False
        x = self.x_structural()[self.data.clamped]
        return bool(np.any(np.abs(x) >= BIG_BOUND * (1.0 - 1e-9)))
