"""NumPy implementation of the simplex pivot kernel.

These four functions are the per-iteration hot spots of the dual simplex:
applying the product-form eta updates on top of the factorized basis, and
the two selection rules.  A compiled twin lives in ``_pivot_cy.pyx``; both
implement the same selection semantics (same tie-breaks, same comparison
order) so either can back the engine.
"""

from __future__ import annotations

import numpy as np

IMPL = "python"

# vstat codes shared with the LP engine
AT_LOWER, AT_UPPER, BASIC, FIXED = 0, 1, 2, 3


def ftran_etas(eta_pos: np.ndarray, eta_w: np.ndarray, k: int, v: np.ndarray) -> None:
    """Apply eta transforms in creation order, in place."""
    for t in range(k):
        p = eta_pos[t]
        w = eta_w[t]
        a = v[p] / w[p]
        if a != 0.0:
            v -= a * w
        v[p] = a


def btran_etas(eta_pos: np.ndarray, eta_w: np.ndarray, k: int, y: np.ndarray) -> None:
    """Apply transposed eta transforms in reverse order, in place."""
    for t in range(k - 1, -1, -1):
        p = eta_pos[t]
        w = eta_w[t]
        y[p] += (y[p] - w @ y) / w[p]


def choose_leaving(x_basic: np.ndarray, lb_basic: np.ndarray, ub_basic: np.ndarray,
                   basis: np.ndarray, tol: float, bland: bool) -> tuple[int, int]:
    """Pick the basic position to leave: largest bound violation.

    Ties go to the smallest variable index; in Bland mode the smallest
    violated variable index wins outright.  Returns ``(-1, 0)`` when the
    basis is primal feasible within ``tol``.
    """
    viol_low = lb_basic - x_basic
    viol_up = x_basic - ub_basic
    viol = np.maximum(viol_low, viol_up)
    vmax = viol.max() if viol.size else 0.0
    if vmax <= tol:
        return -1, 0
    if bland:
        cand = np.nonzero(viol > tol)[0]
    else:
        cand = np.nonzero(viol == vmax)[0]
    p = int(cand[np.argmin(basis[cand])])
    sigma = 1 if viol_up[p] > viol_low[p] else -1
    return p, sigma


def dual_ratio(d: np.ndarray, alpha: np.ndarray, vstat: np.ndarray,
               sigma: int, piv_tol: float, rel_tol: float) -> int:
    """Dual ratio test: entering column index, or -1 (dual unbounded).

    Among columns within the ratio tolerance of the minimum, the one with
    the largest pivot magnitude wins; ties go to the smallest index.
    """
    sa = sigma * alpha
    elig = ((vstat == AT_LOWER) & (sa > piv_tol)) | \
           ((vstat == AT_UPPER) & (sa < -piv_tol))
    idx = np.nonzero(elig)[0]
    if idx.size == 0:
        return -1
    ratios = d[idx] / sa[idx]
    rmin = ratios.min()
    thresh = rmin + rel_tol * (1.0 + abs(rmin))
    pool = idx[ratios <= thresh]
    mag = np.abs(alpha[pool])
    winners = pool[mag == mag.max()]
    return int(winners.min())
