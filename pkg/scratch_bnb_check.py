"""Scratch: B&B vs enumerate-binaries + scipy LP oracle."""
import itertools
import numpy as np
from scipy.optimize import linprog

from tampkit.milp_core import LinExpr, MilpModel, VarKind
from tampkit.solver import SolveOptions, branch_and_bound

rng = np.random.default_rng(11)
bad = 0
trials = 60
for trial in range(trials):
    nb = int(rng.integers(1, 7))
    nc = int(rng.integers(0, 5))
    n = nb + nc
    lb = np.concatenate([np.zeros(nb), rng.uniform(-3, 1, nc)])
    ub = np.concatenate([np.ones(nb), lb[nb:] + rng.uniform(0, 5, nc)])
    c = rng.uniform(-3, 3, n)
    model = MilpModel()
    for j in range(nb):
        model.add_binary("b", (j,))
    for j in range(nc):
        model.add_continuous(lb[nb + j], ub[nb + j], "x", (j,))
    x0 = np.concatenate([rng.integers(0, 2, nb).astype(float), rng.uniform(lb[nb:], ub[nb:])])
    m = int(rng.integers(1, 8))
    rows = []
    for _ in range(m):
        row = np.where(rng.random(n) < 0.6, rng.uniform(-2, 2, n), 0.0)
        if not row.any():
            continue
        act = row @ x0
        sense = "<=" if rng.random() < 0.5 else ">="
        slack = rng.uniform(0, 1.5)
        rhs = act + slack if sense == "<=" else act - slack
        expr = LinExpr([(row[j], j) for j in range(n) if row[j]])
        model.add_constraint(expr, sense, rhs, "t")
        rows.append((row, sense, rhs))
    model.set_objective(LinExpr([(c[j], j) for j in range(n)]))

    sol, stats = branch_and_bound(model, SolveOptions())

    # oracle: enumerate binary assignments, LP over the continuous rest
    best = None
    for assign in itertools.product([0.0, 1.0], repeat=nb):
        A_ub, b_ub = [], []
        for row, sense, rhs in rows:
            fixed_part = row[:nb] @ np.array(assign)
            r = row[nb:]
            if sense == "<=":
                A_ub.append(r); b_ub.append(rhs - fixed_part)
            else:
                A_ub.append(-r); b_ub.append(-(rhs - fixed_part))
        if nc == 0:
            ok = all(bv >= -1e-9 for bv in b_ub)
            if ok:
                val = c[:nb] @ np.array(assign)
                best = val if best is None else min(best, val)
            continue
        ref = linprog(c[nb:], A_ub=np.array(A_ub) if A_ub else None,
                      b_ub=np.array(b_ub) if b_ub else None,
                      bounds=list(zip(lb[nb:], ub[nb:])), method="highs")
        if ref.status == 0:
            val = ref.fun + c[:nb] @ np.array(assign)
            best = val if best is None else min(best, val)

    mine = sol.objective if sol.usable else None
    if (best is None) != (mine is None):
        bad += 1
        print(f"trial {trial}: status mismatch mine={sol.status} oracle={best}")
    elif best is not None and abs(best - mine) > 1e-6 * (1 + abs(best)):
        bad += 1
        print(f"trial {trial}: obj mismatch mine={mine:.9f} oracle={best:.9f} nodes={stats.nodes}")
print("bad:", bad, "of", trials)
