"""Scratch: random-LP cross-check of the dual simplex against scipy HiGHS."""
import numpy as np
from scipy.optimize import linprog

from tampkit.milp_core import LinExpr, MilpModel, VarKind
from tampkit.solver import solve_lp

rng = np.random.default_rng(7)
bad = 0
for trial in range(300):
    n = rng.integers(1, 9)
    m = rng.integers(0, 11)
    lb = rng.uniform(-5, 2, n)
    ub = lb + rng.uniform(0, 6, n)
    c = rng.uniform(-3, 3, n)
    model = MilpModel()
    for j in range(n):
        model.add_continuous(lb[j], ub[j], "x", (j,))
    x0 = rng.uniform(lb, ub)  # feasible anchor
    A, senses, rhs = [], [], []
    for i in range(m):
        row = np.where(rng.random(n) < 0.5, rng.uniform(-2, 2, n), 0.0)
        if not row.any():
            continue
        act = row @ x0
        kind = rng.integers(0, 3)
        expr = LinExpr([(row[j], j) for j in range(n) if row[j]])
        if kind == 0:
            model.add_constraint(expr, "<=", act + rng.uniform(0, 2), "t")
            A.append((row, "<=", act + 0))
        elif kind == 1:
            model.add_constraint(expr, ">=", act - rng.uniform(0, 2), "t")
        else:
            model.add_constraint(expr, "==", act, "t")
    model.set_objective(LinExpr([(c[j], j) for j in range(n)], rng.uniform(-1, 1)))

    res = solve_lp(model)

    # scipy reference
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for con in model.constraints:
        row = np.zeros(n)
        for v, coef in con.expr.terms.items():
            row[v] = coef
        if con.sense == "<=":
            A_ub.append(row); b_ub.append(con.rhs - con.expr.const)
        elif con.sense == ">=":
            A_ub.append(-row); b_ub.append(-(con.rhs - con.expr.const))
        else:
            A_eq.append(row); b_eq.append(con.rhs - con.expr.const)
    ref = linprog(c, A_ub=np.array(A_ub) if A_ub else None,
                  b_ub=np.array(b_ub) if b_ub else None,
                  A_eq=np.array(A_eq) if A_eq else None,
                  b_eq=np.array(b_eq) if b_eq else None,
                  bounds=list(zip(lb, ub)), method="highs")
    ref_obj = ref.fun + model.objective.const if ref.status == 0 else None
    mine = res.objective if res.status == "optimal" else None
    if (ref_obj is None) != (mine is None):
        bad += 1
        print(f"trial {trial}: status mismatch mine={res.status} scipy={ref.status}")
    elif ref_obj is not None and abs(ref_obj - mine) > 1e-6 * (1 + abs(ref_obj)):
        bad += 1
        print(f"trial {trial}: obj mismatch mine={mine:.9f} scipy={ref_obj:.9f}")
print("bad:", bad, "of 300")
