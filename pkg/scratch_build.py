"""Scratch: build a desk instance, inspect sizes, time LP + B&B."""
import time

from tampkit.geometry import Aabb, Vec3
from tampkit.tamp_model import (Delivery, EndEffector, Params, Scenario,
                                build_model)
from tampkit.solver import SolveOptions, branch_and_bound, solve_lp
from tampkit.solver.rows import from_model
from tampkit.solver.presolve import presolve_rows

ws = Aabb(Vec3(0.45, 0.25, 0.25), Vec3(0.9, 0.5, 0.5))
scenario = Scenario(
    workspace=ws,
    end_effectors=(EndEffector(width=Vec3(0.08, 0.08, 0.10),
                               initial=Vec3(0.45, 0.25, 0.40),
                               speed_limit=Vec3(0.40, 0.20, 0.20),
                               approach_margin=Vec3(0.0, 0.0, 0.03)),),
    deliveries=(Delivery(width=Vec3(0.06, 0.06, 0.06),
                         initial=Vec3(0.20, 0.25, 0.13),
                         target=Vec3(0.70, 0.25, 0.13)),),
    obstacles=(Aabb(Vec3(0.45, 0.25, 0.20), Vec3(0.10, 0.24, 0.20)),),
)

for variant in ("baseline", "hard", "hard_soft"):
    params = Params(dt=0.5, n_steps=10, variant=variant)
    t0 = time.monotonic()
    model, lay, report = build_model(scenario, params)
    t_build = time.monotonic() - t0
    form = from_model(model)
    red, pstats = presolve_rows(form)
    print(f"[{variant}] build {t_build:.2f}s vars={len(model.variables)} "
          f"bin={report.binary_count} rows={report.constraint_count} "
          f"presolved_bin={pstats.binaries_remaining} "
          f"rows_after={len(red.rows)} passes={pstats.passes}")
    t0 = time.monotonic()
    res = solve_lp(model)
    t_lp = time.monotonic() - t0
    print(f"  root LP: {res.status} obj={res.objective} in {t_lp:.2f}s")
    t0 = time.monotonic()
    sol, stats = branch_and_bound(model, SolveOptions(time_limit=240))
    t_bb = time.monotonic() - t0
    print(f"  B&B: {sol.status} obj={sol.objective} nodes={stats.nodes} "
          f"gap={stats.gap:.2e} in {t_bb:.1f}s")
