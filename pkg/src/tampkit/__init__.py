"""Pick-and-place task-and-motion planning as mixed-integer linear programs.

The toolkit builds three related MILP formulations of a box-world
pick-and-place problem (a baseline encoding, a reduced-binary variant with
linking hard constraints, and that variant plus a soft route penalty),
solves them with an embedded LP / branch-and-bound engine, extracts
trajectories and symbolic action sequences, and verifies the result
independently of the solver.
"""

import importlib

__version__ = "0.1.0"

_EXPORTS = {
    "Aabb": "tampkit.geometry",
    "Region": "tampkit.geometry",
    "RegionSet": "tampkit.geometry",
    "Vec3": "tampkit.geometry",
    "LinExpr": "tampkit.milp_core",
    "MilpModel": "tampkit.milp_core",
    "VarKind": "tampkit.milp_core",
    "Params": "tampkit.tamp_model",
    "Scenario": "tampkit.tamp_model",
    "build_model": "tampkit.tamp_model",
    "SolveOptions": "tampkit.solver",
    "branch_and_bound": "tampkit.solver",
    "presolve": "tampkit.solver",
    "solve_lp": "tampkit.solver",
    "Plan": "tampkit.plan",
    "extract_plan": "tampkit.plan",
    "verify_plan": "tampkit.plan",
}

__all__ = sorted(_EXPORTS) + ["__version__"]


def __getattr__(name: str):
    module = _EXPORTS.get(name)
    if module is None:
        raise AttributeError(f"module 'tampkit' has no attribute {name!r}")
    return getattr(importlib.import_module(module), name)
