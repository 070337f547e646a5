"""Pick-and-place planning models over box worlds.

Three MILP variants of the same planning problem are built here:

* ``baseline``: every region-membership state is a binary variable, and
  every moving body (end-effector or delivery) must share a collision-free
  region between consecutive time steps.
* ``hard``: the membership states of deliveries are continuous on [0, 1]
  and linked to the carrying end-effector's memberships while carried; the
  per-delivery shared-region constraints are dropped, which is safe since
  an uncarried delivery does not move.
* ``hard_soft``: the ``hard`` model plus a penalty on the end-effector
  passing through a configured subset of each delivery's side regions,
  which steers the search toward routes over the deliveries.

Time is discrete with a fixed step; the end-effector input is a bounded
velocity.  A grasp interval looks like: the end-effector arrives at the
approach point above the delivery on the first grasped step (the pick),
holds the contact offset while carrying, and is back at the approach point
on the first free step (the place), with the delivery at its target from
that step on.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from tampkit.geometry import (Aabb, GeometryError, Region, RegionSet, Vec3,
                              make_regions, relative_bounds)
from tampkit.milp_core import LinExpr, MilpModel, VarId, VarKind

__all__ = [
    "SCENARIO_SCHEMA",
    "VARIANTS",
    "EndEffector",
    "Delivery",
    "Scenario",
    "Params",
    "ScenarioError",
    "VariableLayout",
    "BuildReport",
    "build_model",
    "weight_w",
    "select_restricted_regions",
    "region_sets",
    "b_on",
    "b_off",
    "load_scenario",
    "save_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
    "params_from_dict",
    "params_to_dict",
]

SCENARIO_SCHEMA = "tamp-scenario/1"
VARIANTS = ("baseline", "hard", "hard_soft")

_MEMBERSHIP_ATOL = 1e-9


class ScenarioError(ValueError):
    pass


# ----------------------------------------------------------------------
# scenario data


@dataclass(frozen=True)
class EndEffector:
    width: Vec3              # m, full extents
    initial: Vec3            # m
    speed_limit: Vec3        # m/s, per axis
    approach_margin: Vec3    # m, extra gap above a delivery at pick/place

    def __post_init__(self) -> None:
        if min(self.speed_limit) < 0 or min(self.approach_margin) < 0:
            raise ScenarioError("end-effector speed limit and margin must be >= 0")


@dataclass(frozen=True)
class Delivery:
    width: Vec3
    initial: Vec3
    target: Vec3


@dataclass(frozen=True)
class Scenario:
    workspace: Aabb
    end_effectors: tuple[EndEffector, ...]
    deliveries: tuple[Delivery, ...]
    obstacles: tuple[Aabb, ...] = ()

    @property
    def n_ee(self) -> int:
        return len(self.end_effectors)

    @property
    def n_dlv(self) -> int:
        return len(self.deliveries)

    @property
    def n_obs(self) -> int:
        return len(self.obstacles)

    def validate(self) -> None:
        if self.n_ee < 1:
            raise ScenarioError("at least one end-effector required")
        if self.n_dlv < 1:
            raise ScenarioError("at least one delivery required")
        ws = self.workspace
        for i, ee in enumerate(self.end_effectors):
            if not ws.contains_box(Aabb(ee.initial, ee.width)):
                raise ScenarioError(f"end-effector {i} starts outside the workspace")
        for k, obs in enumerate(self.obstacles):
            if not ws.contains_box(obs):
                raise ScenarioError(f"obstacle {k} outside the workspace")
        for j, dlv in enumerate(self.deliveries):
            for name, pos in (("initial", dlv.initial), ("target", dlv.target)):
                box = Aabb(pos, dlv.width)
                if not ws.contains_box(box):
                    raise ScenarioError(f"delivery {j} {name} outside the workspace")
                for k, obs in enumerate(self.obstacles):
                    if box.overlaps_open(obs):
                        raise ScenarioError(
                            f"infeasible scenario: delivery {j} {name} position "
                            f"overlaps obstacle {k}")
        for j1 in range(self.n_dlv):
            for j2 in range(j1 + 1, self.n_dlv):
                a, b = self.deliveries[j1], self.deliveries[j2]
                if Aabb(a.initial, a.width).overlaps_open(Aabb(b.initial, b.width)):
                    raise ScenarioError(
                        f"infeasible scenario: deliveries {j1} and {j2} overlap initially")
                if Aabb(a.target, a.width).overlaps_open(Aabb(b.target, b.width)):
                    raise ScenarioError(
                        f"infeasible scenario: targets of deliveries {j1} and {j2} overlap")


@dataclass(frozen=True)
class Params:
    """Time discretization, variant choice and weights for one build."""

    dt: float                              # s
    n_steps: int
    alpha: float = 1.0
    variant: str = "baseline"
    restricted_faces: tuple[str, ...] | None = None   # e.g. ("z-", "y-", "y+")

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ScenarioError("dt must be positive")
        if self.n_steps < 1:
            raise ScenarioError("n_steps must be at least 1")
        if self.alpha <= 0:
            raise ScenarioError("alpha must be positive")
        if self.variant not in VARIANTS:
            raise ScenarioError(f"unknown variant {self.variant!r}")


# ----------------------------------------------------------------------
# derived geometry


def b_on(scenario: Scenario, i: int, j: int) -> Vec3:
    """Contact offset from delivery center to end-effector center while carried."""
    ee = scenario.end_effectors[i]
    dlv = scenario.deliveries[j]
    return Vec3(0.0, 0.0, 0.5 * (ee.width.z + dlv.width.z))


def b_off(scenario: Scenario, i: int, j: int) -> Vec3:
    """Approach offset at pick and place: contact plus the safety margin."""
    return b_on(scenario, i, j) + scenario.end_effectors[i].approach_margin


RegionKey = tuple[str, int, int]


def region_sets(scenario: Scenario) -> dict[RegionKey, RegionSet]:
    """All (owner, mover) collision-free region sets the models refer to.

    Keys: ``("ee_obs", i, k)``, ``("ee_dlv", i, j)``, ``("dlv_obs", j, k)``,
    ``("dlv_dlv", j1, j2)``.  Delivery-owned sets are built around the
    delivery's initial box inside bounds spanning the workspace relative to
    it, and are evaluated on mover position minus owner displacement.
    """
    ws = scenario.workspace
    out: dict[RegionKey, RegionSet] = {}
    for i, ee in enumerate(scenario.end_effectors):
        for k, obs in enumerate(scenario.obstacles):
            out[("ee_obs", i, k)] = make_regions(
                obs, ws, ee.width, owner_id=("obstacle", k), mover_id=("ee", i))
        for j, dlv in enumerate(scenario.deliveries):
            out[("ee_dlv", i, j)] = make_regions(
                Aabb(dlv.initial, dlv.width), relative_bounds(ws, dlv.initial),
                ee.width, owner_id=("delivery", j), mover_id=("ee", i),
                frame=("delivery", j))
    for j, dlv in enumerate(scenario.deliveries):
        for k, obs in enumerate(scenario.obstacles):
            out[("dlv_obs", j, k)] = make_regions(
                obs, ws, dlv.width, owner_id=("obstacle", k),
                mover_id=("delivery", j))
        for j2, other in enumerate(scenario.deliveries):
            if j2 == j:
                continue
            out[("dlv_dlv", j, j2)] = make_regions(
                Aabb(other.initial, other.width),
                relative_bounds(ws, other.initial), dlv.width,
                owner_id=("delivery", j2), mover_id=("delivery", j),
                frame=("delivery", j2))
    return out


def _point_in_some_region(rset: RegionSet, point: Vec3) -> bool:
    return any(r.box.contains_point(point, atol=_MEMBERSHIP_ATOL)
               for r in rset.regions)


def _check_start_membership(scenario: Scenario,
                            sets: dict[RegionKey, RegionSet]) -> None:
    """Initial and target points must sit in at least one region per set."""
    for (kind, a, b), rset in sets.items():
        if kind == "ee_obs" or kind == "ee_dlv":
            point = scenario.end_effectors[a].initial
            if not _point_in_some_region(rset, point):
                raise ScenarioError(
                    f"infeasible scenario: end-effector {a} initial position is in "
                    f"no collision-free region of {rset.owner}")
        else:
            dlv = scenario.deliveries[a]
            for name, point in (("initial", dlv.initial), ("target", dlv.target)):
                if not _point_in_some_region(rset, point):
                    raise ScenarioError(
                        f"infeasible scenario: delivery {a} {name} position is in "
                        f"no collision-free region of {rset.owner}")


# ----------------------------------------------------------------------
# layout and report


class VariableLayout:
    """Lookup from (symbol, indices) to the model's variable ids."""

    def __init__(self) -> None:
        self._table: dict[tuple[str, tuple[int, ...]], VarId] = {}
        self.aux: list[VarId] = []
        self.region_sets: dict[RegionKey, RegionSet] = {}
        self.restricted: dict[tuple[int, int], tuple[int, ...]] = {}

    def add(self, symbol: str, idx: tuple[int, ...], var: VarId) -> None:
        key = (symbol, idx)
        if key in self._table:
            raise KeyError(f"duplicate layout entry {key}")
        self._table[key] = var

    def var(self, symbol: str, *idx: int) -> VarId:
        return self._table[(symbol, idx)]

    def has(self, symbol: str, *idx: int) -> bool:
        return (symbol, idx) in self._table

    def items(self):
        return self._table.items()

    def __len__(self) -> int:
        return len(self._table)


@dataclass
class BuildReport:
    variant: str
    n_steps: int
    binary_count: int
    continuous_count: int
    constraint_count: int
    per_tag: dict[str, int]
    region_counts: dict[str, int]

    def as_dict(self) -> dict:
        return {
            "variant": self.variant,
            "n_steps": self.n_steps,
            "binary_count": self.binary_count,
            "continuous_count": self.continuous_count,
            "constraint_count": self.constraint_count,
            "per_tag": dict(self.per_tag),
            "region_counts": dict(self.region_counts),
        }


# ----------------------------------------------------------------------
# objective weights and restricted regions


def weight_w(t: int, params: Params, scenario: Scenario) -> float:
    """Travel-cost weight at step ``t``: small enough that completing one
    step earlier always beats any movement saving, and growing with ``t``
    so late wandering costs more than early wandering."""
    T = params.n_steps
    if not 0 <= t <= T:
        raise ValueError(f"step {t} outside 0..{T}")
    speed_sum = sum(sum(ee.speed_limit) for ee in scenario.end_effectors)
    if speed_sum <= 0.0:
        raise ScenarioError("zero velocity bound sum: weights undefined")
    return (1.0 + params.alpha) ** (t / T - 1.0) / ((T + 1) ** 2 * speed_sum)


_FACE_NAMES = {("x", -1): "x-", ("x", 1): "x+", ("y", -1): "y-",
               ("y", 1): "y+", ("z", -1): "z-", ("z", 1): "z+"}


def select_restricted_regions(scenario: Scenario, params: Params,
                              sets: Mapping[RegionKey, RegionSet] | None = None,
                              ) -> dict[tuple[int, int], tuple[int, ...]]:
    """Penalized region indices per (end-effector, delivery) pair.

    Default policy: the region under the delivery plus the two side regions
    along whichever horizontal axis the end-effector sweeps less, judged by
    the projected distance from its start to the farthest delivery target
    (ties prefer the y axis).  Faces dropped during region construction are
    simply omitted.  ``params.restricted_faces`` overrides the face choice.
    """
    sets = sets if sets is not None else region_sets(scenario)
    out: dict[tuple[int, int], tuple[int, ...]] = {}
    for i, ee in enumerate(scenario.end_effectors):
        if params.restricted_faces is not None:
            faces = set(params.restricted_faces)
        else:
            dist_x = max(abs(ee.initial.x - d.target.x) for d in scenario.deliveries)
            dist_y = max(abs(ee.initial.y - d.target.y) for d in scenario.deliveries)
            lesser = "y" if dist_y <= dist_x else "x"
            faces = {"z-", f"{lesser}-", f"{lesser}+"}
        for j in range(scenario.n_dlv):
            rset = sets[("ee_dlv", i, j)]
            idx = tuple(r_idx for r_idx, reg in enumerate(rset.regions)
                        if _FACE_NAMES[(("x", "y", "z")[reg.axis], reg.sign)] in faces)
            out[(i, j)] = idx
    return out


# ----------------------------------------------------------------------
# model construction


def _band(model: MilpModel, expr: LinExpr, m_val: float, gate: LinExpr,
          tag: str) -> None:
    """Add ``-m*gate <= expr <= m*gate`` (gate is 1-theta or a grasp sum)."""
    model.add_constraint(expr - gate * m_val, "<=", 0.0, tag)
    model.add_constraint(expr + gate * m_val, ">=", 0.0, tag)


def _membership(model: MilpModel, exprs: Sequence[LinExpr], z: VarId,
                region: Region, tag: str) -> None:
    """Big-M rows putting ``exprs`` inside the region box when ``z`` is 1."""
    lo, hi = region.box.lo, region.box.hi
    for a in range(3):
        e_lo, e_hi = model.expr_bounds(exprs[a])
        model.add_constraint(exprs[a] + LinExpr.of(z, e_hi - hi[a]), "<=", e_hi, tag)
        model.add_constraint(exprs[a] + LinExpr.of(z, e_lo - lo[a]), ">=", e_lo, tag)


def build_model(scenario: Scenario, params: Params,
                ) -> tuple[MilpModel, VariableLayout, BuildReport]:
    """Build the chosen model variant; raises ScenarioError when the start
    or goal configuration is already in collision."""
    scenario.validate()
    sets = region_sets(scenario)
    _check_start_membership(scenario, sets)

    T = params.n_steps
    n_ee, n_dlv, n_obs = scenario.n_ee, scenario.n_dlv, scenario.n_obs
    ws = scenario.workspace
    ws_lo, ws_hi = ws.lo, ws.hi
    hard = params.variant in ("hard", "hard_soft")

    model = MilpModel()
    lay = VariableLayout()
    lay.region_sets = sets

    # --- decision variables (binaries first so branching indexes them low)
    for i in range(n_ee):
        for j in range(n_dlv):
            for t in range(T + 1):
                lay.add("gsp", (i, j, t), model.add_binary("gsp", (i, j, t)))
    for j in range(n_dlv):
        for t in range(T + 1):
            lay.add("psi", (j, t), model.add_binary("psi", (j, t)))

    def add_z(symbol: str, key: RegionKey, a: int, b: int, kind: VarKind) -> None:
        rset = sets[key]
        for r in range(len(rset)):
            for t in range(T + 1):
                var = model.add_var(kind, 0.0, 1.0, symbol, (a, b, r, t))
                lay.add(symbol, (a, b, r, t), var)

    for i in range(n_ee):
        for k in range(n_obs):
            add_z("zeo", ("ee_obs", i, k), i, k, VarKind.BINARY)
    for i in range(n_ee):
        for j in range(n_dlv):
            add_z("zed", ("ee_dlv", i, j), i, j, VarKind.BINARY)
    dlv_kind = VarKind.UNIT_INTERVAL if hard else VarKind.BINARY
    for j in range(n_dlv):
        for k in range(n_obs):
            add_z("zdo", ("dlv_obs", j, k), j, k, dlv_kind)
    for j1 in range(n_dlv):
        for j2 in range(n_dlv):
            if j1 != j2:
                add_z("zdd", ("dlv_dlv", j1, j2), j1, j2, dlv_kind)

    for i, ee in enumerate(scenario.end_effectors):
        for t in range(T + 1):
            for a in range(3):
                lay.add("pee", (i, t, a),
                        model.add_continuous(ws_lo[a], ws_hi[a], "pee", (i, t, a)))
        for t in range(T):
            for a in range(3):
                vmax = ee.speed_limit[a]
                lay.add("vee", (i, t, a),
                        model.add_continuous(-vmax, vmax, "vee", (i, t, a)))
                lay.add("uabs", (i, t, a),
                        model.add_continuous(0.0, vmax, "uabs", (i, t, a)))
    for j in range(n_dlv):
        for t in range(T + 1):
            for a in range(3):
                lay.add("pdlv", (j, t, a),
                        model.add_continuous(ws_lo[a], ws_hi[a], "pdlv", (j, t, a)))
    for t in range(T + 1):
        lay.add("alldone", (t,), model.add_unit("alldone", (t,)))
    for i in range(n_ee):
        for j in range(n_dlv):
            for t in range(T + 1):
                lay.add("pck", (i, j, t), model.add_unit("pck", (i, j, t)))
                lay.add("plc", (i, j, t), model.add_unit("plc", (i, j, t)))
                lay.add("cry", (i, j, t), model.add_unit("cry", (i, j, t)))

    def v(symbol: str, *idx: int) -> VarId:
        return lay.var(symbol, *idx)

    # --- initial conditions (as bound fixings)
    for i, ee in enumerate(scenario.end_effectors):
        for a in range(3):
            model.fix_var(v("pee", i, 0, a), ee.initial[a])
    for j, dlv in enumerate(scenario.deliveries):
        for a in range(3):
            model.fix_var(v("pdlv", j, 0, a), dlv.initial[a])
    for i in range(n_ee):
        for j in range(n_dlv):
            model.fix_var(v("gsp", i, j, 0), 0.0)   # everything starts at rest

    # --- end-effector dynamics
    for i in range(n_ee):
        for t in range(T):
            for a in range(3):
                expr = (LinExpr.of(v("pee", i, t + 1, a))
                        - LinExpr.of(v("pee", i, t, a))
                        - LinExpr.of(v("vee", i, t, a), params.dt))
                model.add_constraint(expr, "==", 0.0, "ee_dynamics")

    # --- grasp exclusivity
    for j in range(n_dlv):
        for t in range(T + 1):
            total = LinExpr([(1.0, v("gsp", i, j, t)) for i in range(n_ee)])
            model.add_constraint(total, "<=", 1.0, "grasp_excl_per_dlv")
    for i in range(n_ee):
        for t in range(T + 1):
            total = LinExpr([(1.0, v("gsp", i, j, t)) for j in range(n_dlv)])
            model.add_constraint(total, "<=", 1.0, "grasp_excl_per_ee")

    # --- action states: pick on the first grasped step, place on the first
    # free step, carry in between
    not_gsp: dict[tuple[int, int, int], VarId] = {}
    for i in range(n_ee):
        for j in range(n_dlv):
            for t in range(T + 1):
                nv = model.encode_not(v("gsp", i, j, t), tag="grasp_not")
                not_gsp[(i, j, t)] = nv
                lay.aux.append(nv)
    for i in range(n_ee):
        for j in range(n_dlv):
            for t in range(T + 1):
                if t == 0:
                    # nothing is grasped before the horizon starts
                    model.constrain_and(v("pck", i, j, 0), [v("gsp", i, j, 0)],
                                        tag="pick_def")
                    model.fix_var(v("plc", i, j, 0), 0.0)
                else:
                    model.constrain_and(
                        v("pck", i, j, t),
                        [not_gsp[(i, j, t - 1)], v("gsp", i, j, t)], tag="pick_def")
                    model.constrain_and(
                        v("plc", i, j, t),
                        [not_gsp[(i, j, t)], v("gsp", i, j, t - 1)], tag="place_def")
                expr = (LinExpr.of(v("cry", i, j, t)) - LinExpr.of(v("gsp", i, j, t))
                        + LinExpr.of(v("pck", i, j, t)))
                model.add_constraint(expr, "==", 0.0, "carry_def")

    # --- delivery motion tied to the end-effector
    for i in range(n_ee):
        for j in range(n_dlv):
            on = b_on(scenario, i, j)
            off = b_off(scenario, i, j)
            for t in range(T + 1):
                for a in range(3):
                    rel = (LinExpr.of(v("pdlv", j, t, a))
                           - LinExpr.of(v("pee", i, t, a)))
                    for offset, theta, tag in (
                            (on[a], v("cry", i, j, t), "carry_offset"),
                            (off[a], v("pck", i, j, t), "pick_offset"),
                            (off[a], v("plc", i, j, t), "place_offset")):
                        expr = rel + offset
                        m_val = model.tightest_big_m(expr)
                        gate = LinExpr([(-1.0, theta)], 1.0)
                        _band(model, expr, m_val, gate, tag)

    for j in range(n_dlv):
        for t in range(T):
            grasped = LinExpr([(1.0, v("gsp", i, j, t)) for i in range(n_ee)])
            for a in range(3):
                expr = (LinExpr.of(v("pdlv", j, t + 1, a))
                        - LinExpr.of(v("pdlv", j, t, a)))
                m_val = ws_hi[a] - ws_lo[a]
                _band(model, expr, m_val, grasped, "hold_still")

    # --- completion states
    for j, dlv in enumerate(scenario.deliveries):
        for t in range(T + 1):
            for a in range(3):
                expr = LinExpr.of(v("pdlv", j, t, a)) - dlv.target[a]
                m_val = model.tightest_big_m(expr)
                gate = LinExpr([(-1.0, v("psi", j, t))], 1.0)
                _band(model, expr, m_val, gate, "done_at_target")
            grasped = LinExpr([(1.0, v("gsp", i, j, t)) for i in range(n_ee)])
            model.add_constraint(LinExpr.of(v("psi", j, t)) + grasped, "<=", 1.0,
                                 "done_ungrasped")
        for t in range(T):
            expr = LinExpr.of(v("psi", j, t + 1)) - LinExpr.of(v("psi", j, t))
            for i in range(n_ee):
                expr = expr - LinExpr.of(v("gsp", i, j, t)) \
                    + LinExpr.of(v("gsp", i, j, t + 1))
            model.add_constraint(expr, ">=", 0.0, "done_after_release")
            model.add_constraint(
                LinExpr.of(v("psi", j, t)) - LinExpr.of(v("psi", j, t + 1)),
                "<=", 0.0, "done_monotone")
        model.add_constraint(LinExpr.of(v("psi", j, T)), "==", 1.0, "done_monotone")

    # --- region memberships
    def pos_expr(symbol: str, body: int, t: int, a: int) -> LinExpr:
        return LinExpr.of(v(symbol, body, t, a))

    for i in range(n_ee):
        for k in range(n_obs):
            rset = sets[("ee_obs", i, k)]
            for r, region in enumerate(rset.regions):
                for t in range(T + 1):
                    exprs = [pos_expr("pee", i, t, a) for a in range(3)]
                    _membership(model, exprs, v("zeo", i, k, r, t), region,
                                "member_ee_obs")
    for i in range(n_ee):
        for j, dlv in enumerate(scenario.deliveries):
            rset = sets[("ee_dlv", i, j)]
            for r, region in enumerate(rset.regions):
                for t in range(T + 1):
                    exprs = [LinExpr.of(v("pee", i, t, a))
                             - LinExpr.of(v("pdlv", j, t, a)) + dlv.initial[a]
                             for a in range(3)]
                    _membership(model, exprs, v("zed", i, j, r, t), region,
                                "member_ee_dlv")
    for j in range(n_dlv):
        for k in range(n_obs):
            rset = sets[("dlv_obs", j, k)]
            for r, region in enumerate(rset.regions):
                for t in range(T + 1):
                    exprs = [pos_expr("pdlv", j, t, a) for a in range(3)]
                    _membership(model, exprs, v("zdo", j, k, r, t), region,
                                "member_dlv_obs")
    for j1 in range(n_dlv):
        for j2, other in enumerate(scenario.deliveries):
            if j1 == j2:
                continue
            rset = sets[("dlv_dlv", j1, j2)]
            for r, region in enumerate(rset.regions):
                for t in range(T + 1):
                    exprs = [LinExpr.of(v("pdlv", j1, t, a))
                             - LinExpr.of(v("pdlv", j2, t, a)) + other.initial[a]
                             for a in range(3)]
                    _membership(model, exprs, v("zdd", j1, j2, r, t), region,
                                "member_dlv_dlv")

    # --- shared region between consecutive steps
    def add_shared(symbol: str, key: RegionKey, a: int, b: int, tag: str) -> None:
        rset = sets[key]
        for t in range(T):
            ands = []
            for r in range(len(rset)):
                av = model.encode_and([v(symbol, a, b, r, t),
                                       v(symbol, a, b, r, t + 1)], tag=tag)
                lay.aux.append(av)
                ands.append(av)
            ov = model.encode_or(ands, tag=tag)
            lay.aux.append(ov)
            model.add_constraint(LinExpr.of(ov), "==", 1.0, tag)

    for i in range(n_ee):
        for k in range(n_obs):
            add_shared("zeo", ("ee_obs", i, k), i, k, "shared_ee_obs")
    for i in range(n_ee):
        for j in range(n_dlv):
            add_shared("zed", ("ee_dlv", i, j), i, j, "shared_ee_dlv")
    if not hard:
        for j in range(n_dlv):
            for k in range(n_obs):
                add_shared("zdo", ("dlv_obs", j, k), j, k, "shared_dlv_obs")
        for j1 in range(n_dlv):
            for j2 in range(n_dlv):
                if j1 != j2:
                    add_shared("zdd", ("dlv_dlv", j1, j2), j1, j2, "shared_dlv_dlv")
    else:
        # carried deliveries inherit the carrier's memberships; uncarried
        # ones do not move, so their shared-region constraints are dropped
        for j in range(n_dlv):
            for k in range(n_obs):
                rset = sets[("dlv_obs", j, k)]
                for r in range(len(rset)):
                    for t in range(T + 1):
                        ands = []
                        for i in range(n_ee):
                            av = model.encode_and(
                                [v("zeo", i, k, r, t), v("cry", i, j, t)],
                                tag="link_dlv_obs")
                            lay.aux.append(av)
                            ands.append(av)
                        model.constrain_or(v("zdo", j, k, r, t), ands,
                                           tag="link_dlv_obs")
        for j1 in range(n_dlv):
            for j2 in range(n_dlv):
                if j1 == j2:
                    continue
                rset = sets[("dlv_dlv", j1, j2)]
                for r in range(len(rset)):
                    for t in range(T + 1):
                        ands = []
                        for i in range(n_ee):
                            av = model.encode_and(
                                [v("zed", i, j2, r, t), v("cry", i, j1, t)],
                                tag="link_dlv_dlv")
                            lay.aux.append(av)
                            ands.append(av)
                        model.constrain_or(v("zdd", j1, j2, r, t), ands,
                                           tag="link_dlv_dlv")

    # --- completion aggregation and |v| slack
    for t in range(T + 1):
        operands = [v("psi", j, tau) for tau in range(t, T + 1)
                    for j in range(n_dlv)]
        model.constrain_and(v("alldone", t), operands, tag="completion")
    for i in range(n_ee):
        for t in range(T):
            for a in range(3):
                vel = LinExpr.of(v("vee", i, t, a))
                slack = LinExpr.of(v("uabs", i, t, a))
                model.add_constraint(vel - slack, "<=", 0.0, "speed_abs")
                model.add_constraint(vel + slack, ">=", 0.0, "speed_abs")

    # --- objective: completion time, then travel, then (optionally) routes
    obj = LinExpr([], 1.0)   # sum over t of (1 - alldone_t) / (T+1)
    for t in range(T + 1):
        obj = obj + LinExpr.of(v("alldone", t), -1.0 / (T + 1))
    for t in range(T):
        w_t = weight_w(t, params, scenario)
        for i in range(n_ee):
            for a in range(3):
                obj = obj + LinExpr.of(v("uabs", i, t, a), w_t)
    if params.variant == "hard_soft":
        restricted = select_restricted_regions(scenario, params, sets)
        lay.restricted = restricted
        for (i, j), r_indices in restricted.items():
            for r in r_indices:
                for t in range(T + 1):
                    obj = obj + LinExpr.of(v("zed", i, j, r, t), 1.0)
    model.set_objective(obj)

    counts = model.counts()
    report = BuildReport(
        variant=params.variant,
        n_steps=T,
        binary_count=counts["binary"],
        continuous_count=counts["continuous"],
        constraint_count=counts["constraints"],
        per_tag=model.constraint_counts_by_tag(),
        region_counts={":".join(map(str, key)): len(rset)
                       for key, rset in sorted(sets.items())},
    )
    return model, lay, report


# ----------------------------------------------------------------------
# file formats


def _vec(values: Sequence[float]) -> Vec3:
    if len(values) != 3:
        raise ScenarioError(f"expected 3 components, got {values!r}")
    return Vec3(*(float(x) for x in values))


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "schema": SCENARIO_SCHEMA,
        "workspace_m": {"center": list(scenario.workspace.center),
                        "width": list(scenario.workspace.width)},
        "end_effectors": [
            {"width_m": list(ee.width), "initial_m": list(ee.initial),
             "speed_limit_mps": list(ee.speed_limit),
             "approach_margin_m": list(ee.approach_margin)}
            for ee in scenario.end_effectors],
        "deliveries": [
            {"width_m": list(d.width), "initial_m": list(d.initial),
             "target_m": list(d.target)} for d in scenario.deliveries],
        "obstacles_m": [
            {"center": list(o.center), "width": list(o.width)}
            for o in scenario.obstacles],
    }


def scenario_from_dict(doc: Mapping) -> Scenario:
    if doc.get("schema") != SCENARIO_SCHEMA:
        raise ScenarioError(
            f"unsupported scenario schema {doc.get('schema')!r}; "
            f"expected {SCENARIO_SCHEMA!r}")
    try:
        ws = Aabb(_vec(doc["workspace_m"]["center"]), _vec(doc["workspace_m"]["width"]))
        ees = tuple(EndEffector(width=_vec(e["width_m"]),
                                initial=_vec(e["initial_m"]),
                                speed_limit=_vec(e["speed_limit_mps"]),
                                approach_margin=_vec(e["approach_margin_m"]))
                    for e in doc["end_effectors"])
        dlvs = tuple(Delivery(width=_vec(d["width_m"]), initial=_vec(d["initial_m"]),
                              target=_vec(d["target_m"]))
                     for d in doc["deliveries"])
        obss = tuple(Aabb(_vec(o["center"]), _vec(o["width"]))
                     for o in doc.get("obstacles_m", []))
    except (KeyError, TypeError, GeometryError) as exc:
        raise ScenarioError(f"malformed scenario file: {exc}") from exc
    scenario = Scenario(ws, ees, dlvs, obss)
    scenario.validate()
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return scenario_from_dict(json.load(fh))


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(scenario), fh, indent=2)
        fh.write("\n")


def params_from_dict(doc: Mapping) -> Params:
    try:
        faces = doc.get("restricted_faces")
        return Params(dt=float(doc["dt_s"]), n_steps=int(doc["n_steps"]),
                      alpha=float(doc.get("alpha", 1.0)),
                      variant=str(doc.get("variant", "baseline")),
                      restricted_faces=tuple(faces) if faces else None)
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed params: {exc}") from exc


def params_to_dict(params: Params) -> dict:
    return {
        "dt_s": params.dt,
        "n_steps": params.n_steps,
        "alpha": params.alpha,
        "variant": params.variant,
        "restricted_faces": list(params.restricted_faces)
        if params.restricted_faces else None,
    }
