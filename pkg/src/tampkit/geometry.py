"""Axis-aligned box geometry and collision-free region construction.

All moving bodies are axis-aligned boxes.  Collision checks are reduced to
point membership by inflating the stationary body with the moving body's
width, after which the mover's center point is what gets constrained.  The
free space around an inflated box is covered by one closed region per box
face; each region spans the full workspace along the other axes, so
regions of adjacent faces overlap near the corners.  That overlap is what
lets a path switch regions without cutting through a corner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

__all__ = [
    "Vec3",
    "Aabb",
    "Region",
    "RegionSet",
    "GeometryError",
    "inflate",
    "make_regions",
    "contains",
    "AXES",
    "FACE_ORDER",
]

AXES = ("x", "y", "z")

# Region construction order: one face per axis, minus side first.
FACE_ORDER: tuple[tuple[int, int], ...] = (
    (0, -1), (0, +1), (1, -1), (1, +1), (2, -1), (2, +1))


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Vec3:
    """Point, extent or velocity in meters / meters per second."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        for a in (self.x, self.y, self.z):
            if not math.isfinite(a):
                raise GeometryError(f"non-finite component in {self!r}")

    def __iter__(self) -> Iterator[float]:
        yield self.x
        yield self.y
        yield self.z

    def __getitem__(self, axis: int) -> float:
        return (self.x, self.y, self.z)[axis]

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scale(self, k: float) -> "Vec3":
        return Vec3(self.x * k, self.y * k, self.z * k)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned box given by center and full widths per axis."""

    center: Vec3
    width: Vec3

    def __post_init__(self) -> None:
        if min(self.width) < 0.0:
            raise GeometryError(f"negative width in {self!r}")

    @classmethod
    def from_bounds(cls, lo: Vec3, hi: Vec3) -> "Aabb":
        return cls(center=Vec3(*((l + h) / 2.0 for l, h in zip(lo, hi))),
                   width=Vec3(*(h - l for l, h in zip(lo, hi))))

    @property
    def lo(self) -> Vec3:
        return self.center - self.width.scale(0.5)

    @property
    def hi(self) -> Vec3:
        return self.center + self.width.scale(0.5)

    def contains_point(self, p: Vec3, atol: float = 0.0) -> bool:
        lo, hi = self.lo, self.hi
        return all(lo[a] - atol <= p[a] <= hi[a] + atol for a in range(3))

    def strictly_inside(self, p: Vec3, atol: float = 0.0) -> bool:
        """True when ``p`` is in the open interior (degenerate axes ignored)."""
        lo, hi = self.lo, self.hi
        for a in range(3):
            if hi[a] - lo[a] <= 2.0 * atol:
                return False
            if not (lo[a] + atol < p[a] < hi[a] - atol):
                return False
        return True

    def overlaps_open(self, other: "Aabb") -> bool:
        """True when the open interiors intersect."""
        alo, ahi, blo, bhi = self.lo, self.hi, other.lo, other.hi
        return all(alo[a] < bhi[a] and blo[a] < ahi[a] for a in range(3))

    def contains_box(self, other: "Aabb", atol: float = 1e-12) -> bool:
        alo, ahi, blo, bhi = self.lo, self.hi, other.lo, other.hi
        return all(alo[a] <= blo[a] + atol and bhi[a] <= ahi[a] + atol
                   for a in range(3))


@dataclass(frozen=True)
class Region:
    """One closed free-space box on a given face of an inflated body.

    ``frame`` is ``"absolute"`` for obstacle-owned regions, or
    ``("delivery", j)`` for regions tied to delivery ``j``, in which case
    membership is evaluated on the mover position minus the owner's
    displacement from its initial position.
    """

    box: Aabb
    frame: str | tuple[str, int]
    axis: int
    sign: int

    @property
    def face(self) -> str:
        return f"{AXES[self.axis]}{'+' if self.sign > 0 else '-'}"


@dataclass(frozen=True)
class RegionSet:
    """Ordered collision-free regions for one (owner body, mover body) pair."""

    owner: tuple[str, int]   # ("obstacle", k) or ("delivery", j)
    mover: tuple[str, int]   # ("ee", i) or ("delivery", j)
    regions: tuple[Region, ...]
    inflated: Aabb           # owner box grown by the mover width
    bounds: Aabb             # construction bounds (workspace or relative box)

    def __len__(self) -> int:
        return len(self.regions)


def inflate(owner: Aabb, mover_width: Vec3) -> Aabb:
    """Grow ``owner`` by the mover's full width, keeping the center.

    Membership of the mover's center point outside the open inflated box is
    then equivalent to the two boxes not overlapping in their interiors.
    """
    if min(mover_width) < 0.0:
        raise GeometryError("negative mover width")
    return Aabb(owner.center, owner.width + mover_width)


def make_regions(owner: Aabb, workspace: Aabb, mover_width: Vec3,
                 owner_id: tuple[str, int] = ("obstacle", 0),
                 mover_id: tuple[str, int] = ("ee", 0),
                 frame: str | tuple[str, int] = "absolute") -> RegionSet:
    """Build the closed free-space regions around one inflated body.

    One region per face of the inflated box: along the face axis it spans
    from the face plane to the workspace bound, along every other axis the
    full workspace.  Faces whose outward slab has zero thickness are
    dropped.  Raises when nothing remains (the inflated box covers the
    whole workspace).
    """
    grown = inflate(owner, mover_width)
    ws_lo, ws_hi = workspace.lo, workspace.hi
    g_lo, g_hi = grown.lo, grown.hi
    if any(g_hi[a] < ws_lo[a] or g_lo[a] > ws_hi[a] for a in range(3)):
        raise GeometryError("inflated body does not intersect the workspace")

    regions: list[Region] = []
    for axis, sign in FACE_ORDER:
        if sign < 0:
            lo_a, hi_a = ws_lo[axis], g_lo[axis]
        else:
            lo_a, hi_a = g_hi[axis], ws_hi[axis]
        lo_a, hi_a = max(lo_a, ws_lo[axis]), min(hi_a, ws_hi[axis])
        if hi_a - lo_a <= 0.0:
            continue  # flush or swallowed face: nothing outward of it
        lo = [ws_lo[0], ws_lo[1], ws_lo[2]]
        hi = [ws_hi[0], ws_hi[1], ws_hi[2]]
        lo[axis], hi[axis] = lo_a, hi_a
        box = Aabb.from_bounds(Vec3(*lo), Vec3(*hi))
        regions.append(Region(box=box, frame=frame, axis=axis, sign=sign))

    if not regions:
        raise GeometryError("no free region: inflated body covers the workspace")
    return RegionSet(owner=owner_id, mover=mover_id, regions=tuple(regions),
                     inflated=grown, bounds=workspace)


def contains(region: Region, point: Vec3, atol: float = 0.0) -> bool:
    """Closed membership test; boundary contact counts as inside."""
    return region.box.contains_point(point, atol=atol)


def relative_bounds(workspace: Aabb, owner_initial: Vec3) -> Aabb:
    """Range of ``p_mover - (p_owner - p_owner_initial)`` over the workspace.

    Both bodies stay inside the workspace, so the difference spans twice the
    workspace width, centered on the owner's initial position.
    """
    return Aabb(center=owner_initial, width=workspace.width.scale(2.0))


def shared_region(rset: RegionSet, a: Vec3, b: Vec3, atol: float = 0.0) -> int | None:
    """Index of the first region containing both points, or None."""
    for idx, region in enumerate(rset.regions):
        if contains(region, a, atol) and contains(region, b, atol):
            return idx
    return None
