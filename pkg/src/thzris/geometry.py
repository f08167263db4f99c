"""Minimal 3D primitives: points, axis-aligned boxes, finite rectangles.

All lengths are in meters. Occlusion tests follow a strict-interior rule:
touching a face, lying exactly in a face plane, or intersecting within
``ENDPOINT_EPS`` of a segment endpoint does not count as a hit. This keeps
reflection points (which sit exactly on surfaces) from occluding themselves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Intersections closer than this (in meters) to a segment endpoint are ignored.
ENDPOINT_EPS = 1e-9


@dataclass(frozen=True)
class Vec3:
    """Cartesian point/vector, meters."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"non-finite Vec3 components: ({self.x}, {self.y}, {self.z})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, s: float) -> "Vec3":
        return Vec3(self.x * s, self.y * s, self.z * s)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: "Vec3") -> "Vec3":
        return Vec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def distance_to(self, other: "Vec3") -> float:
        return (self - other).norm()

    def normalized(self) -> "Vec3":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize zero vector")
        return self.scaled(1.0 / n)


def vec3(p) -> Vec3:
    """Coerce a Vec3 or a 3-sequence into a Vec3."""
    if isinstance(p, Vec3):
        return p
    x, y, z = p
    return Vec3(float(x), float(y), float(z))


@dataclass(frozen=True)
class Box:
    """Axis-aligned box; min strictly below max componentwise."""

    min: Vec3
    max: Vec3

    def __post_init__(self):
        if not (self.min.x < self.max.x and self.min.y < self.max.y and self.min.z < self.max.z):
            raise ValueError("box min must be strictly below max componentwise")

    def contains(self, p: Vec3) -> bool:
        return (
            self.min.x <= p.x <= self.max.x
            and self.min.y <= p.y <= self.max.y
            and self.min.z <= p.z <= self.max.z
        )

    def footprint(self) -> tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) projection onto the floor plane."""
        return (self.min.x, self.min.y, self.max.x, self.max.y)


@dataclass(frozen=True)
class Rect3:
    """Finite rectangle: origin plus two orthogonal edge vectors."""

    origin: Vec3
    edge_u: Vec3
    edge_v: Vec3

    def __post_init__(self):
        lu, lv = self.edge_u.norm(), self.edge_v.norm()
        if lu == 0.0 or lv == 0.0:
            raise ValueError("rectangle edge vectors must be non-zero")
        if abs(self.edge_u.dot(self.edge_v)) > 1e-9 * lu * lv:
            raise ValueError("rectangle edge vectors must be orthogonal")

    def normal(self) -> Vec3:
        return self.edge_u.cross(self.edge_v).normalized()

    def center(self) -> Vec3:
        return self.origin + self.edge_u.scaled(0.5) + self.edge_v.scaled(0.5)

    def local_coords(self, p: Vec3) -> tuple[float, float, float]:
        """(u, v, w): fractions along each edge plus out-of-plane distance."""
        d = p - self.origin
        lu2 = self.edge_u.dot(self.edge_u)
        lv2 = self.edge_v.dot(self.edge_v)
        u = d.dot(self.edge_u) / lu2
        v = d.dot(self.edge_v) / lv2
        w = d.dot(self.normal())
        return u, v, w

    def point_at(self, u: float, v: float) -> Vec3:
        return self.origin + self.edge_u.scaled(u) + self.edge_v.scaled(v)


def segment_hits_box(a: Vec3, b: Vec3, box: Box, eps: float = ENDPOINT_EPS) -> bool:
    """True iff the open segment a-b passes through the open interior of box.

    Slab clipping with strict inequalities: grazing a face exactly (coplanar
    travel or a corner touch) is not a hit, and neither is any intersection
    within ``eps`` meters of an endpoint.
    """
    length = a.distance_to(b)
    if length == 0.0:
        raise ValueError("degenerate segment")
    t_eps = eps / length
    t0, t1 = t_eps, 1.0 - t_eps
    ax = (a.x, a.y, a.z)
    dx = (b.x - a.x, b.y - a.y, b.z - a.z)
    lo = (box.min.x, box.min.y, box.min.z)
    hi = (box.max.x, box.max.y, box.max.z)
    for o, d, mn, mx in zip(ax, dx, lo, hi):
        if d == 0.0:
            # Parallel to this slab: must lie strictly inside it.
            if not (mn < o < mx):
                return False
            continue
        ta = (mn - o) / d
        tb = (mx - o) / d
        if ta > tb:
            ta, tb = tb, ta
        t0 = max(t0, ta)
        t1 = min(t1, tb)
        if t0 >= t1:
            return False
    return t1 - t0 > 0.0


def segment_hits_rect(a: Vec3, b: Vec3, rect: Rect3, eps: float = ENDPOINT_EPS) -> bool:
    """True iff the open segment a-b crosses the open interior of rect.

    Coplanar segments never count (grazing rule); crossings within ``eps``
    meters of an endpoint are ignored.
    """
    length = a.distance_to(b)
    if length == 0.0:
        raise ValueError("degenerate segment")
    n = rect.normal()
    d = b - a
    denom = d.dot(n)
    if denom == 0.0:
        return False
    t = (rect.origin - a).dot(n) / denom
    t_eps = eps / length
    if not (t_eps < t < 1.0 - t_eps):
        return False
    p = a + d.scaled(t)
    u, v, _ = rect.local_coords(p)
    return 0.0 < u < 1.0 and 0.0 < v < 1.0


def segment_point_at(a: Vec3, b: Vec3, t: float) -> Vec3:
    return a + (b - a).scaled(t)


def footprints_overlap(
    fa: tuple[float, float, float, float], fb: tuple[float, float, float, float]
) -> bool:
    """Open-interior overlap of two floor rectangles; edge contact is not overlap."""
    return fa[0] < fb[2] and fb[0] < fa[2] and fa[1] < fb[3] and fb[1] < fa[3]
