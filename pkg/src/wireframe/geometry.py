"""Exact 2D primitives and the junction/segment incidence model.

Coordinate frame: image coordinates with the origin at the top-left corner,
x growing rightward and y growing downward.  Angles are measured in degrees
from +x toward +y (clockwise on screen) and normalized to [0, 360).
All coordinates are 64-bit floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

# Default slack for "junction lies on segment" tests on real predictions.
DEFAULT_INCIDENCE_TOL = 1.0

_PARALLEL_EPS = 1e-12


class GeometryError(ValueError):
    """Invalid geometric input (degenerate segment, non-finite point, ...)."""


def normalize_angle(theta_deg: float) -> float:
    """Map an angle in degrees onto [0, 360)."""
    a = math.fmod(theta_deg, 360.0)
    if a < 0.0:
        a += 360.0
    if a >= 360.0:  # fmod can land exactly on 360.0 after the correction
        a = 0.0
    return a


def angle_diff(a_deg: float, b_deg: float) -> float:
    """Signed angular difference a - b wrapped onto [-180, 180)."""
    d = math.fmod(a_deg - b_deg, 360.0)
    if d < -180.0:
        d += 360.0
    elif d >= 180.0:
        d -= 360.0
    return d


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError(f"non-finite point ({self.x}, {self.y})")

    def distance_to(self, other: "Point") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


def direction_deg(origin: Point, target: Point) -> float:
    """Angle of the ray origin -> target, degrees in [0, 360)."""
    return normalize_angle(math.degrees(math.atan2(target.y - origin.y,
                                                   target.x - origin.x)))


@dataclass(frozen=True)
class Segment:
    a: Point
    b: Point

    def __post_init__(self) -> None:
        if self.a.x == self.b.x and self.a.y == self.b.y:
            raise GeometryError(f"degenerate segment at ({self.a.x}, {self.a.y})")

    @property
    def length(self) -> float:
        return self.a.distance_to(self.b)


def segment_length(s: Segment) -> float:
    """Euclidean length of a segment (always > 0 for a valid Segment)."""
    return s.length


@dataclass(frozen=True)
class Branch:
    """One outgoing direction of a junction."""
    angle_deg: float
    confidence: float = 1.0


@dataclass(frozen=True)
class Junction:
    center: Point
    branches: tuple[Branch, ...] = ()
    confidence: float = 1.0
    # True for points materialized as segment endpoints during wireframe
    # construction rather than detected directly.
    derived: bool = False

    @property
    def order(self) -> int:
        return len(self.branches)


class SegmentIntersection(NamedTuple):
    """Result of intersecting two closed segments.

    ``point`` is set when the segments meet in exactly one point.  When the
    segments are collinear and overlap along a positive-length stretch,
    ``point`` is None and ``collinear`` is True.
    """
    point: Optional[Point]
    collinear: bool = False


def _cross(ax: float, ay: float, bx: float, by: float) -> float:
    return ax * by - ay * bx


def segment_intersection(s1: Segment, s2: Segment) -> SegmentIntersection:
    """Intersect two closed segments.

    Returns the unique intersection point when one exists (interior or
    endpoint), no point when the segments are disjoint, and the collinear
    flag when they overlap along a shared line.
    """
    ax, ay = s1.a.x, s1.a.y
    rx, ry = s1.b.x - ax, s1.b.y - ay
    cx, cy = s2.a.x, s2.a.y
    sx, sy = s2.b.x - cx, s2.b.y - cy
    qpx, qpy = cx - ax, cy - ay

    denom = _cross(rx, ry, sx, sy)
    scale = math.hypot(rx, ry) * math.hypot(sx, sy)
    if abs(denom) <= _PARALLEL_EPS * scale:
        # Parallel.  Collinear iff s2.a sits on the line through s1.
        if abs(_cross(qpx, qpy, rx, ry)) > _PARALLEL_EPS * scale:
            return SegmentIntersection(None)
        # Parameterize along the longer segment so the squared length cannot
        # underflow for inputs of wildly different scales.
        if math.hypot(sx, sy) > math.hypot(rx, ry):
            return segment_intersection(s2, s1)
        rr = rx * rx + ry * ry
        if rr == 0.0:  # both segments shorter than sqrt(smallest float)
            return SegmentIntersection(None)
        t0 = (qpx * rx + qpy * ry) / rr
        t1 = ((s2.b.x - ax) * rx + (s2.b.y - ay) * ry) / rr
        lo, hi = min(t0, t1), max(t0, t1)
        lo, hi = max(lo, 0.0), min(hi, 1.0)
        if lo > hi:
            return SegmentIntersection(None)
        if lo == hi:  # touch at a single shared point
            return SegmentIntersection(Point(ax + lo * rx, ay + lo * ry))
        return SegmentIntersection(None, collinear=True)

    t = _cross(qpx, qpy, sx, sy) / denom
    u = _cross(qpx, qpy, rx, ry) / denom
    if -_PARALLEL_EPS <= t <= 1.0 + _PARALLEL_EPS and -_PARALLEL_EPS <= u <= 1.0 + _PARALLEL_EPS:
        t = min(max(t, 0.0), 1.0)
        return SegmentIntersection(Point(ax + t * rx, ay + t * ry))
    return SegmentIntersection(None)


def point_segment_distance(p: Point, s: Segment) -> float:
    """Distance from a point to the closed segment."""
    ax, ay = s.a.x, s.a.y
    dx, dy = s.b.x - ax, s.b.y - ay
    dd = dx * dx + dy * dy
    if dd == 0.0:  # segment shorter than sqrt(smallest float)
        return math.hypot(p.x - ax, p.y - ay)
    t = ((p.x - ax) * dx + (p.y - ay) * dy) / dd
    t = min(max(t, 0.0), 1.0)
    return math.hypot(p.x - (ax + t * dx), p.y - (ay + t * dy))


def build_incidence(junctions: Sequence[Junction],
                    segments: Sequence[Segment],
                    tol: float = DEFAULT_INCIDENCE_TOL) -> np.ndarray:
    """N x M binary matrix; entry (n, m) is 1 iff junction n lies on segment m.

    "Lies on" means distance from the junction center to the closed segment
    is at most ``tol``.
    """
    if tol < 0:
        raise GeometryError(f"negative incidence tolerance {tol}")
    w = np.zeros((len(junctions), len(segments)), dtype=np.int64)
    for n, jn in enumerate(junctions):
        for m, seg in enumerate(segments):
            if point_segment_distance(jn.center, seg) <= tol:
                w[n, m] = 1
    return w


def junction_adjacency(incidence: np.ndarray) -> np.ndarray:
    """W @ W.T: off-diagonal (n1, n2) > 0 iff the junctions share a segment."""
    w = np.asarray(incidence, dtype=np.int64)
    return w @ w.T


def segment_adjacency(incidence: np.ndarray) -> np.ndarray:
    """W.T @ W: off-diagonal (m1, m2) > 0 iff the segments meet at a junction."""
    w = np.asarray(incidence, dtype=np.int64)
    return w.T @ w


@dataclass
class Wireframe:
    """Junction points P connected by segments L, with incidence matrix W."""
    junctions: list[Junction] = field(default_factory=list)
    segments: list[Segment] = field(default_factory=list)
    incidence: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=np.int64))
