"""Ground truth from labeled line segments.

Turns an annotated scene (image size + line segments) into the two training
targets: junctions, found where two or more segments intersect or touch, and
a heat map whose value at every pixel covered by a line is that line's
length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    Branch,
    GeometryError,
    Junction,
    Point,
    Segment,
    direction_deg,
    point_segment_distance,
    segment_intersection,
)

DEFAULT_MERGE_RADIUS = 2.0

# Two branch directions closer than this (degrees) collapse into one.
_ANGLE_DEDUP_DEG = 1e-6


@dataclass(frozen=True)
class AnnotatedScene:
    width: int
    height: int
    lines: tuple[Segment, ...] = ()

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise GeometryError(f"bad scene size {self.width}x{self.height}")
        for s in self.lines:
            for p in (s.a, s.b):
                if not (0.0 <= p.x <= self.width and 0.0 <= p.y <= self.height):
                    raise GeometryError(f"endpoint ({p.x}, {p.y}) outside scene")


@dataclass
class HeatMap:
    width: int
    height: int
    values: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.height, self.width):
            raise GeometryError(
                f"heat map shape {self.values.shape} != ({self.height}, {self.width})")
        if not np.isfinite(self.values).all() or (self.values < 0).any():
            raise GeometryError("heat map values must be finite and >= 0")


def clip_segment(s: Segment, width: int, height: int):
    """Liang-Barsky clip of a segment to the pixel box [0,w-1] x [0,h-1].

    Returns clipped float endpoints ((x1,y1), (x2,y2)) or None when the
    segment misses the box entirely.
    """
    x1, y1 = s.a.x, s.a.y
    dx, dy = s.b.x - x1, s.b.y - y1
    t0, t1 = 0.0, 1.0
    for p, q in ((-dx, x1 - 0.0), (dx, (width - 1.0) - x1),
                 (-dy, y1 - 0.0), (dy, (height - 1.0) - y1)):
        if p == 0.0:
            if q < 0.0:
                return None
            continue
        r = q / p
        if p < 0.0:
            if r > t1:
                return None
            t0 = max(t0, r)
        else:
            if r < t0:
                return None
            t1 = min(t1, r)
    if t0 > t1:
        return None
    return (x1 + t0 * dx, y1 + t0 * dy), (x1 + t1 * dx, y1 + t1 * dy)


def _round_px(v: float) -> int:
    # round-half-up keeps the walk deterministic across platforms
    return int(math.floor(v + 0.5))


def rasterize_segment(s: Segment, width: int, height: int) -> list[tuple[int, int]]:
    """8-connected digital line between the rounded, clipped endpoints.

    Pixels come back in walk order from a to b, endpoints included.  A
    segment entirely outside the image gives an empty list.
    """
    clipped = clip_segment(s, width, height)
    if clipped is None:
        return []
    (cx1, cy1), (cx2, cy2) = clipped
    x0, y0 = _round_px(cx1), _round_px(cy1)
    x1, y1 = _round_px(cx2), _round_px(cy2)
    dx = abs(x1 - x0)
    sx = 1 if x0 < x1 else -1
    dy = -abs(y1 - y0)
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    pixels = []
    while True:
        pixels.append((x0, y0))
        if x0 == x1 and y0 == y1:
            return pixels
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def _candidate_points(lines: tuple[Segment, ...],
                      merge_radius: float) -> list[tuple[Point, bool]]:
    """All pairwise intersection / incidence points, duplicates included.

    The flag marks exact crossing points, which anchor cluster centers;
    endpoint-incidence candidates carry annotation slop.
    """
    cands: list[tuple[Point, bool]] = []
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            si, sj = lines[i], lines[j]
            hit = segment_intersection(si, sj)
            if hit.point is not None:
                cands.append((hit.point, True))
            # Endpoints resting on (or near) the other segment: T- and
            # L-junctions with annotation slop, and shared collinear ends.
            for a, b in ((si, sj), (sj, si)):
                for e in (a.a, a.b):
                    if point_segment_distance(e, b) <= merge_radius:
                        cands.append((e, False))
    return cands


def derive_junctions(scene: AnnotatedScene,
                     merge_radius: float = DEFAULT_MERGE_RADIUS) -> list[Junction]:
    """Junctions of the scene: clustered meeting points with branch angles.

    Candidate points (pairwise segment intersections plus endpoints incident
    to another segment) are greedily clustered within merge_radius.  Each
    cluster center grows one branch per incident segment side whose remaining
    length exceeds merge_radius; clusters with fewer than two branches are
    dropped.  Output is sorted by (y, x).
    """
    if merge_radius < 0:
        raise GeometryError(f"negative merge radius {merge_radius}")
    cands = _candidate_points(scene.lines, merge_radius)
    # exact crossings first so they seed the clusters
    cands.sort(key=lambda pe: (not pe[1], pe[0].y, pe[0].x))

    clusters: list[list[tuple[Point, bool]]] = []
    for p, exact in cands:
        for members in clusters:
            cx = sum(m.x for m, _ in members) / len(members)
            cy = sum(m.y for m, _ in members) / len(members)
            if math.hypot(p.x - cx, p.y - cy) <= merge_radius:
                members.append((p, exact))
                break
        else:
            clusters.append([(p, exact)])

    junctions = []
    for members in clusters:
        # a cluster holding exact crossing points centers on those alone
        anchors = [m for m, exact in members if exact] or [m for m, _ in members]
        c = Point(sum(m.x for m in anchors) / len(anchors),
                  sum(m.y for m in anchors) / len(anchors))
        angles: list[float] = []
        for seg in scene.lines:
            if point_segment_distance(c, seg) > merge_radius:
                continue
            for e in (seg.a, seg.b):
                if c.distance_to(e) > merge_radius:
                    angles.append(direction_deg(c, e))
        angles.sort()
        branches = []
        for a in angles:
            if any(_circ_close(a, b.angle_deg) for b in branches):
                continue
            branches.append(Branch(a, 1.0))
        if len(branches) >= 2:
            junctions.append(Junction(c, tuple(branches), 1.0))
    junctions.sort(key=lambda j: (j.center.y, j.center.x))
    return junctions


def _circ_close(a: float, b: float) -> bool:
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d) <= _ANGLE_DEDUP_DEG


def render_target_heatmap(scene: AnnotatedScene) -> HeatMap:
    """Heat map whose pixels hold the length of the longest covering line."""
    values = np.zeros((scene.height, scene.width), dtype=np.float64)
    for seg in scene.lines:
        d = seg.length
        for x, y in rasterize_segment(seg, scene.width, scene.height):
            if d > values[y, x]:
                values[y, x] = d
    return HeatMap(scene.width, scene.height, values)
