"""Wireframe construction: merge detected junctions with the line heat map.

Pipeline: threshold and deduplicate the junctions, binarize the heat map,
shoot a ray from every junction branch, connect mutually nearest aligned
ray pairs into segments, then try to rescue every unmatched ray, either as a
short segment to the image boundary or by walking the heat-map support and
keeping well-covered pieces.  Endpoints that are not detected junctions
enter the output as order-1 points flagged "derived".

Everything here is deterministic: identical inputs give identical output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .annotate import HeatMap, rasterize_segment
from .geometry import (
    Branch,
    GeometryError,
    Junction,
    Point,
    Segment,
    Wireframe,
    angle_diff,
    build_incidence,
    direction_deg,
    normalize_angle,
    segment_intersection,
)

DEFAULT_OMEGA = 10.0
DEFAULT_DELTA_RAY = 12.0  # half a 24-degree angle bin
DEFAULT_RHO_NMS = 2.0
DEFAULT_BOUNDARY_FRAC = 0.05
DEFAULT_KAPPA_MIN = 0.6
MIN_PIECE_LEN = 3.0
DEFAULT_MAX_WALK_GAP = 3.0


@dataclass(frozen=True)
class Ray:
    """Branch k of junction i, as a ray from the junction center."""
    junction: int
    branch: int
    origin: Point
    angle_deg: float


@dataclass
class BinaryMask:
    width: int
    height: int
    bits: np.ndarray = None

    def __post_init__(self) -> None:
        if self.bits is None:
            self.bits = np.zeros((self.height, self.width), dtype=bool)
        self.bits = np.asarray(self.bits, dtype=bool)
        if self.bits.shape != (self.height, self.width):
            raise GeometryError(
                f"mask shape {self.bits.shape} != ({self.height}, {self.width})")


@dataclass(frozen=True)
class ConstructionParams:
    omega: float = DEFAULT_OMEGA
    tau_c: float = 0.5
    tau_b: float = 0.5
    delta_ray: float = DEFAULT_DELTA_RAY
    rho_nms: float = DEFAULT_RHO_NMS
    boundary_frac: float = DEFAULT_BOUNDARY_FRAC
    kappa_min: float = DEFAULT_KAPPA_MIN
    min_piece_len: float = MIN_PIECE_LEN
    max_walk_gap: float = DEFAULT_MAX_WALK_GAP

    def __post_init__(self) -> None:
        for name in ("omega", "tau_c", "tau_b", "delta_ray", "rho_nms",
                     "boundary_frac", "kappa_min", "min_piece_len",
                     "max_walk_gap"):
            if getattr(self, name) < 0:
                raise GeometryError(f"{name} must be >= 0")
        if not 0.0 <= self.kappa_min <= 1.0:
            raise GeometryError(f"kappa_min={self.kappa_min} outside [0, 1]")


def binarize(h: HeatMap, omega: float) -> BinaryMask:
    """Mask of pixels with heat strictly above omega."""
    return BinaryMask(h.width, h.height, h.values > omega)


def dedup_junctions(junctions: Sequence[Junction], rho_nms: float) -> list[Junction]:
    """Greedy duplicate suppression.

    Walk junctions in descending confidence (ties by (y, x)); drop any
    junction within rho_nms of one already kept.
    """
    order = sorted(junctions, key=lambda j: (-j.confidence, j.center.y, j.center.x))
    kept: list[Junction] = []
    for j in order:
        if all(j.center.distance_to(k.center) > rho_nms for k in kept):
            kept.append(j)
    return kept


def junction_rays(junctions: Sequence[Junction]) -> list[Ray]:
    """One ray per branch of every junction, in (junction, branch) order."""
    return [Ray(i, k, j.center, normalize_angle(b.angle_deg))
            for i, j in enumerate(junctions) for k, b in enumerate(j.branches)]


def _on_ray(origin: Point, angle_deg: float, q: Point, delta_ray: float) -> bool:
    if q.x == origin.x and q.y == origin.y:
        return False
    return abs(angle_diff(direction_deg(origin, q), angle_deg)) <= delta_ray


def match_ray_pairs(junctions: Sequence[Junction],
                    delta_ray: float = DEFAULT_DELTA_RAY) -> list[tuple[Ray, Ray]]:
    """Mutually nearest aligned ray pairs.

    A ray points at the nearest junction that lies along it and that aims a
    branch back along the reverse direction; two rays pointing at each other
    form a pair.  Each ray lands in at most one pair.
    """
    rays = junction_rays(junctions)
    by_junction: dict[int, list[Ray]] = {}
    for r in rays:
        by_junction.setdefault(r.junction, []).append(r)

    choice: dict[tuple[int, int], tuple[int, int]] = {}
    for r in rays:
        best: Optional[tuple[float, int, int]] = None
        for j, jn in enumerate(junctions):
            if j == r.junction or not _on_ray(r.origin, r.angle_deg, jn.center, delta_ray):
                continue
            d = r.origin.distance_to(jn.center)
            for back in by_junction.get(j, ()):
                if not _on_ray(back.origin, back.angle_deg, r.origin, delta_ray):
                    continue
                cand = (d, j, back.branch)
                if best is None or cand < best:
                    best = cand
        if best is not None:
            choice[(r.junction, r.branch)] = (best[1], best[2])

    pairs = []
    for r in rays:
        t1 = (r.junction, r.branch)
        t2 = choice.get(t1)
        if t2 is None or t2 < t1:
            continue
        if choice.get(t2) == t1:
            pairs.append((r, Ray(t2[0], t2[1], junctions[t2[0]].center,
                                 normalize_angle(junctions[t2[0]].branches[t2[1]].angle_deg))))
    return pairs


def match_rays(junctions: Sequence[Junction],
               delta_ray: float = DEFAULT_DELTA_RAY) -> list[Segment]:
    """Segments joining mutually matched junction pairs."""
    return [Segment(a.origin, b.origin) for a, b in match_ray_pairs(junctions, delta_ray)]


def ray_boundary_point(origin: Point, angle_deg: float,
                       width: int, height: int) -> Optional[Point]:
    """Where the ray exits the pixel box [0, w-1] x [0, h-1]; None when the
    origin is already outside."""
    if not (0.0 <= origin.x <= width - 1 and 0.0 <= origin.y <= height - 1):
        return None
    dx = math.cos(math.radians(angle_deg))
    dy = math.sin(math.radians(angle_deg))
    t_exit = math.inf
    if dx > 0:
        t_exit = min(t_exit, (width - 1 - origin.x) / dx)
    elif dx < 0:
        t_exit = min(t_exit, -origin.x / dx)
    if dy > 0:
        t_exit = min(t_exit, (height - 1 - origin.y) / dy)
    elif dy < 0:
        t_exit = min(t_exit, -origin.y / dy)
    if not math.isfinite(t_exit):
        return None
    return Point(origin.x + t_exit * dx, origin.y + t_exit * dy)


def _ray_pixels(origin: Point, angle_deg: float, mask: BinaryMask) -> list[tuple[int, int]]:
    end = ray_boundary_point(origin, angle_deg, mask.width, mask.height)
    if end is None:
        return []
    if abs(end.x - origin.x) < 0.5 and abs(end.y - origin.y) < 0.5:
        return []
    return rasterize_segment(Segment(origin, end), mask.width, mask.height)


def farthest_mask_point(origin: Point, angle_deg: float, mask: BinaryMask,
                        max_gap: float = DEFAULT_MAX_WALK_GAP) -> Optional[Point]:
    """Farthest supporting mask pixel found walking the rasterized ray.

    Digital lines of the same geometric line drawn from different anchors
    disagree by one pixel across the dominant axis, so each ray pixel also
    probes its two lateral neighbours.  The walk stops once more than
    max_gap consecutive ray pixels find no support, which keeps an
    unrelated faraway line from dragging the endpoint past the real one.
    Returns the supporting mask pixel itself, not the ray pixel.
    """
    rad = math.radians(angle_deg)
    # lateral = across the dominant axis of travel
    across_y = abs(math.cos(rad)) >= abs(math.sin(rad))
    last = None
    misses = 0
    for x, y in _ray_pixels(origin, angle_deg, mask):
        probes = ((x, y), (x, y - 1), (x, y + 1)) if across_y \
            else ((x, y), (x - 1, y), (x + 1, y))
        hit = None
        for px, py in probes:
            if 0 <= px < mask.width and 0 <= py < mask.height and mask.bits[py, px]:
                hit = (px, py)
                break
        if hit is not None:
            last = hit
            misses = 0
        else:
            misses += 1
            if misses > max_gap:
                break
    if last is None:
        return None
    return Point(float(last[0]), float(last[1]))


def line_support_ratio(a: Point, b: Point, mask: BinaryMask) -> float:
    """Fraction of the rasterized a-b pixels set in the mask (0 if none)."""
    if a.x == b.x and a.y == b.y:
        return 0.0
    pixels = rasterize_segment(Segment(a, b), mask.width, mask.height)
    if not pixels:
        return 0.0
    hit = sum(1 for x, y in pixels if mask.bits[y, x])
    return hit / len(pixels)


def recover_unmatched(junctions: Sequence[Junction], unmatched: Sequence[Ray],
                      mask: BinaryMask, segments: Sequence[Segment],
                      params: ConstructionParams) -> tuple[list[Point], list[Segment]]:
    """Rescue pass over rays that found no partner junction.

    A ray whose boundary exit is within boundary_frac * max(w, h) of its
    origin becomes a segment to the boundary.  Otherwise the ray walks the
    mask to its farthest supported pixel; the stretch is split where it
    crosses known segments and every piece with support ratio above
    kappa_min survives.  Newly created endpoints are reported as points.
    New segments join the splitting pool immediately, so later rays split
    against them.
    """
    limit = params.boundary_frac * max(mask.width, mask.height)
    pool = list(segments)
    new_points: list[Point] = []
    point_keys: set[tuple[float, float]] = {(j.center.x, j.center.y) for j in junctions}
    new_segments: list[Segment] = []

    def add(a: Point, b: Point) -> None:
        s = Segment(a, b)
        pool.append(s)
        new_segments.append(s)
        for p in (a, b):
            if (p.x, p.y) not in point_keys:
                point_keys.add((p.x, p.y))
                new_points.append(p)

    for ray in sorted(unmatched, key=lambda r: (r.junction, r.branch)):
        q_b = ray_boundary_point(ray.origin, ray.angle_deg, mask.width, mask.height)
        if q_b is not None and 0.0 < ray.origin.distance_to(q_b) <= limit:
            add(ray.origin, q_b)
            continue

        q_m = farthest_mask_point(ray.origin, ray.angle_deg, mask,
                                  params.max_walk_gap)
        if q_m is None or ray.origin.distance_to(q_m) < params.min_piece_len:
            continue
        whole = Segment(ray.origin, q_m)
        cuts: list[Point] = []
        for s in pool:
            hit = segment_intersection(whole, s)
            if hit.point is None:
                continue
            if all(hit.point.distance_to(c) > 1e-6 for c in cuts):
                cuts.append(hit.point)
        cuts = [c for c in cuts
                if c.distance_to(ray.origin) > 1e-9 and c.distance_to(q_m) > 1e-9]
        cuts.sort(key=lambda c: c.distance_to(ray.origin))
        stops = [ray.origin] + cuts + [q_m]
        for a, b in zip(stops, stops[1:]):
            if a.distance_to(b) < params.min_piece_len:
                continue
            if line_support_ratio(a, b, mask) > params.kappa_min:
                add(a, b)
    return new_points, new_segments


def construct_wireframe(junctions: Sequence[Junction], h: HeatMap,
                        params: ConstructionParams = ConstructionParams()) -> Wireframe:
    """Full pipeline from detected junctions and a line heat map."""
    confident = []
    for j in junctions:
        if j.confidence <= params.tau_c:
            continue
        branches = tuple(b for b in j.branches if b.confidence > params.tau_b)
        if branches:
            confident.append(Junction(j.center, branches, j.confidence))
    kept = dedup_junctions(confident, params.rho_nms)

    mask = binarize(h, params.omega)
    pairs = match_ray_pairs(kept, params.delta_ray)
    matched_segments = [Segment(a.origin, b.origin) for a, b in pairs]
    taken = {(r.junction, r.branch) for pair in pairs for r in pair}
    unmatched = [r for r in junction_rays(kept) if (r.junction, r.branch) not in taken]
    new_points, new_segments = recover_unmatched(kept, unmatched, mask,
                                                 matched_segments, params)

    segments: list[Segment] = []
    seen: set[tuple[tuple[float, float], tuple[float, float]]] = set()
    for s in matched_segments + new_segments:
        key = tuple(sorted(((s.a.x, s.a.y), (s.b.x, s.b.y))))
        if key not in seen:
            seen.add(key)
            segments.append(s)

    centers = {(j.center.x, j.center.y) for j in kept}
    derived: dict[tuple[float, float], set[float]] = {}
    for s in new_segments:
        for p, other in ((s.a, s.b), (s.b, s.a)):
            if (p.x, p.y) in centers:
                continue
            derived.setdefault((p.x, p.y), set()).add(direction_deg(p, other))
    points = list(kept)
    for (x, y) in sorted(derived, key=lambda xy: (xy[1], xy[0])):
        branches = tuple(Branch(a, 1.0) for a in sorted(derived[(x, y)]))
        points.append(Junction(Point(x, y), branches, confidence=1.0, derived=True))

    return Wireframe(points, segments, build_incidence(points, segments, tol=1.0))
