"""Tolerance-based precision/recall for junctions and line-segment pixels.

Junction matching is one-to-one and greedy in ascending distance, with an
exhaustive maximum-matching oracle for small instances.  Line matching is
coverage-based at the pixel level via a distance transform.  Tolerance
defaults to 0.01 of the image diagonal.  Conventions: no predictions means
precision 1, no ground truth means recall 1, which keeps threshold sweeps
well-defined at the extremes.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage

from .annotate import rasterize_segment
from .geometry import GeometryError, Junction, Point, Segment

DEFAULT_TOLERANCE_FRAC = 0.01
DEFAULT_SWEEP = tuple(i / 10 for i in range(1, 10))


@dataclass(frozen=True)
class EvalConfig:
    tolerance_frac: float = DEFAULT_TOLERANCE_FRAC
    sweep: tuple[float, ...] = DEFAULT_SWEEP

    def __post_init__(self) -> None:
        if not self.tolerance_frac > 0:
            raise GeometryError(f"tolerance_frac={self.tolerance_frac} must be > 0")
        if any(a >= b for a, b in zip(self.sweep, self.sweep[1:])):
            raise GeometryError("sweep thresholds must be strictly increasing")

    def tolerance(self, width: int, height: int) -> float:
        return self.tolerance_frac * math.hypot(width, height)


@dataclass(frozen=True)
class PRPoint:
    threshold: float
    precision: float
    recall: float
    n_gt: int = 0
    n_pred: int = 0
    matched_gt: int = 0
    matched_pred: int = 0


@dataclass(frozen=True)
class PRCurve:
    points: tuple[PRPoint, ...] = ()


def _pr_from_counts(threshold: float, n_gt: int, n_pred: int,
                    matched_gt: int, matched_pred: int) -> PRPoint:
    precision = matched_pred / n_pred if n_pred else 1.0
    recall = matched_gt / n_gt if n_gt else 1.0
    return PRPoint(threshold, precision, recall, n_gt, n_pred, matched_gt, matched_pred)


def match_points(gt: Sequence[Point], pred: Sequence[Point], tol: float) -> int:
    """Greedy one-to-one matching: closest pairs first, each point used once."""
    pairs = sorted(
        (gt[i].distance_to(pred[j]), i, j)
        for i in range(len(gt)) for j in range(len(pred))
        if gt[i].distance_to(pred[j]) <= tol)
    used_g: set[int] = set()
    used_q: set[int] = set()
    matches = 0
    for _, i, j in pairs:
        if i in used_g or j in used_q:
            continue
        used_g.add(i)
        used_q.add(j)
        matches += 1
    return matches


def max_matching(gt: Sequence[Point], pred: Sequence[Point], tol: float) -> int:
    """Exhaustive maximum bipartite matching (augmenting paths).

    The optimal counterpart of match_points; intended as an oracle on small
    instances.
    """
    adj = [[j for j in range(len(pred)) if gt[i].distance_to(pred[j]) <= tol]
           for i in range(len(gt))]
    owner = [-1] * len(pred)

    def augment(i: int, seen: list[bool]) -> bool:
        for j in adj[i]:
            if seen[j]:
                continue
            seen[j] = True
            if owner[j] < 0 or augment(owner[j], seen):
                owner[j] = i
                return True
        return False

    total = 0
    for i in range(len(gt)):
        if augment(i, [False] * len(pred)):
            total += 1
    return total


def junction_pr(gt: Sequence[Junction], pred: Sequence[Junction],
                config: EvalConfig, width: int, height: int,
                threshold: float = 0.0) -> PRPoint:
    """One-to-one junction detection PR at the configured tolerance."""
    tol = config.tolerance(width, height)
    m = match_points([j.center for j in gt], [j.center for j in pred], tol)
    return _pr_from_counts(threshold, len(gt), len(pred), m, m)


def _pixel_set(segments: Sequence[Segment], width: int, height: int) -> set[tuple[int, int]]:
    out: set[tuple[int, int]] = set()
    for s in segments:
        out.update(rasterize_segment(s, width, height))
    return out


def _near_count(pixels: set[tuple[int, int]], others: set[tuple[int, int]],
                width: int, height: int, tol: float) -> int:
    """How many of `pixels` lie within tol of some pixel in `others`."""
    if not pixels or not others:
        return 0
    empty = np.ones((height, width), dtype=bool)
    for x, y in others:
        empty[y, x] = False
    dist = ndimage.distance_transform_edt(empty)
    return sum(1 for x, y in pixels if dist[y, x] <= tol)


def line_pixel_pr(gt: Sequence[Segment], pred: Sequence[Segment],
                  config: EvalConfig, width: int, height: int,
                  threshold: float = 0.0) -> PRPoint:
    """Coverage-based PR over rasterized line pixels."""
    tol = config.tolerance(width, height)
    gt_px = _pixel_set(gt, width, height)
    pred_px = _pixel_set(pred, width, height)
    matched_pred = _near_count(pred_px, gt_px, width, height, tol)
    matched_gt = _near_count(gt_px, pred_px, width, height, tol)
    return _pr_from_counts(threshold, len(gt_px), len(pred_px), matched_gt, matched_pred)


def pool_pr(threshold: float, per_image: Sequence[PRPoint]) -> PRPoint:
    """Dataset-level PR: sum raw counts across images, then divide."""
    return _pr_from_counts(
        threshold,
        sum(p.n_gt for p in per_image),
        sum(p.n_pred for p in per_image),
        sum(p.matched_gt for p in per_image),
        sum(p.matched_pred for p in per_image),
    )


def sweep_pr(eval_at: Callable[[float], PRPoint], config: EvalConfig) -> PRCurve:
    """Evaluate a thresholded detector at every sweep value, in order."""
    return PRCurve(tuple(
        dataclasses.replace(eval_at(t), threshold=t) for t in config.sweep))


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def emit_pr_csv(curve: PRCurve, path: str) -> None:
    lines = ["threshold,precision,recall"]
    lines += [f"{_fmt(p.threshold)},{_fmt(p.precision)},{_fmt(p.recall)}"
              for p in curve.points]
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def read_pr_csv(path: str) -> PRCurve:
    with open(path, "r", encoding="ascii") as f:
        rows = [line.strip() for line in f if line.strip()]
    if not rows or rows[0] != "threshold,precision,recall":
        raise GeometryError(f"{path}: not a PR curve CSV")
    points = []
    for row in rows[1:]:
        t, p, r = (float(v) for v in row.split(","))
        points.append(PRPoint(t, p, r))
    return PRCurve(tuple(points))


_SVG_SIZE = 480
_SVG_MARGIN = 50
_SVG_PLOT = _SVG_SIZE - 2 * _SVG_MARGIN


def _svg_x(recall: float) -> str:
    return _fmt(_SVG_MARGIN + recall * _SVG_PLOT)


def _svg_y(precision: float) -> str:
    return _fmt(_SVG_MARGIN + (1.0 - precision) * _SVG_PLOT)


def emit_pr_svg(curve: PRCurve, path: str) -> None:
    """Standalone PR plot: recall on x, precision on y, both [0, 1]."""
    s = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_SIZE}" '
         f'height="{_SVG_SIZE}" viewBox="0 0 {_SVG_SIZE} {_SVG_SIZE}">',
         f'<rect x="{_SVG_MARGIN}" y="{_SVG_MARGIN}" width="{_SVG_PLOT}" '
         f'height="{_SVG_PLOT}" fill="white" stroke="black"/>']
    for i in range(6):
        v = i / 5
        x, y = _svg_x(v), _svg_y(v)
        s.append(f'<text x="{x}" y="{_SVG_SIZE - _SVG_MARGIN + 20}" '
                 f'font-size="12" text-anchor="middle">{_fmt(v)}</text>')
        s.append(f'<text x="{_SVG_MARGIN - 8}" y="{y}" font-size="12" '
                 f'text-anchor="end">{_fmt(v)}</text>')
    s.append(f'<text x="{_SVG_SIZE // 2}" y="{_SVG_SIZE - 10}" font-size="14" '
             f'text-anchor="middle">recall</text>')
    s.append(f'<text x="14" y="{_SVG_SIZE // 2}" font-size="14" text-anchor="middle" '
             f'transform="rotate(-90 14 {_SVG_SIZE // 2})">precision</text>')
    if curve.points:
        pts = " ".join(f"{_svg_x(p.recall)},{_svg_y(p.precision)}" for p in curve.points)
        s.append(f'<polyline points="{pts}" fill="none" stroke="crimson" stroke-width="2"/>')
        for p in curve.points:
            s.append(f'<circle cx="{_svg_x(p.recall)}" cy="{_svg_y(p.precision)}" '
                     f'r="3" fill="crimson"/>')
            s.append(f'<text x="{_svg_x(p.recall)}" y="{_fmt(float(_svg_y(p.precision)) - 8)}" '
                     f'font-size="10" text-anchor="middle">{_fmt(p.threshold)}</text>')
    s.append("</svg>")
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write("\n".join(s) + "\n")


def emit_pr(curve: PRCurve, csv_path: str, svg_path: str) -> None:
    emit_pr_csv(curve, csv_path)
    emit_pr_svg(curve, svg_path)
