"""Probabilistic Hough baseline: segments straight from a binary mask.

Randomized-sampling Hough with progressive pixel removal: sample a set
pixel, vote over all angle bins, and once a (rho, theta) bin reaches the
vote threshold walk that line through the mask, bridging gaps up to
max_gap, to find the supporting run.  Runs at least min_length long are
emitted; a run's pixels are always consumed and their votes retracted, so
no line is found twice.  The generator is seeded, making the whole
procedure deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .construct import BinaryMask
from .geometry import GeometryError, Point, Segment

DEFAULT_VOTES = 30
DEFAULT_MIN_LENGTH = 20.0
DEFAULT_MAX_GAP = 3.0


@dataclass(frozen=True)
class HoughParams:
    rho_res: float = 1.0
    theta_res: float = 1.0
    votes: int = DEFAULT_VOTES
    min_length: float = DEFAULT_MIN_LENGTH
    max_gap: float = DEFAULT_MAX_GAP
    seed: int = 0

    def __post_init__(self) -> None:
        if self.rho_res <= 0 or self.theta_res <= 0:
            raise GeometryError("rho and theta resolutions must be > 0")
        if self.votes < 1:
            raise GeometryError(f"vote threshold {self.votes} must be >= 1")
        if self.min_length < 0 or self.max_gap < 0:
            raise GeometryError("min_length and max_gap must be >= 0")


def _walk_dir(alive: np.ndarray, x0: int, y0: int, dx: float, dy: float,
              max_gap: float) -> list[tuple[int, int]]:
    """Follow one direction of the line from (x0, y0) over alive pixels.

    Steps along the dominant axis; at each step the expected pixel and its
    two lateral neighbors are probed, and a hit re-centers the walk, which
    tolerates the accumulator's angle quantization.
    """
    h, w = alive.shape
    hits: list[tuple[int, int]] = []
    if abs(dx) >= abs(dy):
        sx = 1 if dx > 0 else -1
        slope = dy / dx * sx
        x, yf = x0, float(y0)
        gap = 0
        while True:
            x += sx
            yf += slope
            if not 0 <= x < w:
                break
            y = int(math.floor(yf + 0.5))
            found = None
            for yy in (y, y - 1, y + 1):
                if 0 <= yy < h and alive[yy, x]:
                    found = yy
                    break
            if found is None:
                gap += 1
                if gap > max_gap:
                    break
                continue
            gap = 0
            yf = float(found)
            hits.append((x, found))
    else:
        sy = 1 if dy > 0 else -1
        slope = dx / dy * sy
        y, xf = y0, float(x0)
        gap = 0
        while True:
            y += sy
            xf += slope
            if not 0 <= y < h:
                break
            x = int(math.floor(xf + 0.5))
            found = None
            for xx in (x, x - 1, x + 1):
                if 0 <= xx < w and alive[y, xx]:
                    found = xx
                    break
            if found is None:
                gap += 1
                if gap > max_gap:
                    break
                continue
            gap = 0
            xf = float(found)
            hits.append((found, y))
    return hits


def hough_segments(mask: BinaryMask, params: HoughParams = HoughParams()) -> list[Segment]:
    """Extract line segments from a binary mask."""
    ys, xs = np.nonzero(mask.bits)
    pool = list(zip(xs.tolist(), ys.tolist()))
    if not pool:
        return []
    alive = mask.bits.copy()
    voted = np.zeros_like(alive)

    n_theta = max(1, int(round(180.0 / params.theta_res)))
    thetas = np.arange(n_theta) * math.radians(params.theta_res)
    cos_t, sin_t = np.cos(thetas), np.sin(thetas)
    diag = math.hypot(mask.width, mask.height)
    rho_off = int(math.ceil(diag / params.rho_res))
    acc = np.zeros((n_theta, 2 * rho_off + 1), dtype=np.int64)

    def rho_bins(x: int, y: int) -> np.ndarray:
        return np.rint((x * cos_t + y * sin_t) / params.rho_res).astype(np.int64) + rho_off

    rng = np.random.default_rng(params.seed)
    segments: list[Segment] = []
    theta_idx = np.arange(n_theta)

    while pool:
        j = int(rng.integers(len(pool)))
        x0, y0 = pool[j]
        pool[j] = pool[-1]
        pool.pop()
        if not alive[y0, x0]:
            continue
        bins = rho_bins(x0, y0)
        acc[theta_idx, bins] += 1
        voted[y0, x0] = True
        k = int(np.argmax(acc[theta_idx, bins]))
        if acc[k, bins[k]] < params.votes:
            continue

        # follow the winning direction through the mask, both ways
        dx, dy = -sin_t[k], cos_t[k]
        fwd = _walk_dir(alive, x0, y0, dx, dy, params.max_gap)
        bwd = _walk_dir(alive, x0, y0, -dx, -dy, params.max_gap)
        run = bwd[::-1] + [(x0, y0)] + fwd
        ex1, ex2 = run[0], run[-1]

        for x, y in run:
            alive[y, x] = False
            if voted[y, x]:
                acc[theta_idx, rho_bins(x, y)] -= 1
                voted[y, x] = False

        if math.hypot(ex2[0] - ex1[0], ex2[1] - ex1[1]) >= params.min_length:
            segments.append(Segment(Point(float(ex1[0]), float(ex1[1])),
                                    Point(float(ex2[0]), float(ex2[1]))))
    return segments
