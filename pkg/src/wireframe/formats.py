"""File formats: scene/junction/wireframe JSON, the WFHM heat-map binary,
and the grid-encoding JSON.

JSON numbers are serialized with up to 9 significant digits, so writers are
a fixed point of write -> read -> write.  The WFHM container is magic
"WFHM", version u16 = 1, width u32, height u32 (little-endian), then
width x height little-endian float32 values in row-major order; its total
length is exactly 14 + 4 * width * height bytes.
"""

from __future__ import annotations

import json
import struct
from typing import Sequence

import numpy as np

from .annotate import AnnotatedScene, HeatMap
from .geometry import Branch, GeometryError, Junction, Point, Segment, Wireframe
from .gridcodec import GridConfig, GridEncoding

WFHM_MAGIC = b"WFHM"
WFHM_VERSION = 1
WFHM_HEADER = struct.Struct("<4sHII")


class FormatError(ValueError):
    """Malformed or inconsistent file content."""


def _round9(v: float) -> float:
    return float(f"{float(v):.9g}")


def _dump(obj, path: str) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        json.dump(obj, f, indent=1, sort_keys=False)
        f.write("\n")


def _load(path: str):
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: invalid JSON ({e})") from e


def _require(cond: bool, path: str, why: str) -> None:
    if not cond:
        raise FormatError(f"{path}: {why}")


# -- scenes (also the segment-list output of the Hough baseline) --

def write_scene(scene: AnnotatedScene, path: str) -> None:
    _dump({
        "width": scene.width,
        "height": scene.height,
        "lines": [[_round9(s.a.x), _round9(s.a.y), _round9(s.b.x), _round9(s.b.y)]
                  for s in scene.lines],
    }, path)


def read_scene(path: str) -> AnnotatedScene:
    doc = _load(path)
    _require(isinstance(doc, dict), path, "scene must be a JSON object")
    for key in ("width", "height", "lines"):
        _require(key in doc, path, f"missing key {key!r}")
    _require(isinstance(doc["width"], int) and isinstance(doc["height"], int),
             path, "width/height must be integers")
    lines = []
    for i, row in enumerate(doc["lines"]):
        _require(isinstance(row, list) and len(row) == 4,
                 path, f"lines[{i}] must be [x1, y1, x2, y2]")
        x1, y1, x2, y2 = (float(v) for v in row)
        try:
            lines.append(Segment(Point(x1, y1), Point(x2, y2)))
        except GeometryError as e:
            raise FormatError(f"{path}: lines[{i}]: {e}") from e
    try:
        return AnnotatedScene(doc["width"], doc["height"], tuple(lines))
    except GeometryError as e:
        raise FormatError(f"{path}: {e}") from e


def segments_of(scene: AnnotatedScene) -> list[Segment]:
    return list(scene.lines)


# -- junction predictions / ground truth --

def write_junctions(width: int, height: int, junctions: Sequence[Junction],
                    path: str) -> None:
    _dump({
        "width": width,
        "height": height,
        "junctions": [{
            "x": _round9(j.center.x),
            "y": _round9(j.center.y),
            "score": _round9(j.confidence),
            "branches": [{"theta": _round9(b.angle_deg), "score": _round9(b.confidence)}
                         for b in j.branches],
        } for j in junctions],
    }, path)


def read_junctions(path: str) -> tuple[int, int, list[Junction]]:
    doc = _load(path)
    _require(isinstance(doc, dict) and {"width", "height", "junctions"} <= set(doc),
             path, "junction file needs width, height, junctions")
    out = []
    for i, rec in enumerate(doc["junctions"]):
        score = float(rec.get("score", 1.0))
        _require(0.0 <= score <= 1.0, path, f"junctions[{i}]: score {score} outside [0,1]")
        branches = []
        for k, br in enumerate(rec.get("branches", [])):
            theta = float(br["theta"])
            bscore = float(br.get("score", 1.0))
            _require(0.0 <= theta < 360.0, path,
                     f"junctions[{i}].branches[{k}]: theta {theta} outside [0,360)")
            _require(0.0 <= bscore <= 1.0, path,
                     f"junctions[{i}].branches[{k}]: score {bscore} outside [0,1]")
            branches.append(Branch(theta, bscore))
        try:
            out.append(Junction(Point(float(rec["x"]), float(rec["y"])),
                                tuple(branches), score))
        except (KeyError, GeometryError) as e:
            raise FormatError(f"{path}: junctions[{i}]: {e}") from e
    return int(doc["width"]), int(doc["height"]), out


# -- heat maps (WFHM binary) --

def write_heatmap(hm: HeatMap, path: str) -> None:
    data = np.ascontiguousarray(hm.values, dtype="<f4")
    with open(path, "wb") as f:
        f.write(WFHM_HEADER.pack(WFHM_MAGIC, WFHM_VERSION, hm.width, hm.height))
        f.write(data.tobytes())


def read_heatmap(path: str) -> HeatMap:
    with open(path, "rb") as f:
        blob = f.read()
    _require(len(blob) >= WFHM_HEADER.size, path, "truncated WFHM header")
    magic, version, width, height = WFHM_HEADER.unpack_from(blob)
    _require(magic == WFHM_MAGIC, path, f"bad magic {magic!r}")
    _require(version == WFHM_VERSION, path, f"unsupported version {version}")
    want = WFHM_HEADER.size + 4 * width * height
    _require(len(blob) == want, path,
             f"length {len(blob)} != {want} (14 + 4*{width}*{height})")
    values = np.frombuffer(blob, dtype="<f4", offset=WFHM_HEADER.size)
    values = values.reshape(height, width).astype(np.float64)
    _require(bool(np.isfinite(values).all()) and bool((values >= 0).all()),
             path, "heat values must be finite and >= 0")
    return HeatMap(width, height, values)


# -- wireframes --

def write_wireframe(wf: Wireframe, width: int, height: int, path: str) -> None:
    index = {(j.center.x, j.center.y): n for n, j in enumerate(wf.junctions)}
    segments = []
    for m, s in enumerate(wf.segments):
        try:
            segments.append([index[(s.a.x, s.a.y)], index[(s.b.x, s.b.y)]])
        except KeyError:
            raise FormatError(
                f"{path}: segment {m} endpoint is not a junction center") from None
    incidence = [[int(n), int(m), 1] for n, m in zip(*np.nonzero(wf.incidence))]
    _dump({
        "width": width,
        "height": height,
        "junctions": [{
            "x": _round9(j.center.x),
            "y": _round9(j.center.y),
            "score": _round9(j.confidence),
            "derived": bool(j.derived),
            "branches": [{"theta": _round9(b.angle_deg), "score": _round9(b.confidence)}
                         for b in j.branches],
        } for j in wf.junctions],
        "segments": segments,
        "incidence": incidence,
    }, path)


def read_wireframe(path: str) -> tuple[int, int, Wireframe]:
    doc = _load(path)
    _require(isinstance(doc, dict) and {"width", "height", "junctions", "segments"}
             <= set(doc), path, "wireframe file needs width, height, junctions, segments")
    junctions = []
    for i, rec in enumerate(doc["junctions"]):
        branches = tuple(Branch(float(b["theta"]), float(b.get("score", 1.0)))
                         for b in rec.get("branches", []))
        junctions.append(Junction(Point(float(rec["x"]), float(rec["y"])), branches,
                                  float(rec.get("score", 1.0)),
                                  bool(rec.get("derived", False))))
    n = len(junctions)
    segments = []
    for m, pair in enumerate(doc["segments"]):
        _require(isinstance(pair, list) and len(pair) == 2, path,
                 f"segments[{m}] must be an index pair")
        a, b = int(pair[0]), int(pair[1])
        _require(0 <= a < n and 0 <= b < n, path, f"segments[{m}] index out of range")
        try:
            segments.append(Segment(junctions[a].center, junctions[b].center))
        except GeometryError as e:
            raise FormatError(f"{path}: segments[{m}]: {e}") from e
    incidence = np.zeros((n, len(segments)), dtype=np.int64)
    for t, triplet in enumerate(doc.get("incidence", [])):
        _require(isinstance(triplet, list) and len(triplet) == 3, path,
                 f"incidence[{t}] must be [junction, segment, 1]")
        jn, m, bit = (int(v) for v in triplet)
        _require(0 <= jn < n and 0 <= m < len(segments) and bit == 1, path,
                 f"incidence[{t}] out of range")
        incidence[jn, m] = 1
    return int(doc["width"]), int(doc["height"]), Wireframe(junctions, segments, incidence)


# -- grid encodings --

def write_grid(enc: GridEncoding, path: str) -> None:
    cfg = enc.config
    _dump({
        "config": {"image_w": cfg.image_w, "image_h": cfg.image_h,
                   "grid_w": cfg.grid_w, "grid_h": cfg.grid_h, "bins": cfg.bins},
        "center_conf": _round_nested(enc.center_conf),
        "displacement": _round_nested(enc.displacement),
        "bin_conf": _round_nested(enc.bin_conf),
        "bin_residual": _round_nested(enc.bin_residual),
    }, path)


def _round_nested(arr: np.ndarray):
    if arr.ndim == 1:
        return [_round9(v) for v in arr]
    return [_round_nested(sub) for sub in arr]


def read_grid(path: str) -> GridEncoding:
    doc = _load(path)
    _require(isinstance(doc, dict) and "config" in doc, path, "grid file needs config")
    c = doc["config"]
    try:
        cfg = GridConfig(int(c["image_w"]), int(c["image_h"]), int(c["grid_w"]),
                         int(c["grid_h"]), int(c["bins"]))
        return GridEncoding(cfg,
                            center_conf=np.array(doc["center_conf"], dtype=np.float64),
                            displacement=np.array(doc["displacement"], dtype=np.float64),
                            bin_conf=np.array(doc["bin_conf"], dtype=np.float64),
                            bin_residual=np.array(doc["bin_residual"], dtype=np.float64))
    except (KeyError, ValueError, GeometryError) as e:
        raise FormatError(f"{path}: {e}") from e
