"""Command-line interface.

Subcommands: derive-gt (scene -> junctions + heat map), construct
(junctions + heat map -> wireframe), hough (heat map -> segments), eval
(junctions|lines PR sweep over a file or directory pair), loss (grid
prediction vs scene).  Every option can also come from a --config file of
`key = value` lines; explicit flags beat the config file, which beats
built-in defaults.  Exit codes: 0 success, 2 usage error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from .annotate import (
    AnnotatedScene,
    DEFAULT_MERGE_RADIUS,
    derive_junctions,
    render_target_heatmap,
)
from .construct import ConstructionParams, binarize, construct_wireframe
from .evaluate import (
    DEFAULT_TOLERANCE_FRAC,
    EvalConfig,
    PRCurve,
    emit_pr_csv,
    emit_pr_svg,
    junction_pr,
    line_pixel_pr,
    pool_pr,
)
from .formats import (
    FormatError,
    read_grid,
    read_heatmap,
    read_junctions,
    read_scene,
    write_heatmap,
    write_junctions,
    write_scene,
    write_wireframe,
)
from .geometry import GeometryError
from .gridcodec import CellCollisionError, encode
from .hough import HoughParams, hough_segments
from .losses import (
    DEFAULT_NEG_POS_RATIO,
    LossWeights,
    junction_loss,
    sample_cells,
)

DEFAULT_SWEEP_SPEC = "0.1:0.9:0.1"


def _read_config_file(path: str) -> dict[str, str]:
    opts: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            for ln, raw in enumerate(f, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise FormatError(f"{path}:{ln}: expected `key = value`")
                key, value = line.split("=", 1)
                opts[key.strip().replace("-", "_")] = value.strip()
    except OSError as e:
        raise FormatError(f"cannot read config {path}: {e}") from e
    return opts


class _Options:
    """Flag > config-file > default resolution."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.file = _read_config_file(args.config) if args.config else {}

    def get(self, name: str, default, cast):
        flag = getattr(self.args, name, None)
        if flag is not None:
            return flag
        if name in self.file:
            try:
                return cast(self.file[name])
            except ValueError as e:
                raise FormatError(f"config key {name}: {e}") from e
        return default


def _parse_sweep(spec: str) -> tuple[float, ...]:
    try:
        start, stop, step = (float(v) for v in spec.split(":"))
    except ValueError as e:
        raise FormatError(f"sweep {spec!r}: expected start:stop:step") from e
    if step <= 0:
        raise FormatError(f"sweep {spec!r}: step must be > 0")
    values = []
    t = start
    while t <= stop + 1e-9:
        values.append(round(t, 9))
        t += step
    return tuple(values)


def _parse_weights(spec: str) -> LossWeights:
    parts = spec.split(",")
    if len(parts) != 4:
        raise FormatError(f"weights {spec!r}: expected 4 comma-separated values")
    return LossWeights(*(float(v) for v in parts))


def cmd_derive_gt(args: argparse.Namespace) -> int:
    opts = _Options(args)
    merge_radius = opts.get("merge_radius", DEFAULT_MERGE_RADIUS, float)
    scene = read_scene(args.scene)
    if args.out_junctions:
        write_junctions(scene.width, scene.height,
                        derive_junctions(scene, merge_radius), args.out_junctions)
    if args.out_heatmap:
        write_heatmap(render_target_heatmap(scene), args.out_heatmap)
    return 0


def cmd_construct(args: argparse.Namespace) -> int:
    opts = _Options(args)
    params = ConstructionParams(
        omega=opts.get("omega", ConstructionParams.omega, float),
        tau_c=opts.get("tau_c", ConstructionParams.tau_c, float),
        tau_b=opts.get("tau_b", ConstructionParams.tau_b, float),
        delta_ray=opts.get("delta_ray", ConstructionParams.delta_ray, float),
        rho_nms=opts.get("rho_nms", ConstructionParams.rho_nms, float),
    )
    jw, jh, junctions = read_junctions(args.junctions)
    hm = read_heatmap(args.heatmap)
    if (jw, jh) != (hm.width, hm.height):
        raise FormatError(f"junction image {jw}x{jh} != heat map {hm.width}x{hm.height}")
    wf = construct_wireframe(junctions, hm, params)
    write_wireframe(wf, hm.width, hm.height, args.out)
    return 0


def cmd_hough(args: argparse.Namespace) -> int:
    opts = _Options(args)
    omega = opts.get("omega", ConstructionParams.omega, float)
    seed = opts.get("seed", 0, int)
    hm = read_heatmap(args.heatmap)
    segments = hough_segments(binarize(hm, omega), HoughParams(seed=seed))
    write_scene(AnnotatedScene(hm.width, hm.height, tuple(segments)), args.out)
    return 0


def _pair_files(gt: str, pred: str) -> list[tuple[str, Optional[str]]]:
    """Pair GT and prediction paths.

    Directories pair by file name; a GT name with no prediction counts as an
    empty detection set, but predictions without ground truth are an error.
    """
    if os.path.isdir(gt) != os.path.isdir(pred):
        raise FormatError("--gt and --pred must both be files or both directories")
    if not os.path.isdir(gt):
        return [(gt, pred)]
    gt_names = sorted(n for n in os.listdir(gt) if not n.startswith("."))
    pred_names = {n for n in os.listdir(pred) if not n.startswith(".")}
    extra = sorted(pred_names - set(gt_names))
    if extra:
        raise FormatError("predictions with no ground truth: " + ", ".join(extra))
    if not gt_names:
        raise FormatError(f"no ground-truth files in {gt}")
    return [(os.path.join(gt, n),
             os.path.join(pred, n) if n in pred_names else None)
            for n in gt_names]


def cmd_eval(args: argparse.Namespace) -> int:
    opts = _Options(args)
    tol_frac = opts.get("tol_frac", DEFAULT_TOLERANCE_FRAC, float)
    sweep = _parse_sweep(opts.get("sweep", DEFAULT_SWEEP_SPEC, str))
    config = EvalConfig(tolerance_frac=tol_frac, sweep=sweep)
    pairs = _pair_files(args.gt, args.pred)

    images = []
    if args.mode == "junctions":
        for gt_path, pred_path in pairs:
            w, h, gt_js = read_junctions(gt_path)
            pred_js = read_junctions(pred_path)[2] if pred_path else []
            images.append((w, h, gt_js, pred_js))

        def eval_one(img, t):
            w, h, gt_js, pred_js = img
            return junction_pr(gt_js, [j for j in pred_js if j.confidence > t],
                               config, w, h, threshold=t)
    else:
        for gt_path, pred_path in pairs:
            scene = read_scene(gt_path)
            pred_lines = list(read_scene(pred_path).lines) if pred_path else []
            images.append((scene.width, scene.height, list(scene.lines), pred_lines))

        def eval_one(img, t):
            w, h, gt_segs, pred_segs = img
            # segment lists carry no confidences; the sweep is flat
            return line_pixel_pr(gt_segs, pred_segs, config, w, h, threshold=t)

    curve = PRCurve(tuple(
        pool_pr(t, [eval_one(img, t) for img in images]) for t in sweep))
    for p in curve.points:
        print(f"{p.threshold:.6g},{p.precision:.6g},{p.recall:.6g}")
    if args.csv:
        emit_pr_csv(curve, args.csv)
    if args.svg:
        emit_pr_svg(curve, args.svg)
    return 0


def cmd_loss(args: argparse.Namespace) -> int:
    opts = _Options(args)
    weights = _parse_weights(opts.get("weights", "1,0.1,1,0.1", str))
    r_max = opts.get("rmax", DEFAULT_NEG_POS_RATIO, float)
    seed = opts.get("seed", 0, int)
    merge_radius = opts.get("merge_radius", DEFAULT_MERGE_RADIUS, float)

    pred = read_grid(args.pred_grid)
    scene = read_scene(args.scene)
    if (scene.width, scene.height) != (pred.config.image_w, pred.config.image_h):
        raise FormatError(
            f"scene {scene.width}x{scene.height} != grid image "
            f"{pred.config.image_w}x{pred.config.image_h}")
    gt = derive_junctions(scene, merge_radius)
    mask = sample_cells(encode(gt, pred.config), r_max, seed)
    report = junction_loss(pred, gt, weights, mask)
    doc = {name: float(f"{getattr(report, name):.9g}")
           for name in ("total", "conf_c", "loc_c", "conf_b", "loc_b")}
    print(json.dumps(doc))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wireframe",
        description="Wireframe geometry toolkit: ground truth, construction, "
                    "baselines, and evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="file of `key = value` option overrides")

    p = sub.add_parser("derive-gt", help="derive junctions and heat map from a scene")
    p.add_argument("--scene", required=True)
    p.add_argument("--out-junctions")
    p.add_argument("--out-heatmap")
    p.add_argument("--merge-radius", type=float)
    common(p)
    p.set_defaults(func=cmd_derive_gt)

    p = sub.add_parser("construct", help="build a wireframe from junctions + heat map")
    p.add_argument("--junctions", required=True)
    p.add_argument("--heatmap", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--omega", type=float)
    p.add_argument("--tau-c", type=float, dest="tau_c")
    p.add_argument("--tau-b", type=float, dest="tau_b")
    p.add_argument("--delta-ray", type=float, dest="delta_ray")
    p.add_argument("--rho-nms", type=float, dest="rho_nms")
    common(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("hough", help="probabilistic Hough baseline on a heat map")
    p.add_argument("--heatmap", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--omega", type=float)
    p.add_argument("--seed", type=int)
    common(p)
    p.set_defaults(func=cmd_hough)

    p = sub.add_parser("eval", help="precision/recall sweep")
    p.add_argument("mode", choices=("junctions", "lines"))
    p.add_argument("--gt", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--tol-frac", type=float, dest="tol_frac")
    p.add_argument("--sweep", help="start:stop:step, default " + DEFAULT_SWEEP_SPEC)
    p.add_argument("--csv")
    p.add_argument("--svg")
    common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("loss", help="junction loss of a grid prediction vs a scene")
    p.add_argument("--pred-grid", required=True, dest="pred_grid")
    p.add_argument("--scene", required=True)
    p.add_argument("--weights")
    p.add_argument("--rmax", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--merge-radius", type=float)
    common(p)
    p.set_defaults(func=cmd_loss)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, GeometryError, CellCollisionError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
