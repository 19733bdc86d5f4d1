"""Command-line interface.

Subcommands:
    prep          clean, augment, resize, and split a raw dataset
    characterize  per-frame pothole reports and overlays
    evaluate      detection/segmentation metrics from gt + pred files
    depth-eval    RMSE of predicted depth maps against ground truth
    synth         generate synthetic scenes with known ground truth

Exit status: 0 on success, 1 on data errors (with a JSON diagnostic on
stderr), 2 on usage errors. All randomness is controlled by --seed.
"""

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import dataset as ds
from .annotations import parse_annotation_file, write_annotation_file
from .characterize import frame_report, normalize_depth
from .config import load_config
from .deptheval import evaluate_set
from .errors import MissingCounterpart, RoadcharError
from .metrics import Detection, GroundTruth, summarize
from .overlay import render_overlay
from .pngio import read_depth, read_mask, read_rgb, write_depth, write_rgb
from .raster import extract_instances, union_mask
from .reports import (
    curves_csv_text,
    pr_csv_text,
    to_json,
    write_potholes_csv,
)
from .synth import generate, random_scene_spec

PRED_CONFIDENCE = 0.9  # confidence attached to synthetic predictions


def _json_line(doc):
    return json.dumps(doc, sort_keys=True)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="roadchar",
        description="Pothole characterization and evaluation pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--seed", type=int, help="master random seed")

    p = sub.add_parser("prep", help="clean, augment, resize, split a dataset")
    common(p)
    p.add_argument("--input", required=True, help="directory with rgb/ and depth/")
    p.add_argument("--out", required=True)
    p.add_argument("--test-count", type=int, required=True)
    p.add_argument("--zero-threshold", type=float, default=1.0,
                   help="drop pairs whose depth zero-fraction reaches this")
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--height", type=int, default=640)

    p = sub.add_parser("characterize", help="per-frame pothole reports")
    common(p)
    p.add_argument("--frames", required=True, help="directory of RGB frames")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preds", help="directory of prediction polygon files")
    src.add_argument("--masks", help="directory of binary mask PNGs")
    p.add_argument("--depths", help="directory of 16-bit depth PNGs")
    p.add_argument("--out", required=True)
    p.add_argument("--csv", action="store_true", help="also write potholes.csv")
    p.add_argument("--band-radius", type=int)
    p.add_argument("--rpd-mode", choices=("difference", "ratio"))
    p.add_argument("--depth-range-mm", type=float)
    p.add_argument("--min-valid-fraction", type=float)
    p.add_argument("--connectivity", type=int, choices=(4, 8))

    p = sub.add_parser("evaluate", help="detection metrics from gt + preds")
    common(p)
    p.add_argument("--labels", required=True, help="ground-truth polygon files")
    p.add_argument("--preds", required=True, help="prediction polygon files")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--height", type=int, default=640)
    p.add_argument("--conf-threshold", type=float)
    p.add_argument("--iou-threshold", type=float)

    p = sub.add_parser("depth-eval", help="RMSE of predicted depth maps")
    common(p)
    p.add_argument("--preds", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--out", required=True, help="output JSON file")
    p.add_argument("--units", choices=("normalized", "mm"), default="normalized")
    p.add_argument("--depth-range-mm", type=float)

    p = sub.add_parser("synth", help="generate synthetic scenes")
    common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--scenes", type=int, default=10)
    p.add_argument("--width", type=int, default=160)
    p.add_argument("--height", type=int, default=160)
    p.add_argument("--max-potholes", type=int, default=3)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--speckle", type=float, default=0.0)
    p.add_argument("--band-radius", type=int)
    return parser


def _load_pairs(input_dir):
    rgb_dir = Path(input_dir) / "rgb"
    depth_dir = Path(input_dir) / "depth"
    rgb_ids = {p.stem: p for p in sorted(rgb_dir.glob("*.png"))}
    depth_ids = {p.stem: p for p in sorted(depth_dir.glob("*.png"))}
    missing_depth = sorted(set(rgb_ids) - set(depth_ids))
    missing_rgb = sorted(set(depth_ids) - set(rgb_ids))
    if missing_depth or missing_rgb:
        raise MissingCounterpart(missing_pred=missing_depth, missing_gt=missing_rgb)
    pairs = []
    for fid in sorted(rgb_ids):
        pairs.append(
            ds.FramePair(
                rgb=read_rgb(rgb_ids[fid]),
                depth=read_depth(depth_ids[fid]),
                source_id=fid,
                family_id=fid,
            )
        )
    return pairs


def cmd_prep(args):
    cfg = load_config(args.config, seed=args.seed)
    pairs = _load_pairs(args.input)
    kept = ds.clean(pairs, args.zero_threshold)
    removed = len(pairs) - len(kept)

    full = []
    for pair in kept:
        full.append(pair)
        full.extend(ds.augment(pair, cfg.seed))
    target = (args.width, args.height)
    full = [ds.resize_pair(p, target) for p in full]
    manifest = ds.split(full, args.test_count, cfg.seed)

    out = Path(args.out)
    (out / "rgb").mkdir(parents=True, exist_ok=True)
    (out / "depth").mkdir(parents=True, exist_ok=True)
    provenance = {}
    for pair in full:
        write_rgb(out / "rgb" / f"{pair.source_id}.png", pair.rgb)
        write_depth(out / "depth" / f"{pair.source_id}.png", pair.depth)
        provenance[pair.source_id] = {
            "family": pair.family_id,
            "kind": pair.provenance.kind,
            "seed": pair.provenance.seed,
        }
    doc = {
        "schema": "roadchar/manifest/v1",
        "seed": cfg.seed,
        "target_size": [args.width, args.height],
        "zero_fraction_threshold": args.zero_threshold,
        "counts": {
            "input_pairs": len(pairs),
            "removed": removed,
            "originals_kept": len(kept),
            "augmented": len(full) - len(kept),
            "total": len(full),
            "train": len(manifest.train_ids),
            "test": len(manifest.test_ids),
        },
        "train_ids": list(manifest.train_ids),
        "test_ids": list(manifest.test_ids),
        "provenance": provenance,
    }
    (out / "manifest.json").write_text(json.dumps(doc, indent=2) + "\n")
    print(
        f"prep: {len(pairs)} in, {removed} removed, {len(full)} out "
        f"({len(manifest.test_ids)} test)"
    )
    return 0


def _frame_ids(directory, suffix):
    return sorted(p.stem for p in Path(directory).glob(f"*{suffix}"))


def cmd_characterize(args):
    cfg = load_config(
        args.config,
        seed=args.seed,
        band_radius=args.band_radius,
        rpd_mode=args.rpd_mode,
        depth_range_mm=args.depth_range_mm,
        min_valid_fraction=args.min_valid_fraction,
        connectivity=args.connectivity,
    )
    out = Path(args.out)
    (out / "reports").mkdir(parents=True, exist_ok=True)
    (out / "overlays").mkdir(parents=True, exist_ok=True)

    if args.preds:
        ids = _frame_ids(args.preds, ".txt")
    else:
        ids = _frame_ids(args.masks, ".png")
    if not ids:
        raise RoadcharError("no input frames found")

    reports = []
    for fid in ids:
        rgb = read_rgb(Path(args.frames) / f"{fid}.png")
        if args.preds:
            dets = parse_annotation_file(Path(args.preds) / f"{fid}.txt", "pred", fid)
            masks = [d.mask(rgb.width, rgb.height) for d in dets]
            frame_mask = union_mask(masks, rgb.width, rgb.height)
        else:
            frame_mask = read_mask(Path(args.masks) / f"{fid}.png")
        instances = extract_instances(frame_mask, cfg.connectivity)

        depth_field = None
        if args.depths:
            depth_path = Path(args.depths) / f"{fid}.png"
            if depth_path.exists():
                depth_field = normalize_depth(read_depth(depth_path), cfg.depth_range_mm)

        report = frame_report(
            fid, instances, rgb.width * rgb.height, depth_field, cfg
        )
        reports.append(report)
        (out / "reports" / f"{fid}.json").write_text(
            to_json(report, cfg.round_percent, cfg.round_depth)
        )
        panel = render_overlay(
            rgb, depth_field, instances, report.potholes, rpd_mode=cfg.rpd_mode
        )
        write_rgb(out / "overlays" / f"{fid}.png", panel)
    if args.csv:
        write_potholes_csv(out / "potholes.csv", reports)
    print(f"characterize: {len(reports)} frame(s) -> {out}")
    return 0


def cmd_evaluate(args):
    cfg = load_config(
        args.config,
        seed=args.seed,
        conf_threshold=args.conf_threshold,
        iou_threshold=args.iou_threshold,
    )
    gt_ids = set(_frame_ids(args.labels, ".txt"))
    pred_ids = set(_frame_ids(args.preds, ".txt"))
    gts = []
    dets = []
    for fid in sorted(gt_ids):
        gts.extend(parse_annotation_file(Path(args.labels) / f"{fid}.txt", "gt", fid))
    for fid in sorted(pred_ids):
        dets.extend(parse_annotation_file(Path(args.preds) / f"{fid}.txt", "pred", fid))
    summary = summarize(
        dets,
        gts,
        conf_threshold=cfg.conf_threshold,
        iou_threshold=cfg.iou_threshold,
        frame_size=(args.width, args.height),
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(to_json(summary))
    (out / "curves_box.csv").write_text(curves_csv_text(summary.box))
    (out / "curves_mask.csv").write_text(curves_csv_text(summary.mask))
    (out / "pr_box.csv").write_text(pr_csv_text(summary.box))
    (out / "pr_mask.csv").write_text(pr_csv_text(summary.mask))
    print(
        f"evaluate: box mAP50={summary.box.mean.ap50:.4f} "
        f"mask mAP50={summary.mask.mean.ap50:.4f} -> {out}"
    )
    return 0


def cmd_depth_eval(args):
    cfg = load_config(args.config, seed=args.seed,
                      depth_range_mm=args.depth_range_mm)
    result = evaluate_set(
        args.preds, args.gt, units=args.units, max_range_mm=cfg.depth_range_mm
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(to_json(result))
    print(f"depth-eval: mean rmse {result.mean_rmse:.6f} {result.units} -> {out}")
    return 0


def cmd_synth(args):
    cfg = load_config(args.config, seed=args.seed, band_radius=args.band_radius)
    out = Path(args.out)
    for sub_dir in ("rgb", "depth", "labels", "preds"):
        (out / sub_dir).mkdir(parents=True, exist_ok=True)
    scene_docs = []
    for i in range(args.scenes):
        scene_seed = ds.derive_seed(cfg.seed, f"scene{i:04d}")
        rng = np.random.default_rng(scene_seed)
        spec = random_scene_spec(
            rng, args.width, args.height, max_potholes=args.max_potholes,
            band_radius=cfg.band_radius,
        )
        if args.noise or args.speckle:
            spec = dataclasses.replace(
                spec, noise_sigma=args.noise, missing_speckle=args.speckle
            )
        fid = f"scene{i:04d}"
        scene = generate(
            spec, args.width, args.height, seed=scene_seed,
            band_radius=cfg.band_radius, depth_range_mm=cfg.depth_range_mm,
            frame_id=fid,
        )
        write_rgb(out / "rgb" / f"{fid}.png", scene.rgb)
        write_depth(out / "depth" / f"{fid}.png", scene.depth_map)
        gts = [
            GroundTruth(frame_id=fid, class_id=0, polygon=poly)
            for poly in scene.annotations
        ]
        write_annotation_file(out / "labels" / f"{fid}.txt", gts)
        preds = [
            Detection(frame_id=fid, class_id=0, polygon=poly,
                      confidence=PRED_CONFIDENCE)
            for poly in scene.annotations
        ]
        write_annotation_file(out / "preds" / f"{fid}.txt", preds)
        scene_docs.append(
            {
                "frame_id": fid,
                "seed": scene_seed,
                "plane_depth": scene.expected.plane_depth,
                "band_radius": scene.expected.band_radius,
                "damage_percent": scene.expected.damage_percent,
                "instances": [
                    {
                        "pixel_area": e.pixel_area,
                        "contour_area": e.contour_area,
                        "bbox": list(e.bbox),
                        "p_d": e.p_d,
                        "s_d": e.s_d,
                        "rp_d_difference": e.rp_d_difference,
                        "rp_d_ratio": e.rp_d_ratio,
                    }
                    for e in scene.expected.instances
                ],
            }
        )
    (out / "scenes.json").write_text(
        json.dumps({"schema": "roadchar/scenes/v1", "scenes": scene_docs}, indent=2)
        + "\n"
    )
    print(f"synth: {args.scenes} scene(s) -> {out}")
    return 0


_COMMANDS = {
    "prep": cmd_prep,
    "characterize": cmd_characterize,
    "evaluate": cmd_evaluate,
    "depth-eval": cmd_depth_eval,
    "synth": cmd_synth,
}


def run(argv=None):
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


def main(argv=None):
    try:
        return run(argv)
    except RoadcharError as exc:
        sys.stderr.write(
            _json_line({"error": type(exc).__name__, "message": str(exc)}) + "\n"
        )
        return 1
    except OSError as exc:
        sys.stderr.write(
            _json_line({"error": type(exc).__name__, "message": str(exc)}) + "\n"
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
