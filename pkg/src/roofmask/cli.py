"""Command-line interface: tile, split, detect, eval, overlay, rle.

Every failure exits 1 with a one-line diagnostic on stderr; declared output
files are written atomically so a failed run leaves no partial file behind.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import RunConfig, read_config
from .errors import InvalidArgumentError, RoofmaskError
from .evaluation import aggregate, instances_from_mask, match_detections, precision_recall_f1
from .fileio import atomic_write_text
from .geometry import MaskPatch
from .heads import run_patch_pipeline
from .overlay import render_overlay
from .pnm import gray_to_mask, mask_to_gray, read_pnm, write_pgm, write_ppm
from .records import (
    build_manifest,
    detection_to_record,
    read_manifest,
    read_records,
    read_rle_text,
    record_to_detection,
    write_manifest,
    write_records,
    write_rle_text,
)
from .report import format_report, render_report_figure, write_report
from .rle import rle_decode, rle_encode
from .tiling import extract_tile, make_grid, split_dataset, stitch
from .toynet import ToyBackbone, ToyHead, ToyRpnScorer

MANIFEST_NAME = "manifest.txt"


def _build_stages(cfg: RunConfig):
    # Config validation guarantees these names; "toy" is the only built-in.
    backbone = {"toy": ToyBackbone}[cfg.backbone]()
    scorer = {"toy": ToyRpnScorer}[cfg.head]()
    head = {"toy": ToyHead}[cfg.head]()
    return backbone, scorer, head


def _cmd_tile(args: argparse.Namespace) -> int:
    image = read_pnm(args.input)
    grid = make_grid(image.shape[1], image.shape[0], args.size, args.overlap)
    stem = Path(args.input).stem
    ext = "ppm" if image.ndim == 3 else "pgm"
    manifest = build_manifest(grid, stem, ext)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    writer = write_ppm if image.ndim == 3 else write_pgm
    for tile, name in manifest.entries:
        writer(out_dir / name, extract_tile(image, grid, tile.row, tile.col))
    write_manifest(out_dir / MANIFEST_NAME, manifest)
    print(f"wrote {grid.rows * grid.cols} tiles and {MANIFEST_NAME} to {out_dir}")
    return 0


def _cmd_split(args: argparse.Namespace) -> int:
    manifest = read_manifest(args.manifest)
    ids = [name for _, name in manifest.entries]
    train, test = split_dataset(ids, args.train_fraction, args.seed)
    base = Path(args.manifest).parent
    train_path = Path(args.out_train) if args.out_train else base / "train.txt"
    test_path = Path(args.out_test) if args.out_test else base / "test.txt"
    atomic_write_text(train_path, "".join(f"{t}\n" for t in train))
    atomic_write_text(test_path, "".join(f"{t}\n" for t in test))
    print(f"split {len(ids)} tiles into {len(train)} train / {len(test)} test")
    return 0


def _cmd_detect(args: argparse.Namespace) -> int:
    cfg = read_config(args.config) if args.config else RunConfig()
    backbone, scorer, head = _build_stages(cfg)
    source = Path(args.input)

    if source.is_dir():
        manifest = read_manifest(source / MANIFEST_NAME)

        def detect_one(entry):
            tile, name = entry
            patch = read_pnm(source / name)
            return tile, run_patch_pipeline(patch, backbone, scorer, head, cfg.pipeline)

        if args.workers > 1:
            with ThreadPoolExecutor(max_workers=args.workers) as pool:
                per_tile = list(pool.map(detect_one, manifest.entries))
        else:
            per_tile = [detect_one(entry) for entry in manifest.entries]
        detections = stitch(per_tile, nms_iou=cfg.pipeline.detection_nms_iou)
        image_id = manifest.stem
    else:
        patch = read_pnm(source)
        detections = run_patch_pipeline(patch, backbone, scorer, head, cfg.pipeline)
        image_id = source.stem

    write_records(args.out, [detection_to_record(d, image_id) for d in detections])
    print(f"{len(detections)} detections -> {args.out}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    records = read_records(args.pred)
    gt_dir = Path(args.gt)
    gt_paths = {p.stem: p for p in sorted(gt_dir.glob("*.pgm"))}
    if not gt_paths:
        raise InvalidArgumentError(f"no .pgm ground-truth masks in {gt_dir}")
    orphans = sorted({r.image for r in records} - set(gt_paths))
    if orphans:
        raise InvalidArgumentError(f"predictions reference images with no ground truth: {orphans}")

    reports = []
    for image in sorted(gt_paths):
        gt_raster = read_pnm(gt_paths[image])
        if gt_raster.ndim != 2:
            raise InvalidArgumentError(f"ground truth {gt_paths[image]} must be a PGM mask")
        gt_mask = gray_to_mask(gt_raster)
        gts = instances_from_mask(gt_mask)
        h, w = gt_mask.shape
        preds = []
        for rec in records:
            if rec.image != image:
                continue
            det = record_to_detection(rec)
            if args.kind == "mask":
                if det.mask is None:
                    raise InvalidArgumentError(f"record for {image} has no mask (kind=mask)")
                det = replace(det, mask=MaskPatch(0, 0, det.mask.to_canvas(w, h)))
            preds.append(det)
        result = match_detections(preds, gts, args.iou, args.kind)
        reports.append(precision_recall_f1(result.tp, result.fp, result.fn, args.iou, args.kind))

    total = aggregate(reports)
    sys.stdout.write(format_report(total))
    if args.out:
        write_report(args.out, total)
    if args.figure:
        render_report_figure(total, args.figure)
    return 0


def _cmd_overlay(args: argparse.Namespace) -> int:
    image = read_pnm(args.image)
    if image.ndim == 2:
        image = np.stack([image] * 3, axis=2)
    stem = Path(args.image).stem
    detections = [
        record_to_detection(r) for r in read_records(args.pred) if r.image == stem
    ]
    write_ppm(args.out, render_overlay(image, detections))
    print(f"overlaid {len(detections)} detections -> {args.out}")
    return 0


def _cmd_rle(args: argparse.Namespace) -> int:
    if args.action == "encode":
        if not args.mask:
            raise InvalidArgumentError("rle encode needs --mask")
        raster = read_pnm(args.mask)
        if raster.ndim != 2:
            raise InvalidArgumentError("rle encode wants a PGM mask")
        write_rle_text(args.out, rle_encode(gray_to_mask(raster)))
    else:
        if not args.rle:
            raise InvalidArgumentError("rle decode needs --rle")
        write_pgm(args.out, mask_to_gray(rle_decode(read_rle_text(args.rle))))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roofmask",
        description="Rooftop detection over aerial orthophoto tiles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tile", help="cut a raster into fixed-size tiles plus a manifest")
    p.add_argument("--input", required=True, help="input PPM/PGM raster")
    p.add_argument("--size", type=int, default=512, help="tile side in pixels")
    p.add_argument("--overlap", type=int, default=0, help="pixels shared between neighbors")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_tile)

    p = sub.add_parser("split", help="split manifest tiles into train/test lists")
    p.add_argument("--manifest", required=True)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-train")
    p.add_argument("--out-test")
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("detect", help="run the detection pipeline on a patch or tile dir")
    p.add_argument("--input", required=True, help="patch file or tiled directory")
    p.add_argument("--config", help="key=value pipeline config file")
    p.add_argument("--out", required=True, help="detections file (JSON lines)")
    p.add_argument("--workers", type=int, default=1, help="tiles processed concurrently")
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("eval", help="score detections against ground-truth masks")
    p.add_argument("--pred", required=True, help="detections file")
    p.add_argument("--gt", required=True, help="directory of <image>.pgm masks")
    p.add_argument("--iou", type=float, default=0.5)
    p.add_argument("--kind", choices=("box", "mask"), default="mask")
    p.add_argument("--out", help="also write the report to this file")
    p.add_argument("--figure", help="render a metrics figure (PNG) to this file")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("overlay", help="draw detections onto an image")
    p.add_argument("--image", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--out", required=True, help="output PPM")
    p.set_defaults(func=_cmd_overlay)

    p = sub.add_parser("rle", help="convert masks between PGM and RLE text")
    p.add_argument("action", choices=("encode", "decode"))
    p.add_argument("--mask", help="input PGM (encode)")
    p.add_argument("--rle", help="input RLE text (decode)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_rle)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (RoofmaskError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
