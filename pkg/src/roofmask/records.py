"""On-disk schemas: detection records (JSON lines), grid manifests, RLE text.

Every reader validates strictly and raises CorruptDataError with the
offending location; every writer goes through the atomic helpers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import CorruptDataError
from .fileio import atomic_write_text
from .geometry import Box, Detection, MaskPatch
from .rle import RleMask, rle_decode, rle_encode
from .tiling import Tile, TileGrid, make_grid

_RECORD_KEYS = {"image", "label", "score", "box", "mask_rle"}
_MASK_KEYS = {"x0", "y0", "width", "height", "runs"}


@dataclass(frozen=True)
class PlacedRle:
    """An RLE mask plus the image position of its top-left corner."""

    x0: int
    y0: int
    rle: RleMask


@dataclass(frozen=True)
class DetectionRecord:
    image: str
    label: str
    score: float
    box: tuple[float, float, float, float]
    mask_rle: PlacedRle | None = None


def detection_to_record(det: Detection, image: str) -> DetectionRecord:
    mask_rle = None
    if det.mask is not None:
        mask_rle = PlacedRle(det.mask.x0, det.mask.y0, rle_encode(det.mask.bits))
    return DetectionRecord(
        image=image,
        label=det.label,
        score=det.score,
        box=det.box.as_tuple(),
        mask_rle=mask_rle,
    )


def record_to_detection(rec: DetectionRecord) -> Detection:
    mask = None
    if rec.mask_rle is not None:
        mask = MaskPatch(rec.mask_rle.x0, rec.mask_rle.y0, rle_decode(rec.mask_rle.rle))
    return Detection(box=Box(*rec.box), score=rec.score, label=rec.label, mask=mask)


def record_to_dict(rec: DetectionRecord) -> dict:
    mask = None
    if rec.mask_rle is not None:
        mask = {
            "x0": rec.mask_rle.x0,
            "y0": rec.mask_rle.y0,
            "width": rec.mask_rle.rle.width,
            "height": rec.mask_rle.rle.height,
            "runs": list(rec.mask_rle.rle.runs),
        }
    return {
        "image": rec.image,
        "label": rec.label,
        "score": rec.score,
        "box": list(rec.box),
        "mask_rle": mask,
    }


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise CorruptDataError(message)


def record_from_dict(obj: dict) -> DetectionRecord:
    _require(isinstance(obj, dict), f"record must be an object, got {type(obj).__name__}")
    _require(set(obj) == _RECORD_KEYS, f"record keys {sorted(obj)} != {sorted(_RECORD_KEYS)}")
    _require(isinstance(obj["image"], str), "record image must be a string")
    _require(isinstance(obj["label"], str), "record label must be a string")
    _require(isinstance(obj["score"], (int, float)) and not isinstance(obj["score"], bool),
             "record score must be a number")
    box = obj["box"]
    _require(
        isinstance(box, list) and len(box) == 4
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in box),
        "record box must be [x1, y1, x2, y2]",
    )
    mask = obj["mask_rle"]
    placed = None
    if mask is not None:
        _require(isinstance(mask, dict), "mask_rle must be an object or null")
        _require(set(mask) == _MASK_KEYS, f"mask_rle keys {sorted(mask)} != {sorted(_MASK_KEYS)}")
        _require(
            all(isinstance(mask[k], int) for k in ("x0", "y0", "width", "height")),
            "mask_rle position and dims must be integers",
        )
        runs = mask["runs"]
        _require(
            isinstance(runs, list) and all(isinstance(r, int) for r in runs),
            "mask_rle runs must be a list of integers",
        )
        placed = PlacedRle(mask["x0"], mask["y0"], RleMask(mask["width"], mask["height"], tuple(runs)))
    return DetectionRecord(
        image=obj["image"],
        label=obj["label"],
        score=float(obj["score"]),
        box=tuple(float(v) for v in box),
        mask_rle=placed,
    )


def records_to_jsonl(records: Iterable[DetectionRecord]) -> str:
    return "".join(json.dumps(record_to_dict(r), separators=(",", ":")) + "\n" for r in records)


def records_from_jsonl(text: str) -> list[DetectionRecord]:
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorruptDataError(f"line {lineno}: invalid JSON ({exc.msg})") from None
        try:
            records.append(record_from_dict(obj))
        except CorruptDataError as exc:
            raise CorruptDataError(f"line {lineno}: {exc}") from None
    return records


def write_records(path: str | Path, records: Iterable[DetectionRecord]) -> None:
    atomic_write_text(path, records_to_jsonl(records))


def read_records(path: str | Path) -> list[DetectionRecord]:
    return records_from_jsonl(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class GridManifest:
    """Everything needed to re-stitch a tiled image from disk."""

    grid: TileGrid
    stem: str
    entries: tuple[tuple[Tile, str], ...]  # (tile, patch filename)

    def filename(self, tile: Tile) -> str:
        for t, name in self.entries:
            if (t.row, t.col) == (tile.row, tile.col):
                return name
        raise CorruptDataError(f"manifest has no tile ({tile.row}, {tile.col})")


def build_manifest(grid: TileGrid, stem: str, ext: str) -> GridManifest:
    entries = tuple((t, f"{stem}_r{t.row}_c{t.col}.{ext}") for t in grid.tiles())
    return GridManifest(grid=grid, stem=stem, entries=entries)


def manifest_to_text(manifest: GridManifest) -> str:
    g = manifest.grid
    lines = [
        f"image_width {g.image_width}",
        f"image_height {g.image_height}",
        f"tile_size {g.tile_size}",
        f"overlap {g.overlap}",
        f"stem {manifest.stem}",
    ]
    for tile, name in manifest.entries:
        lines.append(
            f"tile {tile.row} {tile.col} {tile.x_offset} {tile.y_offset} "
            f"{tile.valid_width} {tile.valid_height} {name}"
        )
    return "\n".join(lines) + "\n"


def manifest_from_text(text: str) -> GridManifest:
    header: dict[str, str] = {}
    tile_lines: list[list[str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "tile":
            _require(len(parts) == 8, f"line {lineno}: tile line needs 7 fields")
            tile_lines.append(parts[1:])
        else:
            _require(len(parts) == 2, f"line {lineno}: expected 'key value'")
            _require(
                parts[0] in ("image_width", "image_height", "tile_size", "overlap", "stem"),
                f"line {lineno}: unknown manifest key {parts[0]!r}",
            )
            header[parts[0]] = parts[1]

    missing = {"image_width", "image_height", "tile_size", "stem"} - set(header)
    _require(not missing, f"manifest missing header keys: {sorted(missing)}")
    try:
        grid = make_grid(
            int(header["image_width"]),
            int(header["image_height"]),
            int(header["tile_size"]),
            int(header.get("overlap", 0)),
        )
    except ValueError as exc:
        raise CorruptDataError(f"bad manifest header: {exc}") from None

    seen: dict[tuple[int, int], str] = {}
    for parts in tile_lines:
        try:
            row, col, x_off, y_off, vw, vh = (int(p) for p in parts[:6])
        except ValueError:
            raise CorruptDataError(f"non-integer tile fields: {parts[:6]}") from None
        _require(0 <= row < grid.rows and 0 <= col < grid.cols,
                 f"tile ({row}, {col}) outside {grid.rows}x{grid.cols} grid")
        expected = grid.tile(row, col)
        _require(
            (x_off, y_off, vw, vh)
            == (expected.x_offset, expected.y_offset, expected.valid_width, expected.valid_height),
            f"tile ({row}, {col}) geometry disagrees with the grid header",
        )
        _require((row, col) not in seen, f"duplicate tile ({row}, {col})")
        seen[(row, col)] = parts[6]

    _require(
        len(seen) == grid.rows * grid.cols,
        f"manifest lists {len(seen)} tiles, grid has {grid.rows * grid.cols}",
    )
    entries = tuple((grid.tile(r, c), seen[(r, c)]) for r in range(grid.rows) for c in range(grid.cols))
    return GridManifest(grid=grid, stem=header["stem"], entries=entries)


def write_manifest(path: str | Path, manifest: GridManifest) -> None:
    atomic_write_text(path, manifest_to_text(manifest))


def read_manifest(path: str | Path) -> GridManifest:
    return manifest_from_text(Path(path).read_text(encoding="utf-8"))


def rle_to_text(r: RleMask) -> str:
    return f"{r.width} {r.height}\n{' '.join(str(n) for n in r.runs)}\n"


def rle_from_text(text: str) -> RleMask:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    _require(len(lines) == 2, "RLE text must have a dims line and a runs line")
    try:
        width, height = (int(p) for p in lines[0].split())
        runs = tuple(int(p) for p in lines[1].split())
    except ValueError:
        raise CorruptDataError("RLE text fields must be integers") from None
    return RleMask(width=width, height=height, runs=runs)


def write_rle_text(path: str | Path, r: RleMask) -> None:
    atomic_write_text(path, rle_to_text(r))


def read_rle_text(path: str | Path) -> RleMask:
    return rle_from_text(Path(path).read_text(encoding="utf-8"))
