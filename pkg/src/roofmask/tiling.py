"""Grid tiling of large rasters and recombination of per-tile detections."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Sequence, TypeVar

import numpy as np

from .errors import InvalidArgumentError
from .geometry import Box, Detection
from .proposal import nms

T = TypeVar("T")


@dataclass(frozen=True)
class TileGrid:
    image_width: int
    image_height: int
    tile_size: int
    rows: int
    cols: int
    overlap: int = 0

    @property
    def step(self) -> int:
        return self.tile_size - self.overlap

    def tile(self, row: int, col: int) -> Tile:
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise InvalidArgumentError(
                f"tile ({row}, {col}) outside {self.rows}x{self.cols} grid"
            )
        x_offset = col * self.step
        y_offset = row * self.step
        return Tile(
            row=row,
            col=col,
            x_offset=x_offset,
            y_offset=y_offset,
            valid_width=min(self.tile_size, self.image_width - x_offset),
            valid_height=min(self.tile_size, self.image_height - y_offset),
        )

    def tiles(self) -> list[Tile]:
        return [self.tile(r, c) for r in range(self.rows) for c in range(self.cols)]


@dataclass(frozen=True)
class Tile:
    row: int
    col: int
    x_offset: int
    y_offset: int
    valid_width: int
    valid_height: int


def make_grid(
    image_width: int, image_height: int, tile_size: int = 512, overlap: int = 0
) -> TileGrid:
    """Grid of fixed-size tiles covering the image; edge tiles are partial.

    With the default overlap of 0 (plain gridding) tile origins step by
    tile_size and rows/cols are ceil(dim / tile_size); a positive overlap
    steps origins by tile_size - overlap instead.
    """
    if image_width <= 0 or image_height <= 0 or tile_size <= 0:
        raise InvalidArgumentError(
            f"dimensions must be positive, got {image_width}x{image_height} tile {tile_size}"
        )
    if not 0 <= overlap < tile_size:
        raise InvalidArgumentError(f"overlap must lie in [0, tile_size), got {overlap}")
    step = tile_size - overlap
    return TileGrid(
        image_width=image_width,
        image_height=image_height,
        tile_size=tile_size,
        rows=max(1, math.ceil((image_height - overlap) / step)),
        cols=max(1, math.ceil((image_width - overlap) / step)),
        overlap=overlap,
    )


def extract_tile(image: np.ndarray, grid: TileGrid, row: int, col: int) -> np.ndarray:
    """Cut a tile_size x tile_size patch; pixels past the image edge are zero."""
    if image.shape[0] != grid.image_height or image.shape[1] != grid.image_width:
        raise InvalidArgumentError(
            f"image shape {image.shape[:2]} does not match grid "
            f"{grid.image_height}x{grid.image_width}"
        )
    t = grid.tile(row, col)
    shape = (grid.tile_size, grid.tile_size) + image.shape[2:]
    patch = np.zeros(shape, dtype=image.dtype)
    patch[: t.valid_height, : t.valid_width] = image[
        t.y_offset : t.y_offset + t.valid_height,
        t.x_offset : t.x_offset + t.valid_width,
    ]
    return patch


def split_dataset(
    tile_ids: Sequence[T], train_fraction: float, seed: int
) -> tuple[list[T], list[T]]:
    """Seeded shuffle split; train size is round(train_fraction * N), half-up."""
    if not 0.0 <= train_fraction <= 1.0:
        raise InvalidArgumentError(f"train_fraction must lie in [0, 1], got {train_fraction}")
    ids = list(tile_ids)
    random.Random(seed).shuffle(ids)
    n_train = int(math.floor(train_fraction * len(ids) + 0.5))
    return ids[:n_train], ids[n_train:]


def tile_to_global(d: Detection, tile: Tile) -> Detection:
    """Translate a tile-local detection by the tile's global origin."""
    return d.translate(tile.x_offset, tile.y_offset)


def _in_padding_only(box: Box, tile: Tile) -> bool:
    # The part of a tile's footprint outside its valid region lies outside
    # the source image entirely, so checking the tile's own valid rectangle
    # suffices to find detections made of synthetic padding.
    ix = min(box.x2, tile.x_offset + tile.valid_width) - max(box.x1, tile.x_offset)
    iy = min(box.y2, tile.y_offset + tile.valid_height) - max(box.y1, tile.y_offset)
    return ix <= 0.0 or iy <= 0.0


def stitch(
    per_tile: Iterable[tuple[Tile, Sequence[Detection]]], nms_iou: float = 0.5
) -> list[Detection]:
    """Map per-tile detections to global coordinates and dedupe across seams.

    Detections lying entirely in tile padding are dropped. Cross-tile greedy
    NMS runs over a deterministic order (descending score, ties by tile
    row/col then box corners) so the result does not depend on the order the
    tiles arrive in. Output is sorted by descending score.
    """
    staged: list[tuple[Detection, tuple]] = []
    for tile, detections in per_tile:
        for d in detections:
            g = tile_to_global(d, tile)
            if _in_padding_only(g.box, tile):
                continue
            staged.append((g, (-g.score, tile.row, tile.col) + g.box.as_tuple()))
    staged.sort(key=lambda item: item[1])
    ordered = [g for g, _ in staged]
    keep = nms([g.box for g in ordered], [g.score for g in ordered], nms_iou)
    return [ordered[i] for i in keep]


__all__ = [
    "TileGrid",
    "Tile",
    "make_grid",
    "extract_tile",
    "split_dataset",
    "tile_to_global",
    "stitch",
]
