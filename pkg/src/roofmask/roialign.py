"""Continuous-coordinate bilinear sampling and fixed-size RoI pooling.

Convention: the value stored at grid cell (i, j) lives at continuous
coordinate x = j, y = i (no half-pixel offset). Neighbors outside the grid
contribute zero, matching the zero-padded tiles produced upstream. RoI
coordinates arrive in image pixels and are divided by the map's stride with
no rounding at any point — that is the whole point of this sampler.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateRoiError, InvalidArgumentError
from .geometry import Box

DEGENERATE_ROI_AREA = 1e-6


@dataclass(frozen=True)
class FeatureMap:
    """A (height, width, channels) grid of reals with an image-pixel stride."""

    values: np.ndarray = field(repr=False)
    stride: int = 16

    def __post_init__(self) -> None:
        if self.values.ndim != 3:
            raise InvalidArgumentError(
                f"feature map values must be (H, W, C), got shape {self.values.shape}"
            )
        if self.stride < 1:
            raise InvalidArgumentError(f"stride must be >= 1, got {self.stride}")
        if not np.isfinite(self.values).all():
            raise InvalidArgumentError("feature map values must be finite")

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def channels(self) -> int:
        return self.values.shape[2]


@dataclass(frozen=True)
class RoiAlignConfig:
    output_size: int = 7
    sampling_points: int = 2

    def __post_init__(self) -> None:
        if self.output_size < 1:
            raise InvalidArgumentError(f"output_size must be >= 1, got {self.output_size}")
        if self.sampling_points < 1:
            raise InvalidArgumentError(
                f"sampling_points must be >= 1, got {self.sampling_points}"
            )


def sample_plane(plane: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Bilinearly sample a 2-D array at continuous points; out of grid reads 0.

    xs/ys may have any (matching) shape. Cell (i, j) holds its value at
    coordinate (j, i).
    """
    h, w = plane.shape
    x0 = np.floor(xs)
    y0 = np.floor(ys)
    fx = xs - x0
    fy = ys - y0
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)

    out = np.zeros(np.broadcast(xs, ys).shape, dtype=np.float64)
    for dy, wy in ((0, 1.0 - fy), (1, fy)):
        yy = y0 + dy
        for dx, wx in ((0, 1.0 - fx), (1, fx)):
            xx = x0 + dx
            inside = (xx >= 0) & (xx < w) & (yy >= 0) & (yy < h)
            vals = np.where(inside, plane[np.clip(yy, 0, h - 1), np.clip(xx, 0, w - 1)], 0.0)
            out = out + wx * wy * vals
    return out


def bilinear_sample(fmap: FeatureMap, x: float, y: float, channel: int) -> float:
    """Sample one channel at a continuous cell coordinate."""
    if not 0 <= channel < fmap.channels:
        raise InvalidArgumentError(
            f"channel {channel} out of range for {fmap.channels}-channel map"
        )
    return float(
        sample_plane(fmap.values[:, :, channel], np.asarray(x, float), np.asarray(y, float))
    )


def roi_align(fmap: FeatureMap, roi: Box, cfg: RoiAlignConfig) -> np.ndarray:
    """Pool an RoI into an (output_size, output_size, channels) grid.

    The RoI is scaled into cell coordinates by 1/stride and divided into
    output_size^2 equal bins; each bin averages sampling_points^2 bilinear
    samples placed at the centers of a regular subdivision of the bin.
    """
    s = cfg.output_size
    n = cfg.sampling_points
    x1 = roi.x1 / fmap.stride
    y1 = roi.y1 / fmap.stride
    bw = (roi.x2 - roi.x1) / fmap.stride / s
    bh = (roi.y2 - roi.y1) / fmap.stride / s
    if (bw * s) * (bh * s) < DEGENERATE_ROI_AREA:
        raise DegenerateRoiError(
            f"roi {roi.as_tuple()} is degenerate at stride {fmap.stride}"
        )

    # Sample coordinates for every bin at once: an (s*n) grid per axis.
    steps = (np.arange(s * n, dtype=np.float64) + 0.5) / n
    xs = x1 + steps * bw
    ys = y1 + steps * bh
    gx, gy = np.meshgrid(xs, ys)

    out = np.empty((s, s, fmap.channels), dtype=np.float64)
    for c in range(fmap.channels):
        dense = sample_plane(fmap.values[:, :, c], gx, gy)
        out[:, :, c] = dense.reshape(s, n, s, n).mean(axis=(1, 3))
    return out
