"""Axis-aligned boxes, placed binary masks, and detections.

Coordinates are continuous pixels: (x1, y1) is the top-left corner,
(x2, y2) the bottom-right, and area = (x2 - x1) * (y2 - y1). There is no
"+1" pixel-inclusive convention anywhere in this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

BUILDING = "building"


@dataclass(frozen=True)
class Box:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        for name in ("x1", "y1", "x2", "y2"):
            object.__setattr__(self, name, float(getattr(self, name)))
        coords = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(c) for c in coords):
            raise InvalidArgumentError(f"box coordinates must be finite, got {coords}")
        if self.x2 < self.x1 or self.y2 < self.y1:
            raise InvalidArgumentError(f"box corners out of order: {coords}")

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.x1 + self.x2), 0.5 * (self.y1 + self.y2))

    def translate(self, dx: float, dy: float) -> Box:
        return Box(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)


def iou_box(a: Box, b: Box) -> float:
    """Intersection over union of two boxes; 0.0 when the union is empty."""
    ix = min(a.x2, b.x2) - max(a.x1, b.x1)
    iy = min(a.y2, b.y2) - max(a.y1, b.y1)
    if ix <= 0.0 or iy <= 0.0:
        return 0.0
    inter = ix * iy
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def clip_box(b: Box, width: float, height: float) -> Box:
    """Clamp a box into [0, width] x [0, height]."""
    if width <= 0 or height <= 0:
        raise InvalidArgumentError(f"clip bounds must be positive, got {width}x{height}")
    return Box(
        min(max(b.x1, 0.0), width),
        min(max(b.y1, 0.0), height),
        min(max(b.x2, 0.0), width),
        min(max(b.y2, 0.0), height),
    )


@dataclass(frozen=True, eq=False)
class MaskPatch:
    """A binary mask raster placed on an image.

    ``bits[r, c]`` covers the image pixel (x0 + c, y0 + r). An image-sized
    mask is simply a patch at origin (0, 0) with the image's dimensions.
    """

    x0: int
    y0: int
    bits: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.bits.ndim != 2:
            raise InvalidArgumentError(f"mask bits must be 2-D, got shape {self.bits.shape}")
        if self.bits.dtype != np.bool_:
            object.__setattr__(self, "bits", self.bits.astype(bool))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MaskPatch):
            return NotImplemented
        return (
            (self.x0, self.y0) == (other.x0, other.y0)
            and self.bits.shape == other.bits.shape
            and bool((self.bits == other.bits).all())
        )

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def translate(self, dx: int, dy: int) -> MaskPatch:
        return MaskPatch(self.x0 + dx, self.y0 + dy, self.bits)

    def to_canvas(self, width: int, height: int) -> np.ndarray:
        """Render onto a zeroed (height, width) canvas, clipping overhang."""
        canvas = np.zeros((height, width), dtype=bool)
        x_lo = max(self.x0, 0)
        y_lo = max(self.y0, 0)
        x_hi = min(self.x0 + self.width, width)
        y_hi = min(self.y0 + self.height, height)
        if x_lo < x_hi and y_lo < y_hi:
            canvas[y_lo:y_hi, x_lo:x_hi] = self.bits[
                y_lo - self.y0 : y_hi - self.y0, x_lo - self.x0 : x_hi - self.x0
            ]
        return canvas

    def is_canvas(self, width: int, height: int) -> bool:
        return self.x0 == 0 and self.y0 == 0 and self.bits.shape == (height, width)


@dataclass(frozen=True)
class Detection:
    """A scored building detection, optionally carrying an instance mask."""

    box: Box
    score: float
    label: str = BUILDING
    mask: MaskPatch | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.score) and 0.0 <= self.score <= 1.0):
            raise InvalidArgumentError(f"detection score must lie in [0, 1], got {self.score}")

    def translate(self, dx: int, dy: int) -> Detection:
        mask = self.mask.translate(dx, dy) if self.mask is not None else None
        return Detection(self.box.translate(dx, dy), self.score, self.label, mask)
