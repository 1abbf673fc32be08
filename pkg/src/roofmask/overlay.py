"""Detection overlays: yellow mask fill inside blue bounding boxes.

The blend is exact integer arithmetic so overlays are byte-reproducible:
masked pixels become round(0.55 * src + 0.45 * yellow) per channel, box
perimeters are painted solid blue two pixels wide, and every other pixel
is bit-identical to the input.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError
from .geometry import Detection

MASK_COLOR = (255, 255, 0)
MASK_ALPHA = 0.45
BOX_COLOR = (0, 0, 255)
BOX_THICKNESS = 2


def render_overlay(image: np.ndarray, detections: Sequence[Detection]) -> np.ndarray:
    """Return a copy of the image with masks blended and boxes outlined."""
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        raise InvalidArgumentError(f"overlay wants (H, W, 3) uint8, got {image.shape} {image.dtype}")
    h, w = image.shape[:2]
    out = image.copy()

    # Union of all masks, blended once so overlaps do not double-darken.
    union = np.zeros((h, w), dtype=bool)
    for det in detections:
        if det.mask is not None:
            union |= det.mask.to_canvas(w, h)
    if union.any():
        src = out[union].astype(np.float64)
        yellow = np.array(MASK_COLOR, dtype=np.float64)
        blended = np.rint((1.0 - MASK_ALPHA) * src + MASK_ALPHA * yellow)
        out[union] = blended.astype(np.uint8)

    blue = np.array(BOX_COLOR, dtype=np.uint8)
    for det in detections:
        x0 = max(int(math.floor(det.box.x1)), 0)
        y0 = max(int(math.floor(det.box.y1)), 0)
        x1 = min(int(math.ceil(det.box.x2)), w)
        y1 = min(int(math.ceil(det.box.y2)), h)
        if x0 >= x1 or y0 >= y1:
            continue
        t = BOX_THICKNESS
        out[y0 : min(y0 + t, y1), x0:x1] = blue
        out[max(y1 - t, y0) : y1, x0:x1] = blue
        out[y0:y1, x0 : min(x0 + t, x1)] = blue
        out[y0:y1, max(x1 - t, x0) : x1] = blue
    return out
