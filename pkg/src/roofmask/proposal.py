"""Anchor generation, box-delta regression, NMS, and proposal filtering.

Anchors are laid out uniformly over the feature grid: the anchor set for
cell (i, j) is centered at ((j + 0.5) * stride, (i + 0.5) * stride) in image
pixels. The emitted order is fixed: row-major over cells, then ratio-major,
scale-minor within a cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError
from .geometry import Box, clip_box

# Caps exp() in delta decoding so adversarial regressions cannot overflow.
MAX_LOG_SCALING = math.log(1000.0)


@dataclass(frozen=True)
class AnchorSpec:
    """Three scales x three aspect ratios = nine anchor shapes per cell."""

    scales: tuple[float, float, float] = (64.0, 128.0, 256.0)
    ratios: tuple[float, float, float] = (0.5, 1.0, 2.0)
    stride: int = 16

    def __post_init__(self) -> None:
        if len(self.scales) != 3 or len(self.ratios) != 3:
            raise InvalidArgumentError("anchor spec needs exactly 3 scales and 3 ratios")
        if any(s <= 0 for s in self.scales) or any(r <= 0 for r in self.ratios):
            raise InvalidArgumentError("anchor scales and ratios must be positive")
        if self.stride < 1:
            raise InvalidArgumentError(f"anchor stride must be >= 1, got {self.stride}")


@dataclass(frozen=True)
class BoxDelta:
    """(tx, ty) shift the center in units of the source box size; (tw, th)
    scale width/height in log space."""

    tx: float
    ty: float
    tw: float
    th: float

    def __post_init__(self) -> None:
        vals = (self.tx, self.ty, self.tw, self.th)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidArgumentError(f"box delta must be finite, got {vals}")


ZERO_DELTA = BoxDelta(0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class ProposalConfig:
    score_threshold: float = 0.05
    pre_nms_top_k: int = 6000
    nms_iou: float = 0.7
    post_nms_top_n: int = 300

    def __post_init__(self) -> None:
        if not 0.0 <= self.score_threshold <= 1.0:
            raise InvalidArgumentError("proposal score_threshold must lie in [0, 1]")
        if not 0.0 <= self.nms_iou <= 1.0:
            raise InvalidArgumentError("proposal nms_iou must lie in [0, 1]")
        if self.pre_nms_top_k < 1 or self.post_nms_top_n < 1:
            raise InvalidArgumentError("proposal keep counts must be >= 1")


def generate_anchors(feature_h: int, feature_w: int, spec: AnchorSpec) -> list[Box]:
    """All anchors for a feature grid, exactly feature_h * feature_w * 9 boxes."""
    if feature_h < 1 or feature_w < 1:
        raise InvalidArgumentError(f"feature dims must be >= 1, got {feature_h}x{feature_w}")
    shapes = []
    for r in spec.ratios:
        root = math.sqrt(r)
        for s in spec.scales:
            shapes.append((s / root, s * root))
    anchors = []
    for i in range(feature_h):
        cy = (i + 0.5) * spec.stride
        for j in range(feature_w):
            cx = (j + 0.5) * spec.stride
            for w, h in shapes:
                anchors.append(Box(cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2))
    return anchors


def decode_deltas(anchor: Box, d: BoxDelta) -> Box:
    """Apply a regression delta to an anchor, returning corner coordinates."""
    wa = anchor.width
    ha = anchor.height
    xa, ya = anchor.center
    cx = xa + d.tx * wa
    cy = ya + d.ty * ha
    w = wa * math.exp(min(d.tw, MAX_LOG_SCALING))
    h = ha * math.exp(min(d.th, MAX_LOG_SCALING))
    return Box(cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2)


def encode_deltas(anchor: Box, target: Box) -> BoxDelta:
    """Exact algebraic inverse of decode_deltas for positive-area boxes."""
    if anchor.area <= 0.0 or target.area <= 0.0:
        raise InvalidArgumentError("encode_deltas requires positive-area boxes")
    wa = anchor.width
    ha = anchor.height
    xa, ya = anchor.center
    xt, yt = target.center
    return BoxDelta(
        (xt - xa) / wa,
        (yt - ya) / ha,
        math.log(target.width / wa),
        math.log(target.height / ha),
    )


def _boxes_to_array(boxes: Sequence[Box]) -> np.ndarray:
    return np.array([(b.x1, b.y1, b.x2, b.y2) for b in boxes], dtype=np.float64).reshape(-1, 4)


def _nms_on_arrays(arr: np.ndarray, order: np.ndarray, iou_threshold: float) -> list[int]:
    # Greedy selection over `order`; suppression is strict (IoU > threshold).
    x1, y1, x2, y2 = arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]
    areas = (x2 - x1) * (y2 - y1)
    keep: list[int] = []
    while order.size > 0:
        i = order[0]
        keep.append(int(i))
        rest = order[1:]
        ix = np.minimum(x2[i], x2[rest]) - np.maximum(x1[i], x1[rest])
        iy = np.minimum(y2[i], y2[rest]) - np.maximum(y1[i], y1[rest])
        inter = np.maximum(ix, 0.0) * np.maximum(iy, 0.0)
        union = areas[i] + areas[rest] - inter
        with np.errstate(divide="ignore", invalid="ignore"):
            iou = np.where(union > 0.0, inter / np.maximum(union, 1e-300), 0.0)
        iou = np.where(inter > 0.0, iou, 0.0)
        order = rest[iou <= iou_threshold]
    return keep


def nms(boxes: Sequence[Box], scores: Sequence[float], iou_threshold: float) -> list[int]:
    """Greedy non-maximum suppression.

    Repeatedly keeps the highest-scoring remaining box (score ties broken by
    lower index) and discards remaining boxes whose IoU with it exceeds the
    threshold. Returns kept indices in selection order.
    """
    if len(boxes) != len(scores):
        raise InvalidArgumentError(f"{len(boxes)} boxes vs {len(scores)} scores")
    if not boxes:
        return []
    arr = _boxes_to_array(boxes)
    order = np.argsort(-np.asarray(scores, dtype=np.float64), kind="stable")
    return _nms_on_arrays(arr, order, float(iou_threshold))


def filter_proposals(
    anchors: Sequence[Box],
    objectness: Sequence[float],
    deltas: Sequence[BoxDelta],
    image_w: float,
    image_h: float,
    cfg: ProposalConfig,
) -> list[tuple[Box, float]]:
    """Decode, clip, threshold, top-k, NMS, truncate — the RPN filtering chain.

    Returns (box, score) pairs sorted by descending score; boxes whose clipped
    area falls below 1 px^2 or whose score falls below the threshold are gone.
    """
    if not (len(anchors) == len(objectness) == len(deltas)):
        raise InvalidArgumentError(
            f"length mismatch: {len(anchors)} anchors, {len(objectness)} scores, {len(deltas)} deltas"
        )
    survivors: list[tuple[Box, float]] = []
    for anchor, score, delta in zip(anchors, objectness, deltas):
        if score < cfg.score_threshold:
            continue
        box = clip_box(decode_deltas(anchor, delta), image_w, image_h)
        if box.area < 1.0:
            continue
        survivors.append((box, float(score)))
    if not survivors:
        return []
    survivors.sort(key=lambda pair: -pair[1])  # stable: ties keep input order
    survivors = survivors[: cfg.pre_nms_top_k]
    keep = nms([b for b, _ in survivors], [s for _, s in survivors], cfg.nms_iou)
    return [survivors[i] for i in keep[: cfg.post_nms_top_n]]
