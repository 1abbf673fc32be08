"""Classification/box/mask heads behind pluggable interfaces, plus the
per-patch inference pipeline that strings every stage together.

The backbone, RPN scorer, and RoI head are plain callables so the pipeline
runs without any learned weights: the package ships deterministic toy
implementations (see `toynet`), and exported weights from a real network
could back the same interfaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np
from scipy.special import expit

from .errors import DegenerateBoxError, InvalidArgumentError
from .geometry import BUILDING, Box, Detection, MaskPatch, clip_box
from .proposal import (
    AnchorSpec,
    BoxDelta,
    ProposalConfig,
    decode_deltas,
    filter_proposals,
    generate_anchors,
    nms,
)
from .roialign import FeatureMap, RoiAlignConfig, roi_align

DEFAULT_MASK_SIZE = 28


class Backbone(Protocol):
    """Turns an image patch into a feature map; must expose its stride."""

    stride: int

    def __call__(self, patch: np.ndarray) -> FeatureMap: ...


class RpnScorer(Protocol):
    """Scores every anchor: objectness in [0, 1] plus a box delta each."""

    def __call__(
        self, fmap: FeatureMap, anchors: Sequence[Box]
    ) -> tuple[Sequence[float], Sequence[BoxDelta]]: ...


class RoiHead(Protocol):
    """Classifies one RoI's pooled features and regresses box + mask."""

    def __call__(self, features: np.ndarray, proposal: Box) -> HeadOutputs: ...


@dataclass(frozen=True)
class HeadOutputs:
    """(background, building) logits, a refining box delta, and M x M mask logits."""

    class_logits: tuple[float, float]
    box_delta: BoxDelta
    mask_logits: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if len(self.class_logits) != 2:
            raise InvalidArgumentError("exactly two class logits (background, building)")
        if self.mask_logits.ndim != 2 or self.mask_logits.shape[0] != self.mask_logits.shape[1]:
            raise InvalidArgumentError(
                f"mask logits must be a square grid, got shape {self.mask_logits.shape}"
            )


@dataclass(frozen=True)
class PipelineConfig:
    anchors: AnchorSpec = AnchorSpec()
    proposal: ProposalConfig = ProposalConfig()
    roi: RoiAlignConfig = RoiAlignConfig()
    detection_score_threshold: float = 0.7
    detection_nms_iou: float = 0.5
    mask_binarize_threshold: float = 0.5

    def __post_init__(self) -> None:
        for name in ("detection_score_threshold", "detection_nms_iou", "mask_binarize_threshold"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidArgumentError(f"{name} must lie in [0, 1], got {v}")


def softmax(logits: Sequence[float]) -> np.ndarray:
    """Numerically stable softmax; probabilities sum to 1."""
    arr = np.asarray(logits, dtype=np.float64)
    if arr.size == 0:
        raise InvalidArgumentError("softmax of empty input")
    shifted = arr - arr.max()
    e = np.exp(shifted)
    return e / e.sum()


def _sample_clamped(grid: np.ndarray, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
    # Bilinear resize semantics: coordinates clamp to the grid edge, so a
    # constant grid pastes as that constant all the way to the box border.
    m_h, m_w = grid.shape
    us = np.clip(us, 0.0, m_w - 1.0)
    vs = np.clip(vs, 0.0, m_h - 1.0)
    u0 = np.clip(np.floor(us).astype(np.int64), 0, max(m_w - 2, 0))
    v0 = np.clip(np.floor(vs).astype(np.int64), 0, max(m_h - 2, 0))
    u1 = np.minimum(u0 + 1, m_w - 1)
    v1 = np.minimum(v0 + 1, m_h - 1)
    fu = us - u0
    fv = vs - v0
    return (
        grid[v0, u0] * (1 - fu) * (1 - fv)
        + grid[v0, u1] * fu * (1 - fv)
        + grid[v1, u0] * (1 - fu) * fv
        + grid[v1, u1] * fu * fv
    )


def paste_mask(
    mask_probs: np.ndarray,
    box: Box,
    image_w: int,
    image_h: int,
    threshold: float = 0.5,
) -> np.ndarray:
    """Resample an M x M probability grid onto the box and binarize.

    Only pixels whose unit square lies fully inside the clipped box are
    written (keeping the set-pixel count below the box area); each such pixel
    samples the grid bilinearly at its center mapped into grid coordinates,
    with edge-clamped resize semantics. Returns an image-sized boolean mask.
    """
    if mask_probs.ndim != 2 or mask_probs.shape[0] != mask_probs.shape[1]:
        raise InvalidArgumentError(f"mask grid must be square, got shape {mask_probs.shape}")
    if image_w <= 0 or image_h <= 0:
        raise InvalidArgumentError(f"image dims must be positive, got {image_w}x{image_h}")
    if box.area <= 0.0:
        raise DegenerateBoxError(f"cannot paste into zero-area box {box.as_tuple()}")

    out = np.zeros((image_h, image_w), dtype=bool)
    cx1 = max(box.x1, 0.0)
    cy1 = max(box.y1, 0.0)
    cx2 = min(box.x2, float(image_w))
    cy2 = min(box.y2, float(image_h))
    px_lo = int(math.ceil(cx1))
    px_hi = int(math.floor(cx2 - 1.0))
    py_lo = int(math.ceil(cy1))
    py_hi = int(math.floor(cy2 - 1.0))
    if px_lo > px_hi or py_lo > py_hi:
        return out

    m = mask_probs.shape[0]
    pxs = np.arange(px_lo, px_hi + 1, dtype=np.float64)
    pys = np.arange(py_lo, py_hi + 1, dtype=np.float64)
    # Pixel centers mapped into grid coordinates of the *unclipped* box.
    us = (pxs + 0.5 - box.x1) / box.width * m - 0.5
    vs = (pys + 0.5 - box.y1) / box.height * m - 0.5
    gu, gv = np.meshgrid(us, vs)
    values = _sample_clamped(np.asarray(mask_probs, dtype=np.float64), gu, gv)
    out[py_lo : py_hi + 1, px_lo : px_hi + 1] = values >= threshold
    return out


def run_patch_pipeline(
    patch: np.ndarray,
    backbone: Backbone,
    rpn_scorer: RpnScorer,
    head: RoiHead,
    cfg: PipelineConfig,
) -> list[Detection]:
    """Full single-patch inference: features, proposals, heads, masks.

    Stages: backbone -> anchors -> RPN scoring -> proposal filtering -> per-RoI
    pooling -> head -> softmax -> building-score threshold -> second-stage box
    decode -> NMS -> mask pasting. Deterministic given its inputs; an empty
    proposal set yields an empty list.
    """
    fmap = backbone(patch)
    anchors = generate_anchors(fmap.height, fmap.width, cfg.anchors)
    objectness, deltas = rpn_scorer(fmap, anchors)
    image_h, image_w = patch.shape[0], patch.shape[1]
    proposals = filter_proposals(anchors, objectness, deltas, image_w, image_h, cfg.proposal)

    boxes: list[Box] = []
    scores: list[float] = []
    mask_grids: list[np.ndarray] = []
    for proposal_box, _ in proposals:
        features = roi_align(fmap, proposal_box, cfg.roi)
        out = head(features, proposal_box)
        p_building = float(softmax(out.class_logits)[1])
        if p_building < cfg.detection_score_threshold:
            continue
        refined = clip_box(decode_deltas(proposal_box, out.box_delta), image_w, image_h)
        if refined.area <= 0.0:
            continue
        boxes.append(refined)
        scores.append(p_building)
        mask_grids.append(out.mask_logits)

    detections: list[Detection] = []
    for i in nms(boxes, scores, cfg.detection_nms_iou):
        bits = paste_mask(
            expit(mask_grids[i]), boxes[i], image_w, image_h, cfg.mask_binarize_threshold
        )
        detections.append(
            Detection(box=boxes[i], score=scores[i], label=BUILDING, mask=MaskPatch(0, 0, bits))
        )
    return detections
