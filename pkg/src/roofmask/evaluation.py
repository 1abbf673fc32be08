"""Instance-level accuracy assessment: IoU matching and P/R/F1 reporting.

Matching is greedy by descending prediction score: each prediction claims
the still-unmatched ground truth with the highest IoU, provided that IoU
meets the threshold (inclusive — "overlap over 50%" is read as IoU >= 0.5).
Matched pairs are true positives, leftover predictions false positives,
leftover ground truths false negatives. Instance-level true negatives are
not defined; TN exists only in the pixel-level confusion counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy import ndimage

from .errors import InvalidArgumentError
from .geometry import Box, Detection, iou_box

IOU_KINDS = ("box", "mask")


@dataclass(frozen=True)
class GroundTruthInstance:
    """One annotated building: a tight box plus an image-sized binary mask."""

    box: Box
    mask: np.ndarray

    def __post_init__(self) -> None:
        if self.mask.ndim != 2:
            raise InvalidArgumentError(f"gt mask must be 2-D, got shape {self.mask.shape}")


@dataclass(frozen=True)
class EvalReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    iou_threshold: float
    iou_kind: str


class MatchResult(NamedTuple):
    tp: int
    fp: int
    fn: int
    pairs: list[tuple[int, int]]  # (prediction index, ground-truth index)


class PixelConfusion(NamedTuple):
    tp: int
    tn: int
    fp: int
    fn: int


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    """IoU of two equal-size binary masks; 0.0 when both are empty."""
    if a.shape != b.shape:
        raise InvalidArgumentError(f"mask shapes differ: {a.shape} vs {b.shape}")
    a = a.astype(bool)
    b = b.astype(bool)
    union = int(np.count_nonzero(a | b))
    if union == 0:
        return 0.0
    return int(np.count_nonzero(a & b)) / union


def match_detections(
    preds: Sequence[Detection],
    gts: Sequence[GroundTruthInstance],
    iou_threshold: float = 0.5,
    iou_kind: str = "mask",
) -> MatchResult:
    """Greedily match predictions to ground truths at an IoU threshold.

    For mask matching every prediction must carry an image-sized mask whose
    dimensions equal the ground-truth masks'. IoU ties between ground truths
    break toward the lower ground-truth index.
    """
    if iou_kind not in IOU_KINDS:
        raise InvalidArgumentError(f"iou_kind must be one of {IOU_KINDS}, got {iou_kind!r}")

    pred_masks: list[np.ndarray] = []
    if iou_kind == "mask" and preds:
        if gts:
            gt_h, gt_w = gts[0].mask.shape
            for g in gts:
                if g.mask.shape != (gt_h, gt_w):
                    raise InvalidArgumentError("ground-truth masks differ in size")
        for i, p in enumerate(preds):
            if p.mask is None:
                raise InvalidArgumentError(f"prediction {i} has no mask for mask-IoU matching")
            if gts and not p.mask.is_canvas(gt_w, gt_h):
                raise InvalidArgumentError(
                    f"prediction {i} mask is not image-sized {gt_w}x{gt_h}"
                )
            pred_masks.append(p.mask.bits)

    order = sorted(range(len(preds)), key=lambda i: -preds[i].score)
    claimed = [False] * len(gts)
    pairs: list[tuple[int, int]] = []
    for pi in order:
        best_gi = -1
        best_iou = -1.0
        for gi, gt in enumerate(gts):
            if claimed[gi]:
                continue
            if iou_kind == "box":
                iou = iou_box(preds[pi].box, gt.box)
            else:
                iou = mask_iou(pred_masks[pi], gt.mask)
            if iou >= iou_threshold and iou > best_iou:
                best_gi = gi
                best_iou = iou
        if best_gi >= 0:
            claimed[best_gi] = True
            pairs.append((pi, best_gi))

    tp = len(pairs)
    return MatchResult(tp=tp, fp=len(preds) - tp, fn=len(gts) - tp, pairs=pairs)


def precision_recall_f1(
    tp: int, fp: int, fn: int, iou_threshold: float = 0.5, iou_kind: str = "mask"
) -> EvalReport:
    """Build a report from counts; undefined ratios are reported as 0."""
    if min(tp, fp, fn) < 0:
        raise InvalidArgumentError("counts must be non-negative")
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return EvalReport(tp, fp, fn, precision, recall, f1, iou_threshold, iou_kind)


def pixel_confusion(pred: np.ndarray, gt: np.ndarray) -> PixelConfusion:
    """Per-pixel contingency counts between two equal-size binary masks."""
    if pred.shape != gt.shape:
        raise InvalidArgumentError(f"mask shapes differ: {pred.shape} vs {gt.shape}")
    p = pred.astype(bool)
    g = gt.astype(bool)
    return PixelConfusion(
        tp=int(np.count_nonzero(p & g)),
        tn=int(np.count_nonzero(~p & ~g)),
        fp=int(np.count_nonzero(p & ~g)),
        fn=int(np.count_nonzero(~p & g)),
    )


def aggregate(reports: Iterable[EvalReport]) -> EvalReport:
    """Micro-average: sum tp/fp/fn across images, then recompute the ratios."""
    reports = list(reports)
    if not reports:
        raise InvalidArgumentError("nothing to aggregate")
    first = reports[0]
    for r in reports[1:]:
        if r.iou_threshold != first.iou_threshold or r.iou_kind != first.iou_kind:
            raise InvalidArgumentError("cannot aggregate reports with mixed thresholds or kinds")
    return precision_recall_f1(
        sum(r.tp for r in reports),
        sum(r.fp for r in reports),
        sum(r.fn for r in reports),
        first.iou_threshold,
        first.iou_kind,
    )


def instances_from_mask(mask: np.ndarray) -> list[GroundTruthInstance]:
    """Split a binary mask into instances via 4-connected components."""
    labeled, count = ndimage.label(mask.astype(bool))
    instances = []
    for k in range(1, count + 1):
        bits = labeled == k
        ys, xs = np.nonzero(bits)
        box = Box(float(xs.min()), float(ys.min()), float(xs.max() + 1), float(ys.max() + 1))
        instances.append(GroundTruthInstance(box=box, mask=bits))
    return instances
