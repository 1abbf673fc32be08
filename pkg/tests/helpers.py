"""Shared test fixtures: planted synthetic scenes and ground-truth-aware
pipeline stages.

The oracle scorer/head cheat by looking at the planted rectangles, which
lets end-to-end tests drive the real pipeline plumbing while the learned
parts are replaced by exact answers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from roofmask import (
    Box,
    HeadOutputs,
    ZERO_DELTA,
    encode_deltas,
    iou_box,
)
from roofmask.roialign import FeatureMap


def make_scene(
    rng: np.random.Generator,
    width: int = 512,
    height: int = 512,
    min_buildings: int = 1,
    max_buildings: int = 8,
    min_side: int = 40,
    max_side: int = 160,
    margin: int = 12,
) -> tuple[np.ndarray, list[Box], np.ndarray]:
    """Bright integer-aligned rectangles on a dark background.

    Returns (rgb uint8 image, building boxes, ground-truth mask).
    """
    image = np.full((height, width, 3), 30, dtype=np.uint8)
    gt_mask = np.zeros((height, width), dtype=bool)
    target = int(rng.integers(min_buildings, max_buildings + 1))

    boxes: list[Box] = []
    attempts = 0
    while len(boxes) < target and attempts < 200:
        attempts += 1
        w = int(rng.integers(min_side, max_side + 1))
        h = int(rng.integers(min_side, max_side + 1))
        x1 = int(rng.integers(margin, width - w - margin + 1))
        y1 = int(rng.integers(margin, height - h - margin + 1))
        candidate = Box(x1, y1, x1 + w, y1 + h)
        grown = Box(x1 - margin, y1 - margin, x1 + w + margin, y1 + h + margin)
        if any(iou_box(grown, b) > 0.0 for b in boxes):
            continue
        boxes.append(candidate)
        shade = int(rng.integers(190, 240))
        image[y1 : y1 + h, x1 : x1 + w] = shade
        gt_mask[y1 : y1 + h, x1 : x1 + w] = True
    assert boxes, "scene generation failed to place any building"
    return image, boxes, gt_mask


def _best_match(box: Box, gts: list[Box]) -> tuple[float, Box | None]:
    best_iou = 0.0
    best = None
    for g in gts:
        v = iou_box(box, g)
        if v > best_iou:
            best_iou = v
            best = g
    return best_iou, best


@dataclass
class OracleRpnScorer:
    """Objectness = IoU with the best planted box; delta regresses onto it."""

    buildings: list[Box]

    def __call__(self, fmap: FeatureMap, anchors: list[Box]):
        arr = np.array([a.as_tuple() for a in anchors], dtype=np.float64).reshape(-1, 4)
        gts = np.array([g.as_tuple() for g in self.buildings], dtype=np.float64)
        ix = np.minimum(arr[:, None, 2], gts[None, :, 2]) - np.maximum(arr[:, None, 0], gts[None, :, 0])
        iy = np.minimum(arr[:, None, 3], gts[None, :, 3]) - np.maximum(arr[:, None, 1], gts[None, :, 1])
        inter = np.maximum(ix, 0.0) * np.maximum(iy, 0.0)
        area_a = (arr[:, 2] - arr[:, 0]) * (arr[:, 3] - arr[:, 1])
        area_g = (gts[:, 2] - gts[:, 0]) * (gts[:, 3] - gts[:, 1])
        iou = inter / (area_a[:, None] + area_g[None, :] - inter)
        best = iou.argmax(axis=1)
        scores = iou[np.arange(len(anchors)), best]
        deltas = [
            encode_deltas(anchor, self.buildings[g]) if s > 0.0 else ZERO_DELTA
            for anchor, g, s in zip(anchors, best, scores)
        ]
        return scores, deltas


@dataclass
class OracleHead:
    """Scores a proposal by IoU with the planted boxes and regresses exactly
    onto the best one; the mask marks the planted box inside the proposal."""

    buildings: list[Box]
    mask_size: int = 28
    logit_scale: float = 8.0

    def __call__(self, features: np.ndarray, proposal: Box) -> HeadOutputs:
        iou, best = _best_match(proposal, self.buildings)
        p = min(max(iou, 1e-9), 1.0 - 1e-9)
        logits = (0.0, math.log(p / (1.0 - p)))
        delta = encode_deltas(proposal, best) if best is not None else ZERO_DELTA

        m = self.mask_size
        grid = np.full((m, m), -self.logit_scale, dtype=np.float64)
        if best is not None:
            cx = proposal.x1 + (np.arange(m) + 0.5) / m * proposal.width
            cy = proposal.y1 + (np.arange(m) + 0.5) / m * proposal.height
            inside_x = (cx >= best.x1) & (cx <= best.x2)
            inside_y = (cy >= best.y1) & (cy <= best.y2)
            grid[np.ix_(inside_y, inside_x)] = self.logit_scale
        return HeadOutputs(class_logits=logits, box_delta=delta, mask_logits=grid)


@dataclass
class ZeroRpnScorer:
    """All-background scorer: zero objectness everywhere."""

    def __call__(self, fmap: FeatureMap, anchors: list[Box]):
        return np.zeros(len(anchors)), [ZERO_DELTA] * len(anchors)
