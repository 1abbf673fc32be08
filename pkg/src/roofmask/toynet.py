"""Weight-free backbone / RPN scorer / head implementations.

These exist so the pipeline and CLI run deterministically without any
trained network: the backbone pools luminance and two gradient stencils,
the scorer proposes the bounding boxes of bright connected blobs, and the
head confirms RoIs by their pooled brightness. They detect bright
rectangles on dark ground well enough for demos and determinism tests, and
nothing more; trained weights would back the same interfaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import InvalidArgumentError
from .geometry import Box
from .heads import DEFAULT_MASK_SIZE, HeadOutputs
from .proposal import ZERO_DELTA, encode_deltas
from .roialign import FeatureMap

TOY_STRIDE = 16


def _block_mean(plane: np.ndarray, block: int) -> np.ndarray:
    h, w = plane.shape
    return plane.reshape(h // block, block, w // block, block).mean(axis=(1, 3))


def toy_backbone(patch: np.ndarray) -> FeatureMap:
    """Stride-16 pooled luminance plus horizontal/vertical edge responses.

    Channel 0 is mean luminance (scaled to [0, 1] for 8-bit input) per 16x16
    block; channels 1 and 2 are block means of |dI/dx| and |dI/dy|. Patches
    are zero-padded up to a multiple of the stride, so the output is
    ceil(h/16) x ceil(w/16) x 3.
    """
    if patch.size == 0:
        raise InvalidArgumentError("empty patch")
    arr = np.asarray(patch, dtype=np.float64)
    if patch.dtype == np.uint8:
        arr = arr / 255.0
    lum = arr.mean(axis=2) if arr.ndim == 3 else arr

    h, w = lum.shape
    gx = np.zeros_like(lum)
    gy = np.zeros_like(lum)
    gx[:, : w - 1] = np.abs(lum[:, 1:] - lum[:, : w - 1])
    gy[: h - 1, :] = np.abs(lum[1:, :] - lum[: h - 1, :])

    ph = math.ceil(h / TOY_STRIDE) * TOY_STRIDE
    pw = math.ceil(w / TOY_STRIDE) * TOY_STRIDE
    channels = []
    for plane in (lum, gx, gy):
        padded = np.zeros((ph, pw), dtype=np.float64)
        padded[:h, :w] = plane
        channels.append(_block_mean(padded, TOY_STRIDE))
    return FeatureMap(np.stack(channels, axis=2), stride=TOY_STRIDE)


class ToyBackbone:
    stride = TOY_STRIDE

    def __call__(self, patch: np.ndarray) -> FeatureMap:
        return toy_backbone(patch)


@dataclass(frozen=True)
class ToyRpnScorer:
    """Regresses anchors onto bright connected blobs in the pooled luminance.

    Cells above the luminance threshold are labeled into 4-connected
    components; each anchor scores as its IoU with the nearest component's
    bounding box and regresses exactly onto it, so surviving proposals are
    the blob boxes themselves.
    """

    luminance_threshold: float = 0.5

    def __call__(self, fmap: FeatureMap, anchors: list[Box]):
        n = len(anchors)
        labeled, count = ndimage.label(fmap.values[:, :, 0] >= self.luminance_threshold)
        if count == 0:
            return np.zeros(n), [ZERO_DELTA] * n

        stride = fmap.stride
        blobs = []
        for k in range(1, count + 1):
            ys, xs = np.nonzero(labeled == k)
            blobs.append(
                (xs.min() * stride, ys.min() * stride,
                 (xs.max() + 1) * stride, (ys.max() + 1) * stride)
            )
        blob_arr = np.array(blobs, dtype=np.float64)
        arr = np.array([a.as_tuple() for a in anchors], dtype=np.float64).reshape(-1, 4)
        ix = np.minimum(arr[:, None, 2], blob_arr[None, :, 2]) - np.maximum(
            arr[:, None, 0], blob_arr[None, :, 0]
        )
        iy = np.minimum(arr[:, None, 3], blob_arr[None, :, 3]) - np.maximum(
            arr[:, None, 1], blob_arr[None, :, 1]
        )
        inter = np.maximum(ix, 0.0) * np.maximum(iy, 0.0)
        area_a = (arr[:, 2] - arr[:, 0]) * (arr[:, 3] - arr[:, 1])
        area_b = (blob_arr[:, 2] - blob_arr[:, 0]) * (blob_arr[:, 3] - blob_arr[:, 1])
        iou = inter / (area_a[:, None] + area_b[None, :] - inter)
        best = iou.argmax(axis=1)
        scores = iou[np.arange(n), best]
        boxes = [Box(*b) for b in blobs]
        deltas = [
            encode_deltas(anchor, boxes[k]) if s > 0.0 else ZERO_DELTA
            for anchor, k, s in zip(anchors, best, scores)
        ]
        return scores, deltas


@dataclass(frozen=True)
class ToyHead:
    """Building probability follows the RoI's bright quantile; the mask
    follows luminance >= 0.5.

    The upper quantile (rather than the mean) keeps small blobs detectable:
    their feature-cell-quantized boxes carry a dark margin that would dilute
    a mean score below any sensible threshold.
    """

    mask_size: int = DEFAULT_MASK_SIZE
    mask_gain: float = 12.0
    score_quantile: float = 0.8

    def __call__(self, features: np.ndarray, proposal: Box) -> HeadOutputs:
        lum = features[:, :, 0]
        p = float(np.clip(np.quantile(lum, self.score_quantile), 1e-6, 1.0 - 1e-6))
        side = lum.shape[0]
        idx = np.minimum(
            ((np.arange(self.mask_size) + 0.5) * side / self.mask_size).astype(np.int64),
            side - 1,
        )
        grid = lum[np.ix_(idx, idx)]
        return HeadOutputs(
            class_logits=(0.0, math.log(p / (1.0 - p))),
            box_delta=ZERO_DELTA,
            mask_logits=(grid - 0.5) * self.mask_gain,
        )
