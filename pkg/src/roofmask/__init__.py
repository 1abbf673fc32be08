"""Rooftop instance detection over aerial orthophoto tiles.

A library plus CLI covering the geometric and numerical core of a two-stage
detector: grid tiling, anchor proposals, exact bilinear RoI pooling,
pluggable classification/mask heads, cross-tile stitching, and instance-level
precision/recall/F1 evaluation.
"""

from .errors import (
    CorruptDataError,
    DegenerateBoxError,
    DegenerateRoiError,
    InvalidArgumentError,
    RoofmaskError,
)
from .evaluation import (
    EvalReport,
    GroundTruthInstance,
    MatchResult,
    PixelConfusion,
    aggregate,
    instances_from_mask,
    mask_iou,
    match_detections,
    pixel_confusion,
    precision_recall_f1,
)
from .geometry import BUILDING, Box, Detection, MaskPatch, clip_box, iou_box
from .heads import (
    HeadOutputs,
    PipelineConfig,
    paste_mask,
    run_patch_pipeline,
    softmax,
)
from .proposal import (
    AnchorSpec,
    BoxDelta,
    ProposalConfig,
    ZERO_DELTA,
    decode_deltas,
    encode_deltas,
    filter_proposals,
    generate_anchors,
    nms,
)
from .rle import RleMask, rle_decode, rle_encode
from .roialign import FeatureMap, RoiAlignConfig, bilinear_sample, roi_align
from .tiling import Tile, TileGrid, extract_tile, make_grid, split_dataset, stitch, tile_to_global
from .toynet import ToyBackbone, ToyHead, ToyRpnScorer, toy_backbone

__all__ = [
    "AnchorSpec",
    "BUILDING",
    "Box",
    "BoxDelta",
    "CorruptDataError",
    "DegenerateBoxError",
    "DegenerateRoiError",
    "Detection",
    "EvalReport",
    "FeatureMap",
    "GroundTruthInstance",
    "HeadOutputs",
    "InvalidArgumentError",
    "MaskPatch",
    "MatchResult",
    "PipelineConfig",
    "PixelConfusion",
    "ProposalConfig",
    "RleMask",
    "RoiAlignConfig",
    "RoofmaskError",
    "Tile",
    "TileGrid",
    "ToyBackbone",
    "ToyHead",
    "ToyRpnScorer",
    "ZERO_DELTA",
    "aggregate",
    "bilinear_sample",
    "clip_box",
    "decode_deltas",
    "encode_deltas",
    "extract_tile",
    "filter_proposals",
    "generate_anchors",
    "instances_from_mask",
    "iou_box",
    "make_grid",
    "mask_iou",
    "match_detections",
    "nms",
    "paste_mask",
    "pixel_confusion",
    "precision_recall_f1",
    "rle_decode",
    "rle_encode",
    "roi_align",
    "run_patch_pipeline",
    "softmax",
    "split_dataset",
    "stitch",
    "tile_to_global",
    "toy_backbone",
]
