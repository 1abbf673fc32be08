"""Flat key=value configuration for the detection pipeline.

Unknown keys are errors by design: a misspelled threshold should fail the
run, not silently fall back to a default.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import InvalidArgumentError
from .heads import PipelineConfig
from .proposal import AnchorSpec, ProposalConfig
from .roialign import RoiAlignConfig

BACKBONES = ("toy",)
HEADS = ("toy",)


@dataclass(frozen=True)
class RunConfig:
    """Pipeline knobs plus which backbone/head implementation to use."""

    pipeline: PipelineConfig = PipelineConfig()
    backbone: str = "toy"
    head: str = "toy"


def default_config_text() -> str:
    return render_config(RunConfig())


def render_config(cfg: RunConfig) -> str:
    p = cfg.pipeline
    lines = [
        f"backbone = {cfg.backbone}",
        f"head = {cfg.head}",
        f"anchor.scales = {','.join(_fmt(v) for v in p.anchors.scales)}",
        f"anchor.ratios = {','.join(_fmt(v) for v in p.anchors.ratios)}",
        f"anchor.stride = {p.anchors.stride}",
        f"proposal.score_threshold = {_fmt(p.proposal.score_threshold)}",
        f"proposal.pre_nms_top_k = {p.proposal.pre_nms_top_k}",
        f"proposal.nms_iou = {_fmt(p.proposal.nms_iou)}",
        f"proposal.post_nms_top_n = {p.proposal.post_nms_top_n}",
        f"roi.output_size = {p.roi.output_size}",
        f"roi.sampling_points = {p.roi.sampling_points}",
        f"detection.score_threshold = {_fmt(p.detection_score_threshold)}",
        f"detection.nms_iou = {_fmt(p.detection_nms_iou)}",
        f"detection.mask_threshold = {_fmt(p.mask_binarize_threshold)}",
    ]
    return "\n".join(lines) + "\n"


def _fmt(v: float) -> str:
    return repr(float(v))


def _parse_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise InvalidArgumentError(f"config key {key!r}: {raw!r} is not a number") from None


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise InvalidArgumentError(f"config key {key!r}: {raw!r} is not an integer") from None


def _parse_triple(key: str, raw: str) -> tuple[float, float, float]:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 3:
        raise InvalidArgumentError(f"config key {key!r} needs exactly 3 comma-separated values")
    return tuple(_parse_float(key, p) for p in parts)  # type: ignore[return-value]


def parse_config(text: str) -> RunConfig:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArgumentError(f"config line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in values:
            raise InvalidArgumentError(f"config line {lineno}: duplicate key {key!r}")
        values[key] = value

    defaults = RunConfig()
    known = {
        "backbone", "head",
        "anchor.scales", "anchor.ratios", "anchor.stride",
        "proposal.score_threshold", "proposal.pre_nms_top_k",
        "proposal.nms_iou", "proposal.post_nms_top_n",
        "roi.output_size", "roi.sampling_points",
        "detection.score_threshold", "detection.nms_iou", "detection.mask_threshold",
    }
    unknown = set(values) - known
    if unknown:
        raise InvalidArgumentError(f"unknown config keys: {sorted(unknown)}")

    backbone = values.get("backbone", defaults.backbone)
    head = values.get("head", defaults.head)
    if backbone not in BACKBONES:
        raise InvalidArgumentError(f"unknown backbone {backbone!r}; available: {BACKBONES}")
    if head not in HEADS:
        raise InvalidArgumentError(f"unknown head {head!r}; available: {HEADS}")

    dp = defaults.pipeline
    anchors = AnchorSpec(
        scales=_parse_triple("anchor.scales", values["anchor.scales"])
        if "anchor.scales" in values else dp.anchors.scales,
        ratios=_parse_triple("anchor.ratios", values["anchor.ratios"])
        if "anchor.ratios" in values else dp.anchors.ratios,
        stride=_parse_int("anchor.stride", values["anchor.stride"])
        if "anchor.stride" in values else dp.anchors.stride,
    )
    proposal = ProposalConfig(
        score_threshold=_parse_float("proposal.score_threshold", values["proposal.score_threshold"])
        if "proposal.score_threshold" in values else dp.proposal.score_threshold,
        pre_nms_top_k=_parse_int("proposal.pre_nms_top_k", values["proposal.pre_nms_top_k"])
        if "proposal.pre_nms_top_k" in values else dp.proposal.pre_nms_top_k,
        nms_iou=_parse_float("proposal.nms_iou", values["proposal.nms_iou"])
        if "proposal.nms_iou" in values else dp.proposal.nms_iou,
        post_nms_top_n=_parse_int("proposal.post_nms_top_n", values["proposal.post_nms_top_n"])
        if "proposal.post_nms_top_n" in values else dp.proposal.post_nms_top_n,
    )
    roi = RoiAlignConfig(
        output_size=_parse_int("roi.output_size", values["roi.output_size"])
        if "roi.output_size" in values else dp.roi.output_size,
        sampling_points=_parse_int("roi.sampling_points", values["roi.sampling_points"])
        if "roi.sampling_points" in values else dp.roi.sampling_points,
    )
    pipeline = PipelineConfig(
        anchors=anchors,
        proposal=proposal,
        roi=roi,
        detection_score_threshold=_parse_float(
            "detection.score_threshold", values["detection.score_threshold"]
        ) if "detection.score_threshold" in values else dp.detection_score_threshold,
        detection_nms_iou=_parse_float("detection.nms_iou", values["detection.nms_iou"])
        if "detection.nms_iou" in values else dp.detection_nms_iou,
        mask_binarize_threshold=_parse_float(
            "detection.mask_threshold", values["detection.mask_threshold"]
        ) if "detection.mask_threshold" in values else dp.mask_binarize_threshold,
    )
    return RunConfig(pipeline=pipeline, backbone=backbone, head=head)


def read_config(path: str | Path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))
