"""Evaluation report formatting and figure rendering."""

from __future__ import annotations

from pathlib import Path

from .evaluation import EvalReport
from .fileio import atomic_write_text


def format_report(report: EvalReport) -> str:
    """Tab-delimited key/value text, one metric per line."""
    lines = [
        f"iou_kind\t{report.iou_kind}",
        f"iou_threshold\t{report.iou_threshold:g}",
        f"tp\t{report.tp}",
        f"fp\t{report.fp}",
        f"fn\t{report.fn}",
        f"precision\t{report.precision:.6f}",
        f"recall\t{report.recall:.6f}",
        f"f1\t{report.f1:.6f}",
    ]
    return "\n".join(lines) + "\n"


def write_report(path: str | Path, report: EvalReport) -> None:
    atomic_write_text(path, format_report(report))


def render_report_figure(report: EvalReport, path: str | Path) -> None:
    """Save a bar chart of precision/recall/F1 next to the text report."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    names = ["precision", "recall", "f1"]
    values = [report.precision, report.recall, report.f1]

    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    bars = ax.bar(names, values, color=["#3465a4", "#73d216", "#f57900"])
    for bar, value in zip(bars, values):
        ax.annotate(
            f"{value:.3f}",
            (bar.get_x() + bar.get_width() / 2, value),
            ha="center", va="bottom", fontsize=9,
        )
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("score")
    ax.set_title(
        f"{report.iou_kind} IoU ≥ {report.iou_threshold:g}   "
        f"tp={report.tp} fp={report.fp} fn={report.fn}",
        fontsize=10,
    )
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
