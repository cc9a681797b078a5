"""Figure rendering for the report paths.

Every report-producing CLI command drops a PNG next to its text/TSV/JSON
output.  Rendering is headless (Agg) and deterministic: PNG metadata is
stripped so repeated runs produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analytics import CorrelationMatrix, MentionTable, CATEGORY_ORDER
from .evaluation import EvalReport, class_display

_SAVE_KWARGS = {"dpi": 120, "metadata": {"Software": None}}

CATEGORY_COLORS = {
    "Gender": "#7b4fa6",
    "Ethnicity": "#2b7a4b",
    "Sexual Orientation": "#c4622d",
    "Sexual Or.": "#c4622d",
    "Religion": "#2e5f8a",
    "Mention": "#555555",
}


def plot_eval_report(report: EvalReport, path: str | Path) -> None:
    """Grouped bars: precision / recall / F1 per class."""
    names = [class_display(c) for c in report.classes]
    metrics = np.array(
        [
            [report.per_class[c].precision for c in report.classes],
            [report.per_class[c].recall for c in report.classes],
            [report.per_class[c].f1 for c in report.classes],
        ]
    )
    x = np.arange(len(names))
    width = 0.27
    fig, ax = plt.subplots(figsize=(7, 3.6))
    for i, (label, color) in enumerate(
        zip(("Precision", "Recall", "F1"), ("#4878a8", "#a85448", "#6a9a58"))
    ):
        ax.bar(x + (i - 1) * width, metrics[i], width, label=label, color=color)
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=15, ha="right", fontsize=8)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.axhline(report.micro.f1, color="#333333", lw=0.8, ls="--",
               label=f"micro F1 = {report.micro.f1:.2f}")
    ax.legend(fontsize=8, ncol=4, loc="lower right")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def plot_mentions(table: MentionTable, path: str | Path) -> None:
    """Total comments-with-mentions per category."""
    names = [
        c.display if c.display != "Sexual Orientation" else "Sexual Or."
        for c in CATEGORY_ORDER
    ]
    counts = [table.totals[c] for c in CATEGORY_ORDER]
    fig, ax = plt.subplots(figsize=(5.5, 3.2))
    ax.bar(names, counts, color=[CATEGORY_COLORS[n] for n in names])
    for i, v in enumerate(counts):
        ax.text(i, v, str(v), ha="center", va="bottom", fontsize=8)
    ax.set_ylabel("comments with mentions")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def plot_intersections(totals: dict[tuple[str, str], int], path: str | Path) -> None:
    """Aggregate span-pair co-occurrence counts, one bar per category pair."""
    keys = sorted(totals, key=lambda k: (k[0] != k[1], k))
    labels = [f"({a},{b})" for a, b in keys]
    counts = [totals[k] for k in keys]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.6 * len(keys) + 2), 3.2))
    ax.bar(labels, counts, color="#4878a8")
    for i, v in enumerate(counts):
        ax.text(i, v, str(v), ha="center", va="bottom", fontsize=8)
    ax.set_ylabel("span pairs")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def plot_correlation_matrix(matrix: CorrelationMatrix, path: str | Path) -> None:
    """Heatmap of the interaction/mention correlation matrix; undefined
    cells are left blank."""
    values = matrix.values
    k = len(matrix.variables)
    fig, ax = plt.subplots(figsize=(6, 5))
    masked = np.ma.masked_invalid(values)
    im = ax.imshow(masked, vmin=-1, vmax=1, cmap="RdBu_r")
    ax.set_xticks(range(k))
    ax.set_yticks(range(k))
    ax.set_xticklabels(matrix.variables, rotation=35, ha="right", fontsize=8)
    ax.set_yticklabels(matrix.variables, fontsize=8)
    for i in range(k):
        for j in range(k):
            if np.isnan(values[i, j]):
                label = "n/a"
            else:
                label = f"{values[i, j]:.2f}"
            ax.text(j, i, label, ha="center", va="center", fontsize=7)
    fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
