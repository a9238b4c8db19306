"""Figure rendering for CLI reports.

Uses the non-interactive Agg backend and writes PNG files next to the
delimited output; nothing here opens a window.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .core import SomMap
from .search import SearchRun


def save_ranked_metric(ranked: list[SearchRun], path, title: str = "") -> Path | None:
    """Metric value by rank for a finished search; None when no run scored."""
    values = [run.value for run in ranked if run.value is not None]
    if not values:
        return None
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(range(len(values)), values, marker="o", markersize=3, linewidth=1)
    ax.set_xlabel("rank")
    ax.set_ylabel(ranked[0].metric)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_rate_curve(rates: list[float], values: list[float], path, metric: str = "accuracy") -> Path | None:
    """Best metric value against supervision rate, log-scaled on x."""
    pairs = [(r, v) for r, v in zip(rates, values) if v is not None]
    if not pairs:
        return None
    path = Path(path)
    xs = [max(r, 1e-4) for r, _ in pairs]  # keep rate 0 plottable on a log axis
    ys = [v for _, v in pairs]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.semilogx(xs, ys, marker="o")
    ax.set_xlabel("supervision rate")
    ax.set_ylabel(f"best {metric}")
    ax.grid(True, which="both", alpha=0.3)
    ax.set_xticks(xs)
    ax.set_xticklabels([f"{r:g}" for r, _ in pairs])
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_map_overview(som: SomMap, path) -> Path | None:
    """Two-panel portrait of a trained map.

    Top: per-node relevance profiles as a heat map (rows are nodes). Bottom:
    win counts per node, bars annotated with class labels where present.
    """
    if len(som) == 0:
        return None
    path = Path(path)
    ids = sorted(som.nodes)
    relevance = np.stack([som.nodes[i].relevance for i in ids])
    wins = [som.nodes[i].wins for i in ids]
    labels = [som.nodes[i].label for i in ids]

    fig, (ax_rel, ax_win) = plt.subplots(
        2, 1, figsize=(7, 6), gridspec_kw={"height_ratios": [3, 2]}
    )
    im = ax_rel.imshow(relevance, aspect="auto", cmap="viridis", vmin=0.0, vmax=1.0)
    ax_rel.set_xlabel("dimension")
    ax_rel.set_ylabel("node")
    ax_rel.set_title(f"relevance profiles ({len(ids)} nodes)")
    fig.colorbar(im, ax=ax_rel, fraction=0.04)

    ax_win.bar(range(len(ids)), wins, color="#4878a8")
    ax_win.set_xlabel("node")
    ax_win.set_ylabel("wins")
    for x, (w, lab) in enumerate(zip(wins, labels)):
        if lab is not None:
            ax_win.text(x, w, str(lab), ha="center", va="bottom", fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
