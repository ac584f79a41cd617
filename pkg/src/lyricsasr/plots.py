"""SVG figures for experiment reports (matplotlib, headless)."""

from __future__ import annotations

from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .eval.reports import ConfidenceBin  # noqa: E402

# fixed ids and no timestamp so the same data always gives the same bytes
_SVG_META = {"Date": None, "Creator": None}
plt.rcParams["svg.hashsalt"] = "lyricsasr"


def _save(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def confidence_histogram(bins_by_stream: Mapping[str, Sequence[ConfidenceBin]], path) -> None:
    """Correct vs incorrect word counts per confidence bin, one panel per stream."""
    names = list(bins_by_stream)
    fig, axes = plt.subplots(1, len(names), figsize=(4 * len(names), 3.2), squeeze=False, sharey=True)
    for ax, name in zip(axes[0], names):
        bins = bins_by_stream[name]
        centres = [(b.low + b.high) / 2 for b in bins]
        width = (bins[0].high - bins[0].low) * 0.42
        ax.bar([c - width / 2 for c in centres], [b.correct for b in bins], width, label="correct")
        ax.bar([c + width / 2 for c in centres], [b.incorrect for b in bins], width, label="incorrect")
        ax.set_title(name)
        ax.set_xlabel("word confidence")
        ax.set_xlim(0, 1)
    axes[0][0].set_ylabel("words")
    axes[0][-1].legend(loc="upper left")
    _save(fig, path)


def wer_bars(table: Mapping[str, Mapping[str, float]], path, ylabel: str = "WER (%)") -> None:
    """Grouped bars: outer keys are groups (e.g. genres), inner keys are series (e.g. streams)."""
    groups = list(table)
    series = sorted({s for row in table.values() for s in row})
    fig, ax = plt.subplots(figsize=(1.6 + 1.4 * len(groups), 3.2))
    width = 0.8 / max(1, len(series))
    for k, s in enumerate(series):
        xs = [i + (k - (len(series) - 1) / 2) * width for i in range(len(groups))]
        ax.bar(xs, [table[g].get(s, float("nan")) for g in groups], width, label=s)
    ax.set_xticks(range(len(groups)), groups)
    ax.set_ylabel(ylabel)
    ax.legend()
    _save(fig, path)
