"""Matplotlib figures written next to the JSON/CSV outputs."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .ranking import importance_order  # noqa: E402

# Fixed metadata keeps repeated renders byte-stable.
_PNG_META = {"Software": None}


def _bar_axes(ax, report):
    order = importance_order(report.final)
    scores = np.asarray(report.final)[order]
    labels = [report.feature_labels[j] for j in order]
    colors = ["#3b6ea8" if s >= 0 else "#c0504d" for s in scores]
    ypos = np.arange(len(order))
    ax.barh(ypos, scores, color=colors)
    ax.set_yticks(ypos, labels, fontsize=8)
    ax.invert_yaxis()
    ax.axvline(0.0, color="#333", linewidth=0.8)
    ax.set_xlabel("importance")
    ax.set_title(report.model_descriptor, fontsize=9)


def importance_figure(reports, path, title: str | None = None):
    reports = list(reports)
    cols = math.ceil(math.sqrt(len(reports)))
    rows = math.ceil(len(reports) / cols)
    fig, axes = plt.subplots(rows, cols, figsize=(4.2 * cols, 0.35 * max(len(r.final) for r in reports) * rows + 1.5 * rows),
                             squeeze=False)
    for ax in axes.ravel()[len(reports):]:
        ax.axis("off")
    for ax, r in zip(axes.ravel(), reports):
        _bar_axes(ax, r)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_PNG_META)
    plt.close(fig)


def ablation_figure(result, path, k: int = 3):
    key = f"recall_at_{k}"
    recs = [r for r in result.records if r.get(key) is not None]
    cells = sorted({(r["dataset"], r["model"]) for r in recs})
    configs = list(dict.fromkeys(r["config"] for r in recs))
    lookup = {(r["dataset"], r["model"], r["config"]): r[key] for r in recs}
    fig, ax = plt.subplots(figsize=(max(6, 1.3 * len(cells)), 4))
    width = 0.8 / max(1, len(configs))
    x = np.arange(len(cells))
    for i, c in enumerate(configs):
        ax.bar(x + i * width, [lookup.get((d, m, c), np.nan) for d, m in cells], width, label=c)
    ax.set_xticks(x + width * (len(configs) - 1) / 2, [f"{d}\n{m}" for d, m in cells], fontsize=8)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel(f"Recall@{k}")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_PNG_META)
    plt.close(fig)


def benchmark_figure(result, path):
    recs = [r for r in result.records if r.get("seed") == "mean" and not r["error"]]
    labels = [f"{r['dataset']}\n{r['model']}" for r in recs]
    x = np.arange(len(recs))
    fig, ax = plt.subplots(figsize=(max(6, 0.8 * len(recs)), 4))
    ax.bar(x - 0.2, [r["classical"]["accuracy"] for r in recs], 0.4, label="classical")
    ax.bar(x + 0.2, [r["quxai"]["accuracy"] for r in recs], 0.4, label="amplitude-encoded")
    ax.set_xticks(x, labels, fontsize=7)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("test accuracy")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_PNG_META)
    plt.close(fig)
