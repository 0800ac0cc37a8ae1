"""Optional SVG emission for curves, agreement plots, and differentials.

Presentation-only: the CSV/JSON artifacts are the contract, these exist so
runs are eyeballable without a notebook.  Requires matplotlib
(``pip install ledgerlab[plots]``).
"""
from __future__ import annotations

from typing import Mapping, Sequence

from .metrics import BlandAltman, CurvePoint


def _pyplot():
    try:
        import matplotlib

        matplotlib.use("svg")
        import matplotlib.pyplot as plt
    except ImportError as exc:  # pragma: no cover - exercised only without extra
        raise RuntimeError("SVG output requires matplotlib (ledgerlab[plots])") from exc
    return plt


def plot_learning_curve(points: Sequence[CurvePoint], path: str, title: str = "") -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    x = [p.fraction for p in points]
    for label, mean, sd, color in (
        ("training", [p.train_mean for p in points], [p.train_sd for p in points], "tab:red"),
        ("validation", [p.val_mean for p in points], [p.val_sd for p in points], "tab:green"),
    ):
        ax.plot(x, mean, marker="o", color=color, label=label)
        lower = [m - s for m, s in zip(mean, sd)]
        upper = [m + s for m, s in zip(mean, sd)]
        ax.fill_between(x, lower, upper, color=color, alpha=0.15)
    ax.set_xlabel("training fraction")
    ax.set_ylabel("recall average macro")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_bland_altman(
    scores_a: Sequence[float],
    scores_b: Sequence[float],
    stats: BlandAltman,
    path: str,
    labels: Sequence[str] | None = None,
) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    means = [(a + b) / 2 for a, b in zip(scores_a, scores_b)]
    diffs = [a - b for a, b in zip(scores_a, scores_b)]
    ax.scatter(means, diffs, color="tab:gray")
    if labels:
        for x, y, lab in zip(means, diffs, labels):
            ax.annotate(lab, (x, y), fontsize=7, xytext=(3, 3), textcoords="offset points")
    ax.axhline(stats.mean_diff, color="tab:red", label="mean difference")
    ax.axhline(stats.lower_limit, color="tab:blue", linestyle="--", label="limits of agreement")
    ax.axhline(stats.upper_limit, color="tab:blue", linestyle="--")
    ax.set_xlabel("pair mean score")
    ax.set_ylabel("score difference")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_differential(deltas: Mapping[str, float], path: str) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    names = sorted(deltas)
    values = [deltas[n] for n in names]
    colors = ["tab:green" if v >= 0 else "tab:orange" for v in values]
    ax.bar(range(len(names)), values, color=colors)
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("recall average macro delta")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
