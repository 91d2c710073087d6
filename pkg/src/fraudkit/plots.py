"""Matplotlib figure rendering for the report path.

Figures are written next to the delimited outputs; everything here is
best-effort presentation and never feeds back into the numbers.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def plot_roc_curves(curves, path):
    """Overlay ROC curves; `curves` is a list of (name, RocCurve)."""
    fig, ax = plt.subplots(figsize=(6, 5))
    for name, curve in curves:
        ax.plot(curve.fpr, curve.tpr, lw=1.2, label=name)
    ax.plot([0, 1], [0, 1], ls="--", c="grey", lw=0.8)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_title("ROC curves")
    ax.legend(fontsize=7, loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_embedding(Y, labels, path):
    """2-D embedding scatter, colored by class."""
    fig, ax = plt.subplots(figsize=(6, 5))
    neg = labels == 0
    ax.scatter(Y[neg, 0], Y[neg, 1], s=6, c="tab:blue", alpha=0.5,
               label="legitimate", linewidths=0)
    ax.scatter(Y[~neg, 0], Y[~neg, 1], s=10, c="tab:red", alpha=0.8,
               label="fraud", linewidths=0)
    ax.set_xlabel("dim 1")
    ax.set_ylabel("dim 2")
    ax.set_title("t-SNE embedding")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
