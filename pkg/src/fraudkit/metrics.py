"""Confusion-matrix metrics and ROC/AUC for binary scores.

Conventions pinned here: a sample is predicted positive iff its score is
>= the threshold; zero-denominator precision/recall/F1 return 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, LengthMismatch, SingleClass


@dataclass
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass
class RocCurve:
    """Ordered (fpr, tpr) points from (0,0) to (1,1), both non-decreasing."""

    fpr: np.ndarray
    tpr: np.ndarray

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("fpr,tpr\n")
            for x, y in zip(self.fpr, self.tpr):
                fh.write(f"{format(x, '.17g')},{format(y, '.17g')}\n")


@dataclass
class MetricsReport:
    precision: float
    recall: float
    f1: float
    roc_auc: float
    threshold: float


def _check_pair(labels, scores):
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=np.float64)
    if labels.shape != scores.shape:
        raise LengthMismatch(f"{labels.shape} labels vs {scores.shape} scores")
    if labels.size == 0:
        raise EmptyInput("no samples")
    return labels, scores


def confusion(labels, scores, threshold: float) -> ConfusionMatrix:
    labels, scores = _check_pair(labels, scores)
    pred = scores >= threshold
    pos = labels == 1
    return ConfusionMatrix(
        tp=int(np.sum(pred & pos)),
        fp=int(np.sum(pred & ~pos)),
        fn=int(np.sum(~pred & pos)),
        tn=int(np.sum(~pred & ~pos)),
    )


def prf1(cm: ConfusionMatrix) -> tuple[float, float, float]:
    """Precision, recall and their harmonic mean, with 0-denominator -> 0."""
    precision = cm.tp / (cm.tp + cm.fp) if (cm.tp + cm.fp) > 0 else 0.0
    recall = cm.tp / (cm.tp + cm.fn) if (cm.tp + cm.fn) > 0 else 0.0
    f1 = (2.0 * precision * recall / (precision + recall)
          if (precision + recall) > 0 else 0.0)
    return precision, recall, f1


def roc_curve(labels, scores) -> RocCurve:
    """Threshold sweep at each distinct score descending; samples with equal
    scores move together, so there is one vertex per distinct score."""
    labels, scores = _check_pair(labels, scores)
    n_pos = int(np.sum(labels == 1))
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("roc_curve needs at least one positive and one negative")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_pos = (labels[order] == 1).astype(np.int64)

    # last index of each distinct-score group after descending sort
    distinct_end = np.flatnonzero(np.diff(sorted_scores) != 0)
    distinct_end = np.concatenate([distinct_end, [scores.size - 1]])

    cum_tp = np.cumsum(sorted_pos)[distinct_end]
    cum_fp = (distinct_end + 1) - cum_tp

    fpr = np.concatenate([[0.0], cum_fp / n_neg, [1.0]])
    tpr = np.concatenate([[0.0], cum_tp / n_pos, [1.0]])
    return RocCurve(fpr=fpr, tpr=tpr)


def roc_auc(labels, scores) -> float:
    """Trapezoidal area under the ROC curve.

    Equals the Mann-Whitney statistic P(score+ > score-) + 0.5*P(equal)
    over all positive/negative pairs.
    """
    curve = roc_curve(labels, scores)
    return float(np.trapezoid(curve.tpr, curve.fpr))


def evaluate(labels, scores, threshold: float = 0.5) -> MetricsReport:
    """Full report: precision/recall/F1 at the threshold plus ROC AUC."""
    cm = confusion(labels, scores, threshold)
    precision, recall, f1 = prf1(cm)
    return MetricsReport(precision=precision, recall=recall, f1=f1,
                         roc_auc=roc_auc(labels, scores), threshold=threshold)
