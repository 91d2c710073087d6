"""SMOTE: synthetic minority oversampling by interpolation between a
minority row and one of its k nearest minority neighbors.

The synthesis loop consumes the seeded generator in a fixed order per
sample (base draw, neighbor draw, lambda draw) so output is bit-identical
for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, KTooLarge, SingleClass
from .tabular import Dataset


@dataclass
class SmoteParams:
    k: int = 5
    target_ratio: float = 1.0   # minority:majority after synthesis
    seed: int = 0


@dataclass
class SynthesisDraw:
    """Audit record for one synthetic sample: x_new = x_base + lam*(x_nb - x_base)."""

    base_index: int       # index into the minority rows
    neighbor_index: int
    lam: float


def minority_neighbors(minority_rows: np.ndarray, i: int, k: int):
    """Indices of the k nearest minority rows to row i (Euclidean), excluding
    i itself; ties broken by lower index."""
    rows = np.asarray(minority_rows, dtype=np.float64)
    m = rows.shape[0]
    if k >= m:
        raise KTooLarge(f"k={k} but only {m} minority rows")
    d = np.sum((rows - rows[i]) ** 2, axis=1)
    d[i] = np.inf
    order = np.argsort(d, kind="stable")
    return [int(j) for j in order[:k]]


def _all_minority_neighbors(rows: np.ndarray, k: int) -> np.ndarray:
    """(m, k) neighbor table via one brute-force distance matrix."""
    m = rows.shape[0]
    if k >= m:
        raise KTooLarge(f"k={k} but only {m} minority rows")
    sq = np.sum(rows ** 2, axis=1)
    d = sq[:, None] + sq[None, :] - 2.0 * rows @ rows.T
    np.fill_diagonal(d, np.inf)
    return np.argsort(d, axis=1, kind="stable")[:, :k]


def synthesize_sample(x_i, x_neighbor, lam: float) -> np.ndarray:
    x_i = np.asarray(x_i, dtype=np.float64)
    x_neighbor = np.asarray(x_neighbor, dtype=np.float64)
    if x_i.shape != x_neighbor.shape:
        raise DimensionMismatch(f"{x_i.shape} vs {x_neighbor.shape}")
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must be in [0,1], got {lam}")
    return x_i + lam * (x_neighbor - x_i)


def smote_balance(train: Dataset, params: SmoteParams,
                  audit: list | None = None) -> Dataset:
    """Append synthetic minority rows until minority >= target_ratio * majority.

    Originals are kept unchanged as a prefix of the output. The minority
    class is the one with fewer rows (class 1 on a tie). Pass an ``audit``
    list to collect one :class:`SynthesisDraw` per synthetic row.
    """
    n0, n1 = train.class_counts()
    if n0 == 0 or n1 == 0:
        raise SingleClass("both classes must be present for SMOTE")
    minority_label = 1 if n1 <= n0 else 0
    minority_idx = np.flatnonzero(train.labels == minority_label)
    m = minority_idx.size
    majority = train.n_rows - m

    n_new = max(0, math.ceil(params.target_ratio * majority) - m)
    if n_new == 0:
        return Dataset(list(train.feature_names), train.rows.copy(), train.labels.copy())

    minority_rows = train.rows[minority_idx]
    neighbors = _all_minority_neighbors(minority_rows, params.k)

    rng = np.random.default_rng(params.seed)
    synth = np.empty((n_new, train.n_features), dtype=np.float64)
    for s in range(n_new):
        base = int(rng.integers(m))
        nb = int(neighbors[base, int(rng.integers(params.k))])
        lam = float(rng.random())
        synth[s] = minority_rows[base] + lam * (minority_rows[nb] - minority_rows[base])
        if audit is not None:
            audit.append(SynthesisDraw(base_index=base, neighbor_index=nb, lam=lam))

    rows = np.vstack([train.rows, synth])
    labels = np.concatenate([train.labels,
                             np.full(n_new, minority_label, dtype=np.int64)])
    return Dataset(list(train.feature_names), rows, labels)


def write_audit_log(draws, path) -> None:
    """One line per synthetic sample: base_index,neighbor_index,lambda."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("base_index,neighbor_index,lambda\n")
        for d in draws:
            fh.write(f"{d.base_index},{d.neighbor_index},{format(d.lam, '.17g')}\n")
