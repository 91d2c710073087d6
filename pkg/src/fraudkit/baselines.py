"""Classical comparison models: brute-force kNN, logistic regression via
full-batch gradient descent, and a CART decision tree with Gini splits.

All three emit probability scores in [0,1] so the metrics module can treat
them interchangeably with the boosted model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, KTooLarge, SingleClass
from .gbdt import Tree, _sigmoid
from .tabular import Dataset


# --- k-nearest neighbors ---------------------------------------------------

@dataclass
class KnnParams:
    k: int = 5


def knn_score(train: Dataset, query, params: KnnParams) -> float:
    """Fraction of the k nearest training rows (Euclidean, ties by lower
    index) labeled 1."""
    query = np.asarray(query, dtype=np.float64)
    if query.shape != (train.n_features,):
        raise DimensionMismatch(f"expected vector of length {train.n_features}")
    if params.k > train.n_rows:
        raise KTooLarge(f"k={params.k} but only {train.n_rows} training rows")
    d = np.sum((train.rows - query) ** 2, axis=1)
    order = np.argsort(d, kind="stable")[:params.k]
    return float(np.mean(train.labels[order] == 1))


def knn_score_batch(train: Dataset, queries: np.ndarray, params: KnnParams,
                    chunk: int = 512) -> np.ndarray:
    """Vectorized knn_score over many query rows."""
    queries = np.asarray(queries, dtype=np.float64)
    if params.k > train.n_rows:
        raise KTooLarge(f"k={params.k} but only {train.n_rows} training rows")
    train_sq = np.sum(train.rows ** 2, axis=1)
    pos = (train.labels == 1).astype(np.float64)
    out = np.empty(queries.shape[0], dtype=np.float64)
    for start in range(0, queries.shape[0], chunk):
        q = queries[start:start + chunk]
        d = np.sum(q ** 2, axis=1)[:, None] + train_sq[None, :] - 2.0 * q @ train.rows.T
        order = np.argsort(d, axis=1, kind="stable")[:, :params.k]
        out[start:start + chunk] = pos[order].mean(axis=1)
    return out


# --- logistic regression ---------------------------------------------------

@dataclass
class LogRegModel:
    weights: np.ndarray
    bias: float
    iterations: int
    final_loss: float


def _logreg_loss(X, y, w, b, l2):
    z = X @ w + b
    # log(1 + exp(-margin)) computed stably
    margin = np.where(y == 1, z, -z)
    loss = np.mean(np.logaddexp(0.0, -margin))
    return loss + 0.5 * l2 * float(w @ w)


def logreg_fit(train: Dataset, learning_rate: float = 0.1, epochs: int = 300,
               l2: float = 0.0, seed: int = 0) -> LogRegModel:
    """Full-batch gradient descent on L2-regularized logistic loss from zero
    initialization. If a step would increase the loss, the step is halved
    until the loss decreases (keeping the loss sequence non-increasing)."""
    n0, n1 = train.class_counts()
    if n0 == 0 or n1 == 0:
        raise SingleClass("training data must contain both classes")
    X = train.rows
    y = train.labels.astype(np.float64)
    n = X.shape[0]
    w = np.zeros(X.shape[1])
    b = 0.0
    loss = _logreg_loss(X, y, w, b, l2)
    ran = 0
    for it in range(epochs):
        p = _sigmoid(X @ w + b)
        grad_w = X.T @ (p - y) / n + l2 * w
        grad_b = float(np.mean(p - y))
        step = learning_rate
        while True:
            w_new = w - step * grad_w
            b_new = b - step * grad_b
            loss_new = _logreg_loss(X, y, w_new, b_new, l2)
            if loss_new <= loss or step < 1e-12:
                break
            step *= 0.5
        if loss_new > loss:
            break  # no descent possible along the gradient; stop early
        w, b, loss = w_new, b_new, loss_new
        ran = it + 1
    return LogRegModel(weights=w, bias=b, iterations=ran, final_loss=loss)


def logreg_score(model: LogRegModel, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != model.weights.shape:
        raise DimensionMismatch(f"expected vector of length {model.weights.size}")
    return float(_sigmoid(x @ model.weights + model.bias))


def logreg_score_batch(model: LogRegModel, X: np.ndarray) -> np.ndarray:
    return _sigmoid(np.asarray(X, dtype=np.float64) @ model.weights + model.bias)


# --- CART decision tree ----------------------------------------------------

@dataclass
class CartParams:
    max_depth: int = 6
    min_samples_leaf: int = 1


def _gini(n_pos, n_total):
    if n_total == 0:
        return 0.0
    p = n_pos / n_total
    return 2.0 * p * (1.0 - p)


def _best_gini_split(X, y, rows, min_samples_leaf):
    """Exhaustive (feature, midpoint) scan minimizing weighted child Gini.
    Returns (feature, threshold, weighted_gini) or None."""
    n = rows.size
    best = None
    best_score = _gini(int(np.sum(y[rows])), n)  # must strictly improve
    for f in range(X.shape[1]):
        vals = X[rows, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        sy = y[rows][order]
        distinct_mask = sv[1:] != sv[:-1]
        if not np.any(distinct_mask):
            continue
        cut = np.flatnonzero(distinct_mask)  # left part = sv[:cut+1]
        left_n = cut + 1
        right_n = n - left_n
        ok = (left_n >= min_samples_leaf) & (right_n >= min_samples_leaf)
        if not np.any(ok):
            continue
        left_pos = np.cumsum(sy)[cut]
        total_pos = float(np.sum(sy))
        right_pos = total_pos - left_pos
        pl = left_pos / left_n
        pr = right_pos / right_n
        weighted = (left_n * 2.0 * pl * (1.0 - pl)
                    + right_n * 2.0 * pr * (1.0 - pr)) / n
        weighted = np.where(ok, weighted, np.inf)
        j = int(np.argmin(weighted))
        if weighted[j] < best_score - 1e-15:
            best_score = float(weighted[j])
            threshold = (sv[cut[j]] + sv[cut[j] + 1]) / 2.0
            best = (f, float(threshold), best_score)
    return best


def cart_fit(train: Dataset, params: CartParams) -> Tree:
    """Greedy CART with Gini impurity; leaf values are positive fractions.

    Reuses the gbdt Tree container, but split thresholds are raw feature
    values (route left iff value <= threshold); score with cart_score."""
    X = train.rows
    y = train.labels.astype(np.float64)

    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    def build(rows, depth, node_id):
        n_pos = int(np.sum(y[rows]))
        value[node_id] = n_pos / rows.size
        if depth >= params.max_depth or n_pos == 0 or n_pos == rows.size:
            return
        best = _best_gini_split(X, y, rows, params.min_samples_leaf)
        if best is None:
            return
        f, t, _ = best
        mask = X[rows, f] <= t
        li = new_node()
        ri = new_node()
        feature[node_id] = f
        threshold[node_id] = t
        left[node_id] = li
        right[node_id] = ri
        build(rows[mask], depth + 1, li)
        build(rows[~mask], depth + 1, ri)

    root = new_node()
    build(np.arange(train.n_rows), 0, root)
    return Tree(feature=np.asarray(feature, dtype=np.int32),
                threshold=np.asarray(threshold, dtype=np.float64),
                left=np.asarray(left, dtype=np.int32),
                right=np.asarray(right, dtype=np.int32),
                value=np.asarray(value, dtype=np.float64))


def cart_score(tree: Tree, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    node = 0
    while tree.feature[node] >= 0:
        if x[tree.feature[node]] <= tree.threshold[node]:
            node = tree.left[node]
        else:
            node = tree.right[node]
    return float(tree.value[node])


def cart_score_batch(tree: Tree, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    node = np.zeros(n, dtype=np.int32)
    active = tree.feature[node] >= 0
    while np.any(active):
        idx = np.flatnonzero(active)
        cur = node[idx]
        feats = tree.feature[cur]
        go_left = X[idx, feats] <= tree.threshold[cur]
        node[idx] = np.where(go_left, tree.left[cur], tree.right[cur])
        active = tree.feature[node] >= 0
    return tree.value[node]
