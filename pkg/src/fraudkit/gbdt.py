"""Histogram-based gradient-boosted trees for binary classification.

Logistic loss with second-order (Newton) split gains and leaf values,
L1 soft-thresholding and L2 shrinkage on leaf statistics, and a choice of
leaf-wise (best-gain-first, capped by max_leaves) or level-wise
(breadth-first, capped by max_depth) growth. Feature values are discretized
into quantile bins once before boosting; split search scans bins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, FormatError, SingleClass
from .tabular import Dataset


@dataclass
class GbdtParams:
    n_trees: int = 200
    learning_rate: float = 0.1
    max_leaves: int = 31        # leaf-wise cap
    max_depth: int = 6          # level-wise cap
    growth: str = "leaf_wise"   # or "level_wise"
    l1: float = 0.0
    l2: float = 1.0
    min_split_gain: float = 0.0
    min_child_weight: float = 0.0
    max_bins: int = 256
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_bins < 2 or self.max_bins > 256:
            raise ValueError("max_bins must be in [2, 256]")
        if self.growth not in ("leaf_wise", "level_wise"):
            raise ValueError(f"unknown growth strategy {self.growth!r}")


@dataclass
class BinMapper:
    """Per-feature sorted bin-edge lists; value -> bin is total (values above
    the last edge fall in the last bin)."""

    edges: list  # list of np.ndarray, strictly increasing per feature

    def n_bins(self, feature: int) -> int:
        return len(self.edges[feature]) + 1

    def bin_value(self, feature: int, value: float) -> int:
        # bin index = number of edges strictly below the value
        return int(np.searchsorted(self.edges[feature], value, side="left"))

    def bin_matrix(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(X.shape, dtype=np.int32)
        for f in range(X.shape[1]):
            out[:, f] = np.searchsorted(self.edges[f], X[:, f], side="left")
        return out


@dataclass
class Tree:
    """Flat node arrays; feature == -1 marks a leaf. Split nodes route a row
    left iff its bin (or raw value, for CART reuse) is <= threshold."""

    feature: np.ndarray     # int32
    threshold: np.ndarray   # float64 (bin index for gbdt, raw value for CART)
    left: np.ndarray        # int32, -1 for leaves
    right: np.ndarray
    value: np.ndarray       # float64, leaf output (log-odds units for gbdt)

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def leaf_ids(self, binned: np.ndarray) -> np.ndarray:
        """Leaf node id for each pre-binned row."""
        n = binned.shape[0]
        node = np.zeros(n, dtype=np.int32)
        active = self.feature[node] >= 0
        while np.any(active):
            idx = np.flatnonzero(active)
            cur = node[idx]
            feats = self.feature[cur]
            go_left = binned[idx, feats] <= self.threshold[cur]
            node[idx] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.feature[node] >= 0
        return node

    def row_values(self, binned: np.ndarray) -> np.ndarray:
        return self.value[self.leaf_ids(binned)]


@dataclass
class GbdtModel:
    base_score: float            # log-odds
    trees: list
    bin_mapper: BinMapper
    feature_names: list
    importances: np.ndarray = None

    def __post_init__(self):
        if self.importances is None:
            self.importances = np.zeros(len(self.feature_names))

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        """Raw margins (log-odds) for a batch of rows."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != len(self.feature_names):
            raise DimensionMismatch(
                f"expected {len(self.feature_names)} features, got {X.shape[1]}")
        binned = self.bin_mapper.bin_matrix(X)
        margins = np.full(X.shape[0], self.base_score, dtype=np.float64)
        for tree in self.trees:
            margins += tree.row_values(binned)
        return margins

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(self.decision_scores(X))


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def _soft_threshold(G, alpha):
    if alpha <= 0:
        return G
    return np.sign(G) * np.maximum(np.abs(G) - alpha, 0.0)


def build_bins(train: Dataset, max_bins: int) -> BinMapper:
    """Quantile bin edges per feature, built from the distinct training values.

    With d distinct values and d <= max_bins, edges sit at midpoints between
    consecutive distinct values (d bins, one per value). Otherwise edges are
    the linear-interpolation (j/max_bins)-quantiles of the distinct values,
    deduplicated.
    """
    edges = []
    for f in range(train.n_features):
        distinct = np.unique(train.rows[:, f])
        d = distinct.size
        if d <= 1:
            edges.append(np.empty(0, dtype=np.float64))
        elif d <= max_bins:
            edges.append((distinct[:-1] + distinct[1:]) / 2.0)
        else:
            qs = np.arange(1, max_bins) / max_bins
            h = qs * (d - 1)
            lo = np.floor(h).astype(np.int64)
            frac = h - lo
            hi = np.minimum(lo + 1, d - 1)
            e = distinct[lo] + frac * (distinct[hi] - distinct[lo])
            edges.append(np.unique(e))
    return BinMapper(edges=edges)


class _GrowNode:
    __slots__ = ("node_id", "rows", "G", "H", "depth", "best")

    def __init__(self, node_id, rows, G, H, depth):
        self.node_id = node_id
        self.rows = rows
        self.G = G
        self.H = H
        self.depth = depth
        self.best = None  # (gain, feature, bin, left_rows, right_rows, stats)


def _best_split(binned, g, h, node, params, n_bins_per_feature):
    """Exhaustive scan over every (feature, bin) candidate; returns the
    admissible split with maximal gain (ties: lowest feature, lowest bin)
    or None."""
    rows = node.rows
    parent_term = _soft_threshold(np.array([node.G]), params.l1)[0] ** 2 / (node.H + params.l2)
    g_rows = g[rows]
    h_rows = h[rows]
    best = None
    best_gain = 0.0
    for f in range(binned.shape[1]):
        nb = n_bins_per_feature[f]
        if nb < 2:
            continue
        b = binned[rows, f]
        cnt = np.bincount(b, minlength=nb)
        Gh = np.bincount(b, weights=g_rows, minlength=nb)
        Hh = np.bincount(b, weights=h_rows, minlength=nb)
        cl = np.cumsum(cnt)[:-1]
        GL = np.cumsum(Gh)[:-1]
        HL = np.cumsum(Hh)[:-1]
        cr = rows.size - cl
        GR = node.G - GL
        HR = node.H - HL
        with np.errstate(invalid="ignore"):
            gain = 0.5 * (_soft_threshold(GL, params.l1) ** 2 / (HL + params.l2)
                          + _soft_threshold(GR, params.l1) ** 2 / (HR + params.l2)
                          - parent_term) - params.min_split_gain
        valid = ((cl > 0) & (cr > 0)
                 & (HL >= params.min_child_weight)
                 & (HR >= params.min_child_weight))
        gain = np.where(valid, gain, -np.inf)
        j = int(np.argmax(gain))           # first occurrence -> lowest bin
        if gain[j] > best_gain:            # strict -> lowest feature on ties
            best_gain = float(gain[j])
            best = (best_gain, f, j)
    if best is None:
        return None
    gain_val, f, j = best
    mask = binned[rows, f] <= j
    return (gain_val, f, j, rows[mask], rows[~mask])


def _leaf_value(G, H, params):
    s = _soft_threshold(np.array([G]), params.l1)[0]
    return -params.learning_rate * s / (H + params.l2)


def _grow_tree(binned, g, h, params, n_bins_per_feature):
    """Build one tree; returns (Tree, per-row leaf contributions, per-feature gain)."""
    n_rows = binned.shape[0]
    all_rows = np.arange(n_rows, dtype=np.int64)
    root = _GrowNode(0, all_rows, float(g.sum()), float(h.sum()), 0)
    nodes = [root]
    splits = {}       # node_id -> (feature, bin, left_id, right_id)
    gain_by_feature = np.zeros(binned.shape[1])

    def make_children(node, best):
        gain, f, j, lrows, rrows = best
        left = _GrowNode(len(nodes), lrows, float(g[lrows].sum()), float(h[lrows].sum()),
                         node.depth + 1)
        nodes.append(left)
        right = _GrowNode(len(nodes), rrows, float(g[rrows].sum()), float(h[rrows].sum()),
                          node.depth + 1)
        nodes.append(right)
        splits[node.node_id] = (f, j, left.node_id, right.node_id)
        gain_by_feature[f] += gain
        return left, right

    if params.growth == "leaf_wise":
        root.best = _best_split(binned, g, h, root, params, n_bins_per_feature)
        frontier = [root]
        n_leaves = 1
        while n_leaves < params.max_leaves:
            candidate = None
            for leaf in frontier:            # earliest leaf wins gain ties
                if leaf.best is not None and (candidate is None
                                              or leaf.best[0] > candidate.best[0]):
                    candidate = leaf
            if candidate is None:
                break
            left, right = make_children(candidate, candidate.best)
            frontier.remove(candidate)
            left.best = _best_split(binned, g, h, left, params, n_bins_per_feature)
            right.best = _best_split(binned, g, h, right, params, n_bins_per_feature)
            frontier.extend([left, right])
            n_leaves += 1
    else:
        queue = [root]
        while queue:
            node = queue.pop(0)
            if node.depth >= params.max_depth:
                continue
            best = _best_split(binned, g, h, node, params, n_bins_per_feature)
            if best is None:
                continue
            left, right = make_children(node, best)
            queue.extend([left, right])

    n = len(nodes)
    feature = np.full(n, -1, dtype=np.int32)
    threshold = np.zeros(n, dtype=np.float64)
    left_arr = np.full(n, -1, dtype=np.int32)
    right_arr = np.full(n, -1, dtype=np.int32)
    value = np.zeros(n, dtype=np.float64)
    contributions = np.zeros(n_rows, dtype=np.float64)
    for node in nodes:
        if node.node_id in splits:
            f, j, li, ri = splits[node.node_id]
            feature[node.node_id] = f
            threshold[node.node_id] = float(j)
            left_arr[node.node_id] = li
            right_arr[node.node_id] = ri
        else:
            v = _leaf_value(node.G, node.H, params)
            value[node.node_id] = v
            contributions[node.rows] = v
    tree = Tree(feature=feature, threshold=threshold, left=left_arr,
                right=right_arr, value=value)
    return tree, contributions, gain_by_feature


def train_gbdt(train: Dataset, params: GbdtParams) -> GbdtModel:
    """Boost params.n_trees trees on logistic loss.

    Per round, gradients g_i = p_i - y_i and hessians h_i = p_i (1 - p_i)
    are taken at the current margins; the base score is the log-odds of the
    training positive rate (clipped to [1e-6, 1 - 1e-6]).
    """
    n0, n1 = train.class_counts()
    if n0 == 0 or n1 == 0:
        raise SingleClass("training data must contain both classes")

    mapper = build_bins(train, params.max_bins)
    binned = mapper.bin_matrix(train.rows)
    n_bins_per_feature = [mapper.n_bins(f) for f in range(train.n_features)]

    p = min(max(n1 / (n0 + n1), 1e-6), 1.0 - 1e-6)
    base_score = math.log(p / (1.0 - p))

    y = train.labels.astype(np.float64)
    margins = np.full(train.n_rows, base_score, dtype=np.float64)
    trees = []
    importances = np.zeros(train.n_features)
    for _ in range(params.n_trees):
        prob = _sigmoid(margins)
        g = prob - y
        h = prob * (1.0 - prob)
        tree, contributions, gain_by_feature = _grow_tree(
            binned, g, h, params, n_bins_per_feature)
        margins += contributions
        importances += gain_by_feature
        trees.append(tree)

    return GbdtModel(base_score=base_score, trees=trees, bin_mapper=mapper,
                     feature_names=list(train.feature_names),
                     importances=importances)


def predict_proba(model: GbdtModel, x) -> float:
    """Probability for a single feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size != len(model.feature_names):
        raise DimensionMismatch(
            f"expected vector of length {len(model.feature_names)}")
    return float(model.predict_scores(x.reshape(1, -1))[0])


def feature_importance(model: GbdtModel) -> np.ndarray:
    """Total split gain accumulated per feature across all trees."""
    return model.importances.copy()


_FMT = ".17g"


def save_model(model: GbdtModel) -> str:
    """Line-oriented UTF-8 text blob, version header `gbdtmodel v1`."""
    lines = ["gbdtmodel v1", format(model.base_score, _FMT)]
    lines.append(f"nfeatures {len(model.feature_names)}")
    for i, name in enumerate(model.feature_names):
        lines.append(f"feature {i} {name}")
    for i, e in enumerate(model.bin_mapper.edges):
        lines.append("edges " + str(i) + "".join(" " + format(v, _FMT) for v in e))
    lines.append("importance" + "".join(" " + format(v, _FMT)
                                        for v in model.importances))
    for k, tree in enumerate(model.trees):
        lines.append(f"tree {k}")
        for nid in range(tree.n_nodes):
            if tree.feature[nid] >= 0:
                lines.append(f"node {nid} split {tree.feature[nid]} "
                             f"{int(tree.threshold[nid])} "
                             f"{tree.left[nid]} {tree.right[nid]}")
            else:
                lines.append(f"node {nid} leaf {format(tree.value[nid], _FMT)}")
    return "\n".join(lines) + "\n"


def load_model(blob: str) -> GbdtModel:
    lines = blob.splitlines()

    def fail(lineno, msg):
        raise FormatError(f"line {lineno + 1}: {msg}")

    if not lines or lines[0].strip() != "gbdtmodel v1":
        fail(0, "expected version header 'gbdtmodel v1'")
    try:
        base_score = float(lines[1])
    except (IndexError, ValueError):
        fail(1, "expected base score")

    feature_names = []
    edges = {}
    importances = None
    trees = []
    current = None  # (feature, threshold, left, right, value) lists
    n_features = None

    def flush_tree():
        if current is None:
            return
        f, t, l, r, v = current
        trees.append(Tree(feature=np.asarray(f, dtype=np.int32),
                          threshold=np.asarray(t, dtype=np.float64),
                          left=np.asarray(l, dtype=np.int32),
                          right=np.asarray(r, dtype=np.int32),
                          value=np.asarray(v, dtype=np.float64)))

    for lineno, line in enumerate(lines[2:], start=2):
        parts = line.split()
        if not parts:
            continue
        tag = parts[0]
        try:
            if tag == "nfeatures":
                n_features = int(parts[1])
            elif tag == "feature":
                feature_names.append(parts[2] if len(parts) > 2 else "")
            elif tag == "edges":
                edges[int(parts[1])] = np.asarray([float(x) for x in parts[2:]])
            elif tag == "importance":
                importances = np.asarray([float(x) for x in parts[1:]])
            elif tag == "tree":
                flush_tree()
                current = ([], [], [], [], [])
            elif tag == "node":
                if current is None:
                    fail(lineno, "node outside a tree block")
                nid = int(parts[1])
                if nid != len(current[0]):
                    fail(lineno, f"out-of-order node id {nid}")
                kind = parts[2]
                if kind == "split":
                    current[0].append(int(parts[3]))
                    current[1].append(float(parts[4]))
                    current[2].append(int(parts[5]))
                    current[3].append(int(parts[6]))
                    current[4].append(0.0)
                elif kind == "leaf":
                    current[0].append(-1)
                    current[1].append(0.0)
                    current[2].append(-1)
                    current[3].append(-1)
                    current[4].append(float(parts[3]))
                else:
                    fail(lineno, f"unknown node kind {kind!r}")
            else:
                fail(lineno, f"unknown record {tag!r}")
        except (ValueError, IndexError):
            fail(lineno, f"malformed record: {line!r}")
    flush_tree()

    if n_features is None or len(feature_names) != n_features:
        raise FormatError("feature table missing or inconsistent")
    edge_list = [edges.get(i, np.empty(0)) for i in range(n_features)]
    if importances is None:
        importances = np.zeros(n_features)
    return GbdtModel(base_score=base_score, trees=trees,
                     bin_mapper=BinMapper(edges=edge_list),
                     feature_names=feature_names, importances=importances)
