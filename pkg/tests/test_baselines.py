import numpy as np
import pytest

from fraudkit.baselines import (
    CartParams,
    KnnParams,
    cart_fit,
    cart_score,
    cart_score_batch,
    knn_score,
    knn_score_batch,
    logreg_fit,
    logreg_score,
    logreg_score_batch,
    LogRegModel,
    _logreg_loss,
)
from fraudkit.errors import DimensionMismatch, KTooLarge, SingleClass
from fraudkit.tabular import Dataset


def dataset(rows, labels, names=None):
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows.reshape(-1, 1)
    names = names or [f"f{i}" for i in range(rows.shape[1])]
    return Dataset(names, rows, np.asarray(labels, dtype=np.int64))


class TestKnn:
    def test_self_match_k1(self):
        ds = dataset([[0, 0], [5, 5]], [1, 0])
        assert knn_score(ds, [0, 0], KnnParams(k=1)) == 1.0
        assert knn_score(ds, [5, 5], KnnParams(k=1)) == 0.0

    def test_k_equals_n_gives_global_rate(self):
        rng = np.random.default_rng(0)
        ds = dataset(rng.normal(size=(10, 2)), [1, 1, 1, 0, 0, 0, 0, 0, 0, 0])
        for q in rng.normal(size=(5, 2)):
            assert knn_score(ds, q, KnnParams(k=10)) == pytest.approx(0.3)

    def test_matches_exhaustive_sort_oracle(self):
        rng = np.random.default_rng(30)
        ds = dataset(rng.normal(size=(30, 3)), rng.integers(0, 2, 30))
        for q in rng.normal(size=(10, 3)):
            d = [(float(np.sum((ds.rows[j] - q) ** 2)), j) for j in range(30)]
            d.sort()
            expect = np.mean([ds.labels[j] for _, j in d[:3]])
            assert knn_score(ds, q, KnnParams(k=3)) == pytest.approx(expect)

    def test_batch_agrees_with_scalar(self):
        rng = np.random.default_rng(31)
        ds = dataset(rng.normal(size=(40, 2)), rng.integers(0, 2, 40))
        queries = rng.normal(size=(12, 2))
        batch = knn_score_batch(ds, queries, KnnParams(k=5), chunk=4)
        for q, b in zip(queries, batch):
            assert knn_score(ds, q, KnnParams(k=5)) == pytest.approx(b)

    def test_k1_training_accuracy_without_conflicting_duplicates(self):
        rng = np.random.default_rng(32)
        ds = dataset(rng.normal(size=(25, 2)), rng.integers(0, 2, 25))
        scores = knn_score_batch(ds, ds.rows, KnnParams(k=1))
        assert np.array_equal((scores >= 0.5).astype(int), ds.labels)

    def test_k_too_large(self):
        ds = dataset([[0.0], [1.0]], [0, 1])
        with pytest.raises(KTooLarge):
            knn_score(ds, [0.0], KnnParams(k=3))

    def test_dimension_mismatch(self):
        ds = dataset([[0.0, 1.0], [1.0, 2.0]], [0, 1])
        with pytest.raises(DimensionMismatch):
            knn_score(ds, [0.0], KnnParams(k=1))


class TestLogReg:
    def separable_1d(self):
        x = np.concatenate([np.linspace(-3, -0.5, 20), np.linspace(0.5, 3, 20)])
        y = np.array([0] * 20 + [1] * 20)
        return dataset(x, y)

    def test_separable_sign_and_accuracy(self):
        ds = self.separable_1d()
        model = logreg_fit(ds, learning_rate=1.0, epochs=500, l2=0.0)
        assert model.weights[0] > 0
        scores = logreg_score_batch(model, ds.rows)
        assert np.mean((scores >= 0.5).astype(int) == ds.labels) == 1.0

    def test_heavy_l2_shrinks_weights(self):
        ds = self.separable_1d()
        model = logreg_fit(ds, learning_rate=0.5, epochs=200, l2=1e6)
        assert np.all(np.abs(model.weights) < 1e-2)

    def test_zero_epochs_gives_half_scores(self):
        ds = self.separable_1d()
        model = logreg_fit(ds, epochs=0)
        assert np.all(model.weights == 0) and model.bias == 0
        assert logreg_score(model, [1.7]) == 0.5

    def test_loss_non_increasing_even_with_huge_step(self):
        rng = np.random.default_rng(3)
        ds = dataset(rng.normal(size=(50, 2)), rng.integers(0, 2, 50))
        X, y = ds.rows, ds.labels.astype(float)
        w = np.zeros(2)
        losses = [_logreg_loss(X, y, w, 0.0, 0.0)]
        model = None
        for epochs in (1, 5, 20, 80):
            model = logreg_fit(ds, learning_rate=50.0, epochs=epochs, l2=0.0)
            losses.append(model.final_loss)
        assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))

    def test_single_class_rejected(self):
        ds = dataset([1.0, 2.0], [1, 1])
        with pytest.raises(SingleClass):
            logreg_fit(ds)

    def test_score_symmetry_with_zero_bias(self):
        model = LogRegModel(weights=np.array([0.7, -0.2]), bias=0.0,
                            iterations=0, final_loss=0.0)
        x = np.array([1.3, 0.4])
        assert logreg_score(model, x) + logreg_score(model, -x) == pytest.approx(1.0)

    def test_zero_model_scores_half(self):
        model = LogRegModel(weights=np.zeros(1), bias=0.0, iterations=0,
                            final_loss=0.0)
        assert logreg_score(model, [0.0]) == 0.5


def gini(labels):
    if len(labels) == 0:
        return 0.0
    p = np.mean(labels)
    return 2 * p * (1 - p)


def brute_force_cart_split(X, y):
    """Exhaustive (feature, midpoint) oracle minimizing weighted Gini."""
    n = len(y)
    best = None
    best_score = gini(y)
    for f in range(X.shape[1]):
        vals = np.unique(X[:, f])
        for a, b in zip(vals[:-1], vals[1:]):
            t = (a + b) / 2
            mask = X[:, f] <= t
            score = (np.sum(mask) * gini(y[mask])
                     + np.sum(~mask) * gini(y[~mask])) / n
            if score < best_score - 1e-15:
                best_score = score
                best = (f, t)
    return best


class TestCart:
    def test_pure_data_single_leaf(self):
        ds = dataset([1.0, 2.0, 3.0], [1, 1, 1])
        tree = cart_fit(ds, CartParams(max_depth=3))
        assert tree.n_nodes == 1
        assert tree.value[0] == 1.0

    def test_separable_depth_one(self):
        rows = np.array([0.0, 1.0, 2.0, 10.0, 11.0, 12.0])
        labels = np.array([0, 0, 0, 1, 1, 1])
        ds = dataset(rows, labels)
        tree = cart_fit(ds, CartParams(max_depth=1))
        assert tree.feature[0] == 0
        assert 2.0 < tree.threshold[0] < 10.0
        scores = cart_score_batch(tree, ds.rows)
        assert np.array_equal((scores >= 0.5).astype(int), labels)

    def test_depth_one_matches_brute_force_oracle(self):
        rng = np.random.default_rng(60)
        for seed in range(5):
            rng = np.random.default_rng(seed)
            X = rng.normal(size=(40, 3))
            y = (X[:, 0] + rng.normal(scale=0.5, size=40) > 0).astype(int)
            ds = dataset(X, y)
            tree = cart_fit(ds, CartParams(max_depth=1, min_samples_leaf=1))
            expect = brute_force_cart_split(X, y)
            assert expect is not None
            assert (int(tree.feature[0]), tree.threshold[0]) == \
                (expect[0], pytest.approx(expect[1]))

    def test_children_gini_never_worse(self):
        rng = np.random.default_rng(61)
        X = rng.normal(size=(120, 2))
        y = (X[:, 0] * X[:, 1] > 0).astype(int)
        ds = dataset(X, y)
        tree = cart_fit(ds, CartParams(max_depth=5, min_samples_leaf=2))

        def walk(node, rows):
            if tree.feature[node] < 0:
                return
            mask = X[rows, tree.feature[node]] <= tree.threshold[node]
            parent = gini(y[rows])
            n = rows.size
            child = (np.sum(mask) * gini(y[rows][mask])
                     + np.sum(~mask) * gini(y[rows][~mask])) / n
            assert child <= parent + 1e-12
            walk(tree.left[node], rows[mask])
            walk(tree.right[node], rows[~mask])

        walk(0, np.arange(120))

    def test_leaf_values_are_positive_fractions(self):
        rng = np.random.default_rng(62)
        X = rng.normal(size=(60, 2))
        y = rng.integers(0, 2, 60)
        ds = dataset(X, y)
        tree = cart_fit(ds, CartParams(max_depth=3, min_samples_leaf=5))
        scores = cart_score_batch(tree, X)
        assert np.all((scores >= 0) & (scores <= 1))
        assert cart_score(tree, X[0]) == scores[0]
