import numpy as np
import pytest

from fraudkit.embed import (
    Affinities,
    TsneParams,
    calibrate_sigma,
    joint_affinities,
    kl_divergence,
    low_dim_affinities,
    pairwise_sq_distances,
    run_tsne,
    tsne_gradient,
)


class TestPairwiseSqDistances:
    def test_three_four_five(self):
        d = pairwise_sq_distances(np.array([[0.0, 0.0], [3.0, 4.0]]))
        assert d[0, 1] == pytest.approx(25.0)
        assert d[1, 0] == pytest.approx(25.0)
        assert d[0, 0] == 0.0

    def test_identical_points_all_zero(self):
        d = pairwise_sq_distances(np.ones((4, 3)))
        np.testing.assert_allclose(d, 0.0, atol=1e-12)

    def test_matches_naive_double_loop(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(10, 4))
        d = pairwise_sq_distances(X)
        for i in range(10):
            for j in range(10):
                expect = float(np.sum((X[i] - X[j]) ** 2))
                assert d[i, j] == pytest.approx(expect, abs=1e-10)


class TestCalibrateSigma:
    def test_equilateral_forces_uniform_row(self):
        X = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
        sq = pairwise_sq_distances(X)
        _, row = calibrate_sigma(sq[0], 0, perplexity=2.0)
        np.testing.assert_allclose(row[1:], 0.5, atol=1e-9)

    def test_far_outlier_gets_negligible_mass(self):
        X = np.array([[0.0], [0.1], [0.2], [0.3], [100.0]])
        sq = pairwise_sq_distances(X)
        sigma, row = calibrate_sigma(sq[0], 0, perplexity=2.0)
        assert row[4] < 1e-3
        # the returned row is exactly the Gaussian formula at sigma
        expect = np.exp(-sq[0] / (2 * sigma ** 2))
        expect[0] = 0.0
        expect /= expect.sum()
        np.testing.assert_allclose(row, expect, atol=1e-9)

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            X = rng.normal(size=(8, 3))
            sq = pairwise_sq_distances(X)
            i = int(rng.integers(8))
            _, row = calibrate_sigma(sq[i], i, perplexity=4.0)
            assert row.sum() == pytest.approx(1.0, abs=1e-12)
            assert row[i] == 0.0

    def test_achieved_perplexity_near_target(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(30, 5))
        sq = pairwise_sq_distances(X)
        for i in range(30):
            _, row = calibrate_sigma(sq[i], i, perplexity=10.0)
            nz = row[row > 0]
            perp = 2.0 ** (-np.sum(nz * np.log2(nz)))
            assert perp == pytest.approx(10.0, abs=1e-3)


class TestJointAffinities:
    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError):
            joint_affinities(np.zeros((2, 2)), perplexity=1.5)

    def test_total_mass_one(self):
        rng = np.random.default_rng(9)
        aff = joint_affinities(rng.normal(size=(15, 3)), perplexity=5.0)
        assert aff.P.sum() == pytest.approx(1.0, abs=1e-10)

    def test_exactly_symmetric_zero_diagonal(self):
        rng = np.random.default_rng(10)
        aff = joint_affinities(rng.normal(size=(20, 4)), perplexity=6.0)
        np.testing.assert_array_equal(aff.P, aff.P.T)
        assert np.all(np.diag(aff.P) == 0.0)
        assert np.all(aff.P >= 0.0)


class TestLowDimAffinities:
    def test_two_points_split_evenly(self):
        Q = low_dim_affinities(np.array([[0.0, 0.0], [7.0, -2.0]]))
        assert Q[0, 1] == pytest.approx(0.5)
        assert Q[1, 0] == pytest.approx(0.5)

    def test_three_equidistant(self):
        Y = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
        Q = low_dim_affinities(Y)
        off = Q[~np.eye(3, dtype=bool)]
        np.testing.assert_allclose(off, 1.0 / 6.0, atol=1e-12)

    def test_normalized(self):
        rng = np.random.default_rng(11)
        Q = low_dim_affinities(rng.normal(size=(12, 2)))
        assert Q.sum() == pytest.approx(1.0, abs=1e-10)


def random_affinity(rng, n):
    P = rng.random((n, n))
    P = (P + P.T) / 2
    np.fill_diagonal(P, 0.0)
    return P / P.sum()


class TestKlDivergence:
    def test_identity_is_zero(self):
        rng = np.random.default_rng(12)
        P = random_affinity(rng, 6)
        assert kl_divergence(P, P) == pytest.approx(0.0, abs=1e-12)

    def test_nonnegative(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            P = random_affinity(rng, 5)
            Q = random_affinity(rng, 5)
            assert kl_divergence(P, Q) >= -1e-12

    def test_hand_computed_two_by_two(self):
        P = np.array([[0.0, 0.5], [0.5, 0.0]])
        Q = np.array([[0.0, 0.25], [0.75, 0.0]])
        expect = 0.5 * np.log(2.0) + 0.5 * np.log(2.0 / 3.0)
        assert kl_divergence(P, Q) == pytest.approx(expect, abs=1e-12)


class TestTsneGradient:
    def test_stationary_at_p_equals_q(self):
        rng = np.random.default_rng(14)
        Y = rng.normal(size=(6, 2))
        Q = low_dim_affinities(Y)
        grad = tsne_gradient(Q, Q, Y)
        np.testing.assert_allclose(grad, 0.0, atol=1e-12)

    def test_matches_central_finite_differences(self):
        rng = np.random.default_rng(15)
        Y = rng.normal(size=(8, 2))
        P = random_affinity(rng, 8)
        grad = tsne_gradient(P, low_dim_affinities(Y), Y)
        eps = 1e-5
        fd = np.zeros_like(Y)
        for i in range(8):
            for d in range(2):
                plus = Y.copy()
                plus[i, d] += eps
                minus = Y.copy()
                minus[i, d] -= eps
                fd[i, d] = (kl_divergence(P, low_dim_affinities(plus))
                            - kl_divergence(P, low_dim_affinities(minus))) / (2 * eps)
        scale = np.maximum(np.abs(fd), 1e-8)
        assert np.max(np.abs(grad - fd) / scale) < 1e-4

    def test_translation_invariance(self):
        rng = np.random.default_rng(16)
        Y = rng.normal(size=(7, 2))
        P = random_affinity(rng, 7)
        g1 = tsne_gradient(P, low_dim_affinities(Y), Y)
        Y2 = Y + np.array([3.0, -1.5])
        g2 = tsne_gradient(P, low_dim_affinities(Y2), Y2)
        np.testing.assert_allclose(g1, g2, atol=1e-10)


def three_clusters(n_per=50, dim=10, seed=0):
    rng = np.random.default_rng(seed)
    centers = np.array([[8.0] + [0.0] * (dim - 1),
                        [0.0] * (dim - 1) + [8.0],
                        [-8.0] + [0.0] * (dim - 1)])
    X = np.vstack([rng.normal(size=(n_per, dim)) + c for c in centers])
    ids = np.repeat(np.arange(3), n_per)
    return X, ids


def silhouette(Y, ids):
    """Independent mean silhouette over all points."""
    n = len(ids)
    d = np.sqrt(np.maximum(
        np.sum(Y ** 2, 1)[:, None] + np.sum(Y ** 2, 1)[None, :]
        - 2 * Y @ Y.T, 0))
    scores = []
    for i in range(n):
        same = (ids == ids[i])
        same[i] = False
        a = d[i, same].mean()
        b = min(d[i, ids == c].mean() for c in np.unique(ids) if c != ids[i])
        scores.append((b - a) / max(a, b))
    return float(np.mean(scores))


class TestRunTsne:
    def test_kl_decreases_on_clustered_data(self):
        X, _ = three_clusters(n_per=20, dim=5, seed=3)
        emb = run_tsne(X, TsneParams(perplexity=10, iterations=400,
                                     learning_rate=50, seed=1))
        assert emb.kl_history[-1] < emb.kl_history[0]
        assert np.all(np.isfinite(emb.Y))
        assert all(k >= 0 for k in emb.kl_history)

    def test_deterministic_per_seed(self):
        X, _ = three_clusters(n_per=10, dim=4, seed=4)
        p = TsneParams(perplexity=8, iterations=50, seed=7)
        a = run_tsne(X, p)
        b = run_tsne(X, p)
        np.testing.assert_array_equal(a.Y, b.Y)

    def test_separated_clusters_silhouette(self):
        X, ids = three_clusters(n_per=50, dim=10, seed=5)
        emb = run_tsne(X, TsneParams(perplexity=30, iterations=500, seed=2))
        assert silhouette(emb.Y, ids) > 0.5
