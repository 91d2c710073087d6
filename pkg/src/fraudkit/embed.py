"""t-SNE embedding into 2-D.

High-dimensional affinities use Gaussian kernels with per-point bandwidths
calibrated by binary search to a fixed perplexity (2 to the Shannon entropy,
in bits, of the conditional neighbor distribution). Low-dimensional
similarities use the Student t kernel with one degree of freedom. Gradient
descent on the KL divergence runs with the conventional momentum schedule
(0.5 before iteration 250, 0.8 after) and early exaggeration.

Exact O(N^2) implementation; intended for desk-scale N.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NoConvergenceWarning


@dataclass
class TsneParams:
    perplexity: float = 30.0
    iterations: int = 1000
    learning_rate: float = 200.0
    momentum_early: float = 0.5
    momentum_late: float = 0.8
    momentum_switch_iter: int = 250
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250
    seed: int = 0


@dataclass
class Affinities:
    P: np.ndarray        # (N, N) symmetric joint probabilities, zero diagonal
    sigma: np.ndarray    # (N,) calibrated bandwidths


@dataclass
class Embedding:
    Y: np.ndarray              # (N, 2)
    kl_history: list = field(default_factory=list)


def pairwise_sq_distances(X: np.ndarray) -> np.ndarray:
    """Symmetric matrix of squared Euclidean distances, zero diagonal."""
    X = np.asarray(X, dtype=np.float64)
    sq = np.sum(X ** 2, axis=1)
    d = sq[:, None] + sq[None, :] - 2.0 * X @ X.T
    np.maximum(d, 0.0, out=d)
    d = (d + d.T) / 2.0
    np.fill_diagonal(d, 0.0)
    return d


def _conditional_row(sq_row: np.ndarray, i: int, sigma: float) -> np.ndarray:
    """p_{j|i} for one point at a given bandwidth; entry i is zero."""
    z = -sq_row / (2.0 * sigma * sigma)
    z[i] = -np.inf
    z -= z.max()  # stabilize; row is normalized below
    p = np.exp(z)
    p[i] = 0.0
    return p / p.sum()


def _row_perplexity(p: np.ndarray) -> float:
    nz = p[p > 0]
    entropy_bits = -np.sum(nz * np.log2(nz))
    return float(2.0 ** entropy_bits)


def calibrate_sigma(sq_dists_row, i: int, perplexity: float,
                    tol: float = 1e-5, max_iter: int = 50):
    """Binary search for the bandwidth whose conditional row hits the target
    perplexity. Returns (sigma, row). Non-convergence is a warning, not an
    error; the best bracket midpoint is returned."""
    sq_row = np.asarray(sq_dists_row, dtype=np.float64)
    sigma = 1.0
    p = _conditional_row(sq_row, i, sigma)
    perp = _row_perplexity(p)

    # bracket the target first: perplexity grows with sigma
    lo, hi = sigma, sigma
    if perp < perplexity:
        while perp < perplexity:
            lo = hi
            hi *= 2.0
            p = _conditional_row(sq_row, i, hi)
            perp = _row_perplexity(p)
            if hi > 1e12:
                break
        sigma = hi
    else:
        while perp > perplexity:
            hi = lo
            lo /= 2.0
            p = _conditional_row(sq_row, i, lo)
            perp = _row_perplexity(p)
            if lo < 1e-12:
                break
        sigma = lo

    for _ in range(max_iter):
        sigma = (lo + hi) / 2.0
        p = _conditional_row(sq_row, i, sigma)
        perp = _row_perplexity(p)
        if abs(perp - perplexity) <= tol:
            break
        if perp < perplexity:
            lo = sigma
        else:
            hi = sigma
    else:
        warnings.warn(
            f"sigma search for point {i} reached perplexity {perp:.6g} "
            f"(target {perplexity:g})", NoConvergenceWarning)
    return float(sigma), p


def joint_affinities(X: np.ndarray, perplexity: float) -> Affinities:
    """Symmetrized joint probabilities P_ij = (p_{j|i} + p_{i|j}) / (2N)."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n < 3:
        raise ValueError("need at least 3 points")
    if perplexity >= n:
        raise ValueError(f"perplexity {perplexity} must be < N={n}")
    sq = pairwise_sq_distances(X)
    cond = np.zeros((n, n))
    sigma = np.zeros(n)
    for i in range(n):
        sigma[i], cond[i] = calibrate_sigma(sq[i], i, perplexity)
    P = (cond + cond.T) / (2.0 * n)
    return Affinities(P=P, sigma=sigma)


def low_dim_affinities(Y: np.ndarray) -> np.ndarray:
    """Student-t (Cauchy) similarities q_ij, normalized over all i != j."""
    w = _t_kernel(Y)
    return w / w.sum()


def _t_kernel(Y):
    d = pairwise_sq_distances(Y)
    w = 1.0 / (1.0 + d)
    np.fill_diagonal(w, 0.0)
    return w


def kl_divergence(P: np.ndarray, Q: np.ndarray) -> float:
    """KL(P || Q) with 0 log 0 := 0 and q floored at 1e-12."""
    mask = P > 0
    q = np.maximum(Q[mask], 1e-12)
    return float(np.sum(P[mask] * np.log(P[mask] / q)))


def tsne_gradient(P: np.ndarray, Q: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Analytic gradient of KL(P || Q(Y)) with respect to Y:
    dC/dy_i = 4 sum_j (p_ij - q_ij) (y_i - y_j) / (1 + ||y_i - y_j||^2)."""
    w = _t_kernel(Y)
    pq = (P - Q) * w
    # sum_j pq_ij (y_i - y_j)  =  (rowsum pq) y_i - pq @ Y
    return 4.0 * (pq.sum(axis=1)[:, None] * Y - pq @ Y)


def run_tsne(X: np.ndarray, params: TsneParams) -> Embedding:
    """Full t-SNE loop; deterministic per seed.

    Y starts from a seeded Gaussian (std 1e-4). P is multiplied by the early
    exaggeration factor for the first exaggeration_iters iterations; the KL
    history is always computed on the un-exaggerated P, after each update.
    """
    aff = joint_affinities(X, params.perplexity)
    P = aff.P
    n = P.shape[0]
    rng = np.random.default_rng(params.seed)
    Y = rng.normal(scale=1e-4, size=(n, 2))
    velocity = np.zeros_like(Y)
    kl_history = []
    for it in range(params.iterations):
        P_eff = P * params.early_exaggeration if it < params.exaggeration_iters else P
        w = _t_kernel(Y)
        Q = w / w.sum()
        pq = (P_eff - Q) * w
        grad = 4.0 * (pq.sum(axis=1)[:, None] * Y - pq @ Y)
        momentum = (params.momentum_early if it < params.momentum_switch_iter
                    else params.momentum_late)
        velocity = momentum * velocity - params.learning_rate * grad
        Y = Y + velocity
        Y = Y - Y.mean(axis=0)
        kl_history.append(kl_divergence(P, low_dim_affinities(Y)))
    return Embedding(Y=Y, kl_history=kl_history)


def write_embedding_csv(embedding: Embedding, labels, path) -> None:
    """CSV rows `y1,y2,label` for external plotting."""
    labels = np.asarray(labels)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("y1,y2,label\n")
        for (a, b), lab in zip(embedding.Y, labels):
            fh.write(f"{format(a, '.17g')},{format(b, '.17g')},{int(lab)}\n")
