"""Affinity graph, normalized Laplacian, spectral embedding, k-means.

The affinity is A = |C| + |C'| from the self-expression matrix. The
embedding uses the symmetric normalized Laplacian with row-normalized
bottom-k eigenvectors, then k-means++ with multiple restarts; the
winner is picked deterministically by (SSE, restart index).
"""

from dataclasses import dataclass

import numpy as np

from deepssc import _kernels
from deepssc.errors import InvalidInputError
from deepssc.linalg import as_matrix, symmetric_eig

KMEANS_MAX_ITERS = 300
DEFAULT_RESTARTS = 20


@dataclass
class ClusterAssignment:
    labels: np.ndarray
    k: int


def build_affinity(c):
    """A_ij = |C_ij| + |C_ji|; symmetric, nonnegative, zero diagonal."""
    c = as_matrix(c, "c")
    if c.shape[0] != c.shape[1]:
        raise InvalidInputError("coefficient matrix must be square")
    a = np.abs(c)
    a = a + a.T
    np.fill_diagonal(a, 0.0)
    return a


def _check_affinity(a):
    a = as_matrix(a, "a")
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError("affinity must be square")
    if np.max(np.abs(a - a.T)) != 0.0:
        raise InvalidInputError("affinity must be exactly symmetric")
    if np.any(a < 0):
        raise InvalidInputError("affinity must be nonnegative")
    return a


def normalized_laplacian(a):
    """L = I - D^{-1/2} A D^{-1/2}; isolated vertices get a zero scaling."""
    a = _check_affinity(a)
    deg = a.sum(axis=1)
    inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(np.where(deg > 0, deg, 1.0)), 0.0)
    lap = -a * inv_sqrt[:, None] * inv_sqrt[None, :]
    np.fill_diagonal(lap, 1.0)
    # exact symmetry for the eigensolver regardless of rounding
    return 0.5 * (lap + lap.T)


def spectral_embed(a, k):
    """Rows: l2-normalized entries of the k bottom Laplacian eigenvectors."""
    a = _check_affinity(a)
    n = a.shape[0]
    if not 2 <= k <= n:
        raise InvalidInputError(f"k={k} out of range for n={n}")
    lap = normalized_laplacian(a)
    eig = symmetric_eig(lap)
    emb = eig.eigenvectors[:, :k].copy()
    norms = np.linalg.norm(emb, axis=1)
    keep = norms > 1e-12
    emb[keep] /= norms[keep, None]
    return emb


def _kmeans_pp_init(points, k, rng):
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = points[first]
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            pick = int(rng.integers(n))
        else:
            pick = int(rng.choice(n, p=d2 / total))
        centroids[j] = points[pick]
        d2 = np.minimum(d2, ((points - centroids[j]) ** 2).sum(axis=1))
    return centroids


def kmeans(points, k, restarts=DEFAULT_RESTARTS, seed=0):
    """Best of ``restarts`` k-means++ runs by within-cluster SSE."""
    points = as_matrix(points, "points")
    n = points.shape[0]
    if not 1 <= k <= n:
        raise InvalidInputError(f"k={k} out of range for n={n}")
    best = None
    for r, child in enumerate(np.random.SeedSequence(seed).spawn(restarts)):
        rng = np.random.default_rng(child)
        init = _kmeans_pp_init(points, k, rng)
        labels, _, sse, _, _ = _kernels.lloyd(points, init, KMEANS_MAX_ITERS)
        if best is None or sse < best[0]:
            best = (sse, r, labels)
    return ClusterAssignment(labels=np.asarray(best[2], dtype=np.int64), k=k)


def spectral_cluster(a, k, restarts=DEFAULT_RESTARTS, seed=0):
    """Spectral embedding followed by k-means."""
    emb = spectral_embed(a, k)
    return kmeans(emb, k, restarts=restarts, seed=seed)
