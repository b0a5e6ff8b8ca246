"""Pure-NumPy implementations of the hot kernels.

Semantics match the Cython versions in ``_compiled.pyx``; only speed
differs. Each function is deterministic given its inputs.
"""

import numpy as np


def _offdiag_norm(a):
    n = a.shape[0]
    mask = ~np.eye(n, dtype=bool)
    return float(np.sqrt(np.sum(a[mask] ** 2)))


def jacobi_eig(a, tol, max_sweeps):
    """Cyclic Jacobi rotations on a symmetric matrix.

    Returns ``(eigenvalues, eigenvectors, off_norm, converged)`` with
    eigenvalues unsorted (diagonal order) and eigenvectors as columns.
    ``tol`` is relative to the Frobenius norm of the input.
    """
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    if n < 2:
        return np.diag(a).copy(), v, 0.0, True
    target = tol * max(1.0, float(np.linalg.norm(a)))
    off = _offdiag_norm(a)
    sweeps = 0
    while off > target and sweeps < max_sweeps:
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        off = _offdiag_norm(a)
        sweeps += 1
    return np.diag(a).copy(), v, off, off <= target


def lasso_cd(gram, b, gamma, c0, max_iters, tol):
    """Cyclic coordinate descent for min 1/2 c'Gc - b'c + const + gamma|c|_1.

    ``gram`` is D'D and ``b`` is D'y of the underlying least-squares
    problem. Returns ``(c, iterations, last_max_change, converged)``.
    """
    c = np.array(c0, dtype=np.float64)
    p = c.shape[0]
    it = 0
    max_change = 0.0
    for it in range(1, max_iters + 1):
        max_change = 0.0
        for j in range(p):
            gjj = gram[j, j]
            if gjj <= 1e-15:
                if c[j] != 0.0:
                    max_change = max(max_change, abs(c[j]))
                    c[j] = 0.0
                continue
            rj = b[j] - float(gram[j] @ c) + gjj * c[j]
            if rj > gamma:
                new = (rj - gamma) / gjj
            elif rj < -gamma:
                new = (rj + gamma) / gjj
            else:
                new = 0.0
            change = abs(new - c[j])
            if change > max_change:
                max_change = change
            c[j] = new
        if max_change <= tol:
            return c, it, max_change, True
    return c, it, max_change, False


def lloyd(points, centroids, max_iters):
    """Lloyd iterations from the given initial centroids.

    Empty clusters are re-seeded at the unclaimed point farthest from
    its assigned centroid (lowest index on ties). Returns
    ``(labels, centroids, sse, iterations, sse_history)`` where the
    history records the assignment-step SSE of every iteration.
    """
    points = np.asarray(points, dtype=np.float64)
    centroids = np.array(centroids, dtype=np.float64)
    n = points.shape[0]
    k = centroids.shape[0]
    labels = np.full(n, -1, dtype=np.int64)
    sse_history = []
    it = 0
    for it in range(1, max_iters + 1):
        d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(d2, axis=1)
        own = d2[np.arange(n), new_labels]
        sse_history.append(float(own.sum()))
        counts = np.bincount(new_labels, minlength=k)
        new_centroids = np.zeros_like(centroids)
        np.add.at(new_centroids, new_labels, points)
        nonempty = counts > 0
        new_centroids[nonempty] /= counts[nonempty, None]
        empties = np.flatnonzero(counts == 0)
        if empties.size:
            taken = set()
            for e in empties:
                best = -1
                best_d = -1.0
                for i in range(n):
                    if i in taken:
                        continue
                    if own[i] > best_d:
                        best_d = own[i]
                        best = i
                taken.add(best)
                new_centroids[e] = points[best]
        if np.array_equal(new_labels, labels):
            centroids = new_centroids
            break
        labels = new_labels
        centroids = new_centroids
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    sse = float(d2[np.arange(n), labels].sum())
    return labels.astype(np.int64), centroids, sse, it, sse_history
