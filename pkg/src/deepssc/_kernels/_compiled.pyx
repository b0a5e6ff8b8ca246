# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython implementations of the hot kernels.

Mirrors the semantics of ``_fallback.py``; see that module for the
contract of each function.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()


def jacobi_eig(a_in, double tol, int max_sweeps):
    a_arr = np.array(a_in, dtype=np.float64, order="C")
    cdef double[:, ::1] a = a_arr
    cdef Py_ssize_t n = a_arr.shape[0]
    v_arr = np.eye(n, dtype=np.float64)
    cdef double[:, ::1] v = v_arr
    cdef Py_ssize_t p, q, i, sweeps
    cdef double apq, tau, t, c, s, tmp_p, tmp_q, fro, off, target

    if n < 2:
        return np.diag(a_arr).copy(), v_arr, 0.0, True

    fro = 0.0
    off = 0.0
    for p in range(n):
        for q in range(n):
            fro += a[p, q] * a[p, q]
            if p != q:
                off += a[p, q] * a[p, q]
    fro = sqrt(fro)
    off = sqrt(off)
    target = tol * (fro if fro > 1.0 else 1.0)

    sweeps = 0
    while off > target and sweeps < max_sweeps:
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                for i in range(n):
                    tmp_p = a[p, i]
                    tmp_q = a[q, i]
                    a[p, i] = c * tmp_p - s * tmp_q
                    a[q, i] = s * tmp_p + c * tmp_q
                for i in range(n):
                    tmp_p = a[i, p]
                    tmp_q = a[i, q]
                    a[i, p] = c * tmp_p - s * tmp_q
                    a[i, q] = s * tmp_p + c * tmp_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                for i in range(n):
                    tmp_p = v[i, p]
                    tmp_q = v[i, q]
                    v[i, p] = c * tmp_p - s * tmp_q
                    v[i, q] = s * tmp_p + c * tmp_q
        off = 0.0
        for p in range(n):
            for q in range(n):
                if p != q:
                    off += a[p, q] * a[p, q]
        off = sqrt(off)
        sweeps += 1
    return np.diag(a_arr).copy(), v_arr, off, off <= target


def lasso_cd(gram_in, b_in, double gamma, c0, long max_iters, double tol):
    gram_arr = np.ascontiguousarray(gram_in, dtype=np.float64)
    b_arr = np.ascontiguousarray(b_in, dtype=np.float64)
    c_arr = np.array(c0, dtype=np.float64)
    cdef double[:, ::1] gram = gram_arr
    cdef double[::1] b = b_arr
    cdef double[::1] c = c_arr
    cdef Py_ssize_t p = c_arr.shape[0]
    cdef Py_ssize_t j, i
    cdef long it = 0
    cdef double gjj, rj, new, change, max_change = 0.0

    for it in range(1, max_iters + 1):
        max_change = 0.0
        for j in range(p):
            gjj = gram[j, j]
            if gjj <= 1e-15:
                if c[j] != 0.0:
                    if fabs(c[j]) > max_change:
                        max_change = fabs(c[j])
                    c[j] = 0.0
                continue
            rj = 0.0
            for i in range(p):
                rj += gram[j, i] * c[i]
            rj = b[j] - rj + gjj * c[j]
            if rj > gamma:
                new = (rj - gamma) / gjj
            elif rj < -gamma:
                new = (rj + gamma) / gjj
            else:
                new = 0.0
            change = fabs(new - c[j])
            if change > max_change:
                max_change = change
            c[j] = new
        if max_change <= tol:
            return c_arr, it, max_change, True
    return c_arr, it, max_change, False


def lloyd(points_in, centroids_in, long max_iters):
    points_arr = np.ascontiguousarray(points_in, dtype=np.float64)
    cent_arr = np.array(centroids_in, dtype=np.float64, order="C")
    cdef double[:, ::1] pts = points_arr
    cdef double[:, ::1] cent = cent_arr
    cdef Py_ssize_t n = points_arr.shape[0]
    cdef Py_ssize_t d = points_arr.shape[1]
    cdef Py_ssize_t k = cent_arr.shape[0]
    labels_arr = np.full(n, -1, dtype=np.int64)
    new_labels_arr = np.empty(n, dtype=np.int64)
    cdef long[::1] labels = labels_arr
    cdef long[::1] new_labels = new_labels_arr
    own_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] own = own_arr
    counts_arr = np.empty(k, dtype=np.int64)
    cdef long[::1] counts = counts_arr
    new_cent_arr = np.empty((k, d), dtype=np.float64)
    cdef double[:, ::1] new_cent = new_cent_arr
    taken_arr = np.zeros(n, dtype=np.int64)
    cdef long[::1] taken = taken_arr
    cdef Py_ssize_t i, j, cl, e, best
    cdef long it = 0
    cdef double dist, diff, best_dist, sse
    cdef bint changed
    sse_history = []

    for it in range(1, max_iters + 1):
        sse = 0.0
        for i in range(n):
            best = 0
            best_dist = 0.0
            for cl in range(k):
                dist = 0.0
                for j in range(d):
                    diff = pts[i, j] - cent[cl, j]
                    dist += diff * diff
                if cl == 0 or dist < best_dist:
                    best_dist = dist
                    best = cl
            new_labels[i] = best
            own[i] = best_dist
            sse += best_dist
        sse_history.append(sse)
        for cl in range(k):
            counts[cl] = 0
            for j in range(d):
                new_cent[cl, j] = 0.0
        for i in range(n):
            cl = new_labels[i]
            counts[cl] += 1
            for j in range(d):
                new_cent[cl, j] += pts[i, j]
        for cl in range(k):
            if counts[cl] > 0:
                for j in range(d):
                    new_cent[cl, j] /= counts[cl]
        for i in range(n):
            taken[i] = 0
        for e in range(k):
            if counts[e] == 0:
                best = -1
                best_dist = -1.0
                for i in range(n):
                    if taken[i]:
                        continue
                    if own[i] > best_dist:
                        best_dist = own[i]
                        best = i
                taken[best] = 1
                for j in range(d):
                    new_cent[e, j] = pts[best, j]
        changed = False
        for i in range(n):
            if new_labels[i] != labels[i]:
                changed = True
            labels[i] = new_labels[i]
        for cl in range(k):
            for j in range(d):
                cent[cl, j] = new_cent[cl, j]
        if not changed:
            break
    sse = 0.0
    for i in range(n):
        best = 0
        best_dist = 0.0
        for cl in range(k):
            dist = 0.0
            for j in range(d):
                diff = pts[i, j] - cent[cl, j]
                dist += diff * diff
            if cl == 0 or dist < best_dist:
                best_dist = dist
                best = cl
        labels[i] = best
        sse += best_dist
    return labels_arr, cent_arr, sse, it, sse_history
