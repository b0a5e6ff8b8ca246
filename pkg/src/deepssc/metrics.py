"""Clustering evaluation: ACC via optimal matching, NMI, ARI, pairwise F.

All four metrics are invariant to relabeling of either partition. ACC
solves a minimum-cost assignment on the negated contingency table with
a Hungarian solver that breaks ties toward the lexicographically
smallest assignment.
"""

import math
from fractions import Fraction

import numpy as np

from deepssc.errors import InvalidInputError


def contingency_table(pred, truth):
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if pred.ndim != 1 or pred.shape != truth.shape:
        raise InvalidInputError("label vectors must be 1-D and equal length")
    if pred.size == 0:
        raise InvalidInputError("label vectors must be non-empty")
    pu, pi = np.unique(pred, return_inverse=True)
    tu, ti = np.unique(truth, return_inverse=True)
    table = np.zeros((pu.size, tu.size), dtype=np.int64)
    np.add.at(table, (pi, ti), 1)
    return table


def _assignment_cost(cost):
    """Min-cost perfect assignment on a square matrix (O(n^3) potentials)."""
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = np.inf
            j1 = 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    assignment = np.empty(n, dtype=np.int64)
    for j in range(1, n + 1):
        assignment[p[j] - 1] = j - 1
    total = float(sum(cost[i, assignment[i]] for i in range(n)))
    return assignment, total


def hungarian(cost):
    """Minimum-cost matching of size min(r, c) on a rectangular matrix.

    Returns ``(pairs, total)`` with pairs sorted by row; among optimal
    matchings the lexicographically smallest column sequence is chosen.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.size == 0:
        raise InvalidInputError("cost must be a non-empty 2-D matrix")
    if not np.all(np.isfinite(cost)):
        raise InvalidInputError("cost entries must be finite")
    r, c = cost.shape
    size = max(r, c)
    padded = np.zeros((size, size))
    padded[:r, :c] = cost
    _, best_total = _assignment_cost(padded)
    # fix rows in order to the smallest column that keeps optimality
    fixed_cols = []
    fixed_cost = 0.0
    free_rows = list(range(size))
    for i in range(size):
        remaining_rows = [x for x in free_rows if x != i]
        for j in range(size):
            if j in fixed_cols:
                continue
            rest_cols = [x for x in range(size) if x not in fixed_cols and x != j]
            if remaining_rows:
                sub = padded[np.ix_(remaining_rows, rest_cols)]
                _, sub_total = _assignment_cost(sub)
            else:
                sub_total = 0.0
            if fixed_cost + padded[i, j] + sub_total <= best_total + 1e-9:
                fixed_cols.append(j)
                fixed_cost += padded[i, j]
                break
        free_rows.remove(i)
    pairs = [(i, j) for i, j in enumerate(fixed_cols) if i < r and j < c]
    total = float(sum(cost[i, j] for i, j in pairs))
    return pairs, total


def accuracy(pred, truth):
    """Fraction correct under the best cluster-to-class matching."""
    table = contingency_table(pred, truth)
    pairs, _ = hungarian(-table.astype(np.float64))
    matched = sum(table[i, j] for i, j in pairs)
    return matched / table.sum()


def _entropy(counts, n):
    probs = counts[counts > 0] / n
    return float(-(probs * np.log(probs)).sum())


def nmi(pred, truth):
    """Mutual information over the geometric mean of the entropies."""
    table = contingency_table(pred, truth)
    n = table.sum()
    row = table.sum(axis=1)
    col = table.sum(axis=0)
    hu = _entropy(row, n)
    hv = _entropy(col, n)
    if hu == 0.0 and hv == 0.0:
        return 1.0
    if hu == 0.0 or hv == 0.0:
        return 0.0
    mi = 0.0
    for i in range(table.shape[0]):
        for j in range(table.shape[1]):
            nij = table[i, j]
            if nij > 0:
                mi += (nij / n) * math.log(n * nij / (row[i] * col[j]))
    return mi / math.sqrt(hu * hv)


def _comb2(x):
    return x * (x - 1) // 2


def ari(pred, truth):
    """Pair-counting agreement corrected for chance."""
    table = contingency_table(pred, truth)
    n = int(table.sum())
    if n < 2:
        raise InvalidInputError("ari needs at least two samples")
    sum_ij = int(sum(_comb2(int(v)) for v in table.ravel()))
    sum_a = int(sum(_comb2(int(v)) for v in table.sum(axis=1)))
    sum_b = int(sum(_comb2(int(v)) for v in table.sum(axis=0)))
    # exact rational arithmetic: every term is a pair count
    expected = Fraction(sum_a * sum_b, _comb2(n))
    max_index = Fraction(sum_a + sum_b, 2)
    if max_index == expected:
        # both partitions trivial in the same way; identical up to
        # relabeling iff every row and column holds a single nonzero
        identical = np.all((table > 0).sum(axis=0) == 1) and np.all(
            (table > 0).sum(axis=1) == 1
        )
        return 1.0 if identical else 0.0
    return float((Fraction(sum_ij) - expected) / (max_index - expected))


def pairwise_fscore(pred, truth):
    """Harmonic mean of pair-level precision and recall."""
    table = contingency_table(pred, truth)
    n = int(table.sum())
    if n < 2:
        raise InvalidInputError("pairwise_fscore needs at least two samples")
    both = sum(_comb2(int(v)) for v in table.ravel())
    same_pred = sum(_comb2(int(v)) for v in table.sum(axis=1))
    same_truth = sum(_comb2(int(v)) for v in table.sum(axis=0))
    precision = both / same_pred if same_pred > 0 else 1.0
    recall = both / same_truth if same_truth > 0 else 1.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)
