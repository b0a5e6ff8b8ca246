"""Per-sample l1-regularized least squares and the self-expression matrix.

The primary solver follows the homotopy (LARS-style) regularization
path from gamma_max down to the requested gamma, maintaining an active
set and its sign vector; every solve is verified against the lasso KKT
conditions. A cyclic coordinate-descent solver provides an independent
cross-check. Both work on the Gram formulation so that the n column
solves of ``self_expression`` share one Gram matrix.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from deepssc import _kernels
from deepssc.errors import InvalidInputError, NumericalError
from deepssc.linalg import as_matrix, as_vector

DEFAULT_DELTA = 1e-4
CD_MAX_ITERS = 5_000_000
CD_TOL = 1e-10


@dataclass
class LassoProblem:
    """min 1/2 ||y - Dc||^2 + gamma ||c||_1, optionally forcing one atom to 0."""

    dictionary: np.ndarray
    target: np.ndarray
    gamma: float
    excluded: Optional[int] = None

    def __post_init__(self):
        self.dictionary = as_matrix(self.dictionary, "dictionary")
        self.target = as_vector(self.target, "target")
        if self.dictionary.shape[0] != self.target.shape[0]:
            raise InvalidInputError(
                f"dictionary is {self.dictionary.shape} but target has "
                f"length {self.target.shape[0]}"
            )
        if self.gamma <= 0:
            raise InvalidInputError("gamma must be positive")
        if self.excluded is not None and not (
            0 <= self.excluded < self.dictionary.shape[1]
        ):
            raise InvalidInputError(
                f"excluded index {self.excluded} out of range"
            )


@dataclass
class SparseCode:
    coefficients: np.ndarray
    support: np.ndarray = field(init=False)
    objective: float = 0.0

    def __post_init__(self):
        self.support = np.flatnonzero(self.coefficients)


def _objective_gram(gram, b, yty, gamma, c):
    return float(0.5 * (yty - 2.0 * b @ c + c @ gram @ c) + gamma * np.sum(np.abs(c)))


def _solve_spd(m, rhs):
    try:
        return np.linalg.solve(m, rhs)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(m, rhs, rcond=None)[0]


def _kkt_residual_gram(gram, b, gamma, c, excluded=None):
    r = b - gram @ c
    worst = 0.0
    for j in range(c.shape[0]):
        if excluded is not None and j == excluded:
            continue
        if c[j] != 0.0:
            viol = abs(r[j] - gamma * np.sign(c[j]))
        else:
            viol = max(0.0, abs(r[j]) - gamma)
        if viol > worst:
            worst = viol
    return worst


def _homotopy_gram(gram, b, gamma, delta):
    """Path-follow the lasso solution from gamma_max down to gamma.

    ``gram``/``b`` describe the reduced problem (excluded atom already
    removed). Returns the coefficient vector.
    """
    p = b.shape[0]
    c = np.zeros(p)
    if p == 0:
        return c
    gamma_max = float(np.max(np.abs(b)))
    if gamma >= gamma_max:
        return c
    # lowest index wins ties at the entry threshold
    first = int(np.argmax(np.abs(b) >= gamma_max * (1.0 - 1e-12)))
    active = [first]
    signs = [1.0 if b[first] >= 0 else -1.0]
    gamma_cur = gamma_max
    max_events = 10 * p
    events = 0
    while True:
        idx = np.array(active, dtype=np.intp)
        sub = gram[np.ix_(idx, idx)]
        u = _solve_spd(sub, b[idx])
        v = _solve_spd(sub, np.array(signs))
        inactive = np.setdiff1d(np.arange(p), idx, assume_unique=False)
        # correlations of inactive atoms are affine in gamma: a_j + gamma d_j
        if inactive.size:
            cross = gram[np.ix_(inactive, idx)]
            a = b[inactive] - cross @ u
            d = cross @ v
        else:
            a = d = np.zeros(0)

        upper = gamma_cur * (1.0 - 1e-12)
        best_gamma = gamma
        event = None  # ("join", j, sign) or ("leave", position)
        for t, (aj, dj) in enumerate(zip(a, d)):
            denom = 1.0 - dj
            if abs(denom) > 1e-14:
                g = aj / denom
                if gamma < g <= upper and g > best_gamma:
                    best_gamma = g
                    event = ("join", int(inactive[t]), 1.0)
            denom = 1.0 + dj
            if abs(denom) > 1e-14:
                g = -aj / denom
                if gamma < g <= upper and g > best_gamma:
                    best_gamma = g
                    event = ("join", int(inactive[t]), -1.0)
        for pos in range(len(active)):
            if v[pos] != 0.0:
                g = u[pos] / v[pos]
                if gamma < g <= upper and g >= best_gamma:
                    # prefer drops on exact ties for path stability
                    best_gamma = g
                    event = ("leave", pos)

        if event is None:
            c[idx] = u - gamma * v
            return c

        events += 1
        if events > max_events:
            c[idx] = u - gamma * v
            resid = _kkt_residual_gram(gram, b, gamma, c)
            raise NumericalError(
                f"homotopy path exceeded {max_events} breakpoints "
                f"(KKT residual {resid:.3e})",
                residual=resid,
                best=c,
            )
        if event[0] == "join":
            _, j, sgn = event
            active.append(j)
            signs.append(sgn)
        else:
            pos = event[1]
            del active[pos]
            del signs[pos]
            if not active:
                # path restarts from the largest remaining correlation
                r = b - gram @ c
                nxt = int(np.argmax(np.abs(r)))
                active = [nxt]
                signs = [1.0 if r[nxt] >= 0 else -1.0]
        gamma_cur = best_gamma


def _active_set_polish(gram, b, gamma, c, max_rounds=1000):
    """Restore KKT optimality after a degenerate path step.

    Feature-sign search: solve the equality system on the current
    support, line-search over sign crossings (objective can only
    decrease, so no cycling), drop zeros, admit the worst inactive
    violator. Needed when near-duplicate atoms make a join direction
    ambiguous.
    """
    p = b.shape[0]
    c = c.copy()

    def objective(vec):
        return 0.5 * float(vec @ gram @ vec) - float(b @ vec) + gamma * float(
            np.sum(np.abs(vec))
        )

    for _ in range(max_rounds):
        idx = np.flatnonzero(c)
        if idx.size:
            theta = np.sign(c[idx])
            sol = _solve_spd(gram[np.ix_(idx, idx)], b[idx] - gamma * theta)
            if np.any(np.sign(sol) != theta):
                # discrete line search over the sign-change points
                cur = c[idx]
                step = sol - cur
                candidates = [1.0]
                for t in range(idx.size):
                    if step[t] != 0.0:
                        frac = -cur[t] / step[t]
                        if 0.0 < frac < 1.0:
                            candidates.append(frac)
                best_vec = None
                best_obj = np.inf
                for frac in candidates:
                    trial = np.zeros(p)
                    trial_a = cur + frac * step
                    trial_a[np.abs(trial_a) < 1e-15] = 0.0
                    trial[idx] = trial_a
                    obj = objective(trial)
                    if obj < best_obj:
                        best_obj = obj
                        best_vec = trial
                c = best_vec
                continue
            c = np.zeros(p)
            c[idx] = sol
        r = b - gram @ c
        mask = c == 0.0
        viol = np.abs(r) - gamma
        viol[~mask] = -np.inf
        worst_j = int(np.argmax(viol))
        if viol[worst_j] <= 1e-11 * max(1.0, gamma):
            return c
        c[worst_j] = 1e-30 * np.sign(r[worst_j])
    return c


def _homotopy_with_exclusion(gram, b, gamma, delta, excluded):
    p = b.shape[0]
    if excluded is None:
        keep = np.arange(p, dtype=np.intp)
    else:
        keep = np.array([j for j in range(p) if j != excluded], dtype=np.intp)
    sub_gram = gram[np.ix_(keep, keep)]
    sub_b = b[keep]
    sub_c = _homotopy_gram(sub_gram, sub_b, gamma, delta)
    if _kkt_residual_gram(sub_gram, sub_b, gamma, sub_c) > 0.5 * delta:
        sub_c = _active_set_polish(sub_gram, sub_b, gamma, sub_c)
    c = np.zeros(p)
    c[keep] = sub_c
    resid = _kkt_residual_gram(gram, b, gamma, c, excluded)
    if resid > delta:
        raise NumericalError(
            f"homotopy result violates KKT conditions (residual {resid:.3e} "
            f"> delta {delta:.3e})",
            residual=resid,
            best=c,
        )
    return c


def solve_lasso_homotopy(problem, delta=DEFAULT_DELTA):
    """Solve the lasso by path following; verified to KKT within delta."""
    if delta <= 0:
        raise InvalidInputError("delta must be positive")
    d_mat = problem.dictionary
    gram = d_mat.T @ d_mat
    b = d_mat.T @ problem.target
    c = _homotopy_with_exclusion(gram, b, problem.gamma, delta, problem.excluded)
    yty = float(problem.target @ problem.target)
    return SparseCode(
        coefficients=c,
        objective=_objective_gram(gram, b, yty, problem.gamma, c),
    )


def solve_lasso_cd(problem, max_iters=CD_MAX_ITERS, tol=CD_TOL):
    """Cyclic coordinate descent; independent cross-check for the homotopy."""
    d_mat = problem.dictionary
    gram = d_mat.T @ d_mat
    b = d_mat.T @ problem.target
    p = b.shape[0]
    if problem.excluded is None:
        c0 = np.zeros(p)
        c, _, change, converged = _kernels.lasso_cd(
            gram, b, problem.gamma, c0, max_iters, tol
        )
    else:
        keep = np.array(
            [j for j in range(p) if j != problem.excluded], dtype=np.intp
        )
        sub, _, change, converged = _kernels.lasso_cd(
            gram[np.ix_(keep, keep)],
            b[keep],
            problem.gamma,
            np.zeros(keep.size),
            max_iters,
            tol,
        )
        c = np.zeros(p)
        c[keep] = sub
    if not converged:
        raise NumericalError(
            f"coordinate descent hit the iteration cap "
            f"(last max coordinate change {change:.3e})",
            residual=change,
            best=c,
        )
    yty = float(problem.target @ problem.target)
    return SparseCode(
        coefficients=c,
        objective=_objective_gram(gram, b, yty, problem.gamma, c),
    )


def kkt_residual(problem, code):
    """Max violation over both KKT branches for a candidate solution."""
    c = np.asarray(code.coefficients if isinstance(code, SparseCode) else code)
    if c.shape[0] != problem.dictionary.shape[1]:
        raise InvalidInputError("coefficient length does not match dictionary")
    gram = problem.dictionary.T @ problem.dictionary
    b = problem.dictionary.T @ problem.target
    return _kkt_residual_gram(gram, b, problem.gamma, c, problem.excluded)


def solve_column(gram, i, gamma, delta=DEFAULT_DELTA):
    """Sparse code of column i against the dictionary behind ``gram``.

    Because the target is itself column i of the dictionary, its
    correlations are just ``gram[:, i]``; atom i is excluded so the
    self-expression diagonal stays exactly zero.
    """
    return _homotopy_with_exclusion(gram, gram[:, i].copy(), gamma, delta, i)


def self_expression(h, gamma, delta=DEFAULT_DELTA):
    """Zero-diagonal coefficient matrix: column i codes sample i."""
    h = as_matrix(h, "h")
    n = h.shape[1]
    if n < 2:
        raise InvalidInputError("self-expression needs at least two samples")
    if gamma <= 0:
        raise InvalidInputError("gamma must be positive")
    gram = h.T @ h
    c = np.zeros((n, n))
    for i in range(n):
        try:
            c[:, i] = solve_column(gram, i, gamma, delta)
        except NumericalError as exc:
            raise NumericalError(
                f"self-expression failed on column {i}: {exc}",
                residual=exc.residual,
                best=exc.best,
            ) from exc
    return c
