import numpy as np
import pytest

from deepssc import sparse
from deepssc.errors import InvalidInputError, NumericalError
from deepssc.sparse import (
    LassoProblem,
    kkt_residual,
    self_expression,
    solve_lasso_cd,
    solve_lasso_homotopy,
)


def soft_threshold(v, gamma):
    return np.sign(v) * np.maximum(np.abs(v) - gamma, 0.0)


def orthonormal(rng, d):
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    return q


def test_problem_validation():
    with pytest.raises(InvalidInputError):
        LassoProblem(np.ones((3, 2)), np.ones(4), 0.1)
    with pytest.raises(InvalidInputError):
        LassoProblem(np.ones((3, 2)), np.ones(3), 0.0)
    with pytest.raises(InvalidInputError):
        LassoProblem(np.ones((3, 2)), np.ones(3), 0.1, excluded=2)


def test_homotopy_large_gamma_zero_solution():
    rng = np.random.default_rng(0)
    d_mat = rng.standard_normal((5, 8))
    y = rng.standard_normal(5)
    gamma = float(np.max(np.abs(d_mat.T @ y))) + 0.1
    code = solve_lasso_homotopy(LassoProblem(d_mat, y, gamma))
    assert np.array_equal(code.coefficients, np.zeros(8))
    assert code.support.size == 0


def test_homotopy_orthonormal_closed_form():
    rng = np.random.default_rng(1)
    q = orthonormal(rng, 6)
    y = rng.standard_normal(6)
    for gamma in (0.05, 0.3, 1.0):
        code = solve_lasso_homotopy(LassoProblem(q, y, gamma))
        oracle = soft_threshold(q.T @ y, gamma)
        assert np.max(np.abs(code.coefficients - oracle)) <= 1e-8


def test_homotopy_single_atom():
    rng = np.random.default_rng(2)
    q = orthonormal(rng, 5)
    y = q[:, 3].copy()
    code = solve_lasso_homotopy(LassoProblem(q, y, 0.01))
    assert list(code.support) == [3]
    assert abs(code.coefficients[3] - 0.99) <= 1e-8


def test_homotopy_respects_exclusion():
    rng = np.random.default_rng(3)
    d_mat = rng.standard_normal((6, 10))
    d_mat /= np.linalg.norm(d_mat, axis=0)
    y = d_mat[:, 4].copy()
    code = solve_lasso_homotopy(LassoProblem(d_mat, y, 0.05, excluded=4))
    assert code.coefficients[4] == 0.0


def test_cd_agrees_on_fixtures():
    rng = np.random.default_rng(4)
    q = orthonormal(rng, 6)
    y = rng.standard_normal(6)
    for gamma in (0.05, 0.3, float(np.max(np.abs(q.T @ y))) + 0.1):
        prob = LassoProblem(q, y, gamma)
        a = solve_lasso_homotopy(prob)
        b = solve_lasso_cd(prob)
        base = max(abs(a.objective), 1e-12)
        assert abs(a.objective - b.objective) / base <= 1e-8


def test_cd_scalar_problem():
    d_mat = np.array([[2.0]])
    y = np.array([3.0])
    code = solve_lasso_cd(LassoProblem(d_mat, y, 0.5))
    # min 1/2 (3 - 2c)^2 + 0.5 |c|: stationary at c = (6 - 0.5)/4
    assert abs(code.coefficients[0] - 5.5 / 4.0) <= 1e-10


def test_cd_small_gamma_approaches_linear_solve():
    rng = np.random.default_rng(5)
    d_mat = rng.standard_normal((6, 6)) + 3 * np.eye(6)
    y = rng.standard_normal(6)
    code = solve_lasso_cd(LassoProblem(d_mat, y, 1e-8))
    assert np.linalg.norm(code.coefficients - np.linalg.solve(d_mat, y)) <= 1e-4


def test_cd_iteration_cap_raises():
    rng = np.random.default_rng(6)
    d_mat = rng.standard_normal((10, 10))
    y = rng.standard_normal(10)
    with pytest.raises(NumericalError) as info:
        solve_lasso_cd(LassoProblem(d_mat, y, 0.01), max_iters=1)
    assert info.value.best is not None
    assert info.value.residual is not None


def test_kkt_residual_of_optimum():
    rng = np.random.default_rng(7)
    d_mat = rng.standard_normal((8, 12))
    y = rng.standard_normal(8)
    prob = LassoProblem(d_mat, y, 0.2)
    code = solve_lasso_homotopy(prob, delta=1e-4)
    assert kkt_residual(prob, code) <= 1e-4


def test_kkt_residual_zero_for_killed_problem():
    rng = np.random.default_rng(8)
    d_mat = rng.standard_normal((5, 7))
    y = rng.standard_normal(5)
    gamma = float(np.max(np.abs(d_mat.T @ y))) + 1.0
    prob = LassoProblem(d_mat, y, gamma)
    assert kkt_residual(prob, np.zeros(7)) == 0.0


def test_kkt_residual_detects_perturbation():
    rng = np.random.default_rng(9)
    d_mat = rng.standard_normal((8, 6))
    y = rng.standard_normal(8)
    prob = LassoProblem(d_mat, y, 0.3)
    code = solve_lasso_homotopy(prob)
    c = code.coefficients.copy()
    j = code.support[0] if code.support.size else 0
    c[j] += 0.1
    assert kkt_residual(prob, c) > 1e-4


def test_objective_no_worse_than_zero_code():
    rng = np.random.default_rng(10)
    for _ in range(20):
        d_mat = rng.standard_normal((6, 9))
        y = rng.standard_normal(6)
        gamma = float(10 ** rng.uniform(-3, 0))
        code = solve_lasso_homotopy(LassoProblem(d_mat, y, gamma))
        assert code.objective <= 0.5 * float(y @ y) + 1e-10


def test_homotopy_vs_cd_random_problems():
    rng = np.random.default_rng(11)
    for _ in range(50):
        d = int(rng.integers(3, 21))
        p = int(rng.integers(2, 31))
        d_mat = rng.standard_normal((d, p))
        y = rng.standard_normal(d)
        gamma = float(10 ** rng.uniform(-3, 0.5))
        prob = LassoProblem(d_mat, y, gamma)
        a = solve_lasso_homotopy(prob)
        assert kkt_residual(prob, a) <= 1e-4
        b = solve_lasso_cd(prob)
        base = max(abs(b.objective), 1e-12)
        assert abs(a.objective - b.objective) / base <= 1e-6


def test_self_expression_identical_columns():
    rng = np.random.default_rng(12)
    v = rng.standard_normal(6)
    v /= np.linalg.norm(v)
    h = np.column_stack([v, v])
    gamma = 0.05
    c = self_expression(h, gamma)
    expected = np.array([[0.0, 1 - gamma], [1 - gamma, 0.0]])
    assert np.max(np.abs(c - expected)) <= 1e-8


def test_self_expression_large_gamma_all_zero():
    rng = np.random.default_rng(13)
    h = rng.standard_normal((5, 8))
    gram = h.T @ h
    gamma = float(np.max(np.abs(gram))) + 1.0
    c = self_expression(h, gamma)
    assert np.array_equal(c, np.zeros((8, 8)))


def test_self_expression_zero_diagonal():
    rng = np.random.default_rng(14)
    h = rng.standard_normal((6, 15))
    c = self_expression(h, 0.1)
    assert np.array_equal(np.diag(c), np.zeros(15))


def test_self_expression_columns_satisfy_kkt():
    rng = np.random.default_rng(15)
    h = rng.standard_normal((5, 12))
    gamma = 0.2
    c = self_expression(h, gamma)
    for i in range(12):
        prob = LassoProblem(h, h[:, i].copy(), gamma, excluded=i)
        assert kkt_residual(prob, c[:, i]) <= 1e-4


def test_self_expression_needs_two_samples():
    with pytest.raises(InvalidInputError):
        self_expression(np.ones((3, 1)), 0.1)


def test_sparse_code_objective_field():
    rng = np.random.default_rng(16)
    d_mat = rng.standard_normal((6, 9))
    y = rng.standard_normal(6)
    gamma = 0.3
    code = solve_lasso_homotopy(LassoProblem(d_mat, y, gamma))
    c = code.coefficients
    direct = 0.5 * float(np.sum((y - d_mat @ c) ** 2)) + gamma * float(
        np.sum(np.abs(c))
    )
    assert abs(code.objective - direct) <= 1e-10
