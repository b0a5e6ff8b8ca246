"""Benchmark the compiled kernels against the pure-NumPy fallback.

Runs each of the three hot kernels (Jacobi eigensolver, lasso coordinate
descent, Lloyd iterations) on identical inputs through both backends and
reports wall time plus speedup. Requires the compiled extension; exits
with a message if only the fallback is available.

Usage: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from deepssc._kernels import _fallback

try:
    from deepssc._kernels import _compiled
except ImportError:
    _compiled = None


def timeit(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def bench_jacobi(rows):
    rng = np.random.default_rng(0)
    for n in (30, 60, 120):
        a = rng.standard_normal((n, n))
        s = 0.5 * (a + a.T)
        t_py, r_py = timeit(lambda: _fallback.jacobi_eig(s, 1e-11, 100))
        t_c, r_c = timeit(lambda: _compiled.jacobi_eig(s, 1e-11, 100))
        drift = float(np.max(np.abs(np.sort(r_py[0]) - np.sort(r_c[0]))))
        rows.append((f"jacobi_eig n={n}", t_py, t_c, drift))


def bench_lasso_cd(rows):
    rng = np.random.default_rng(1)
    for p in (50, 150, 300):
        d_mat = rng.standard_normal((p + 10, p))
        gram = d_mat.T @ d_mat
        b = d_mat.T @ rng.standard_normal(p + 10)
        args = (gram, b, 0.1, np.zeros(p), 5_000_000, 1e-10)
        t_py, r_py = timeit(lambda: _fallback.lasso_cd(*args))
        t_c, r_c = timeit(lambda: _compiled.lasso_cd(*args))
        drift = float(np.max(np.abs(np.asarray(r_py[0]) - np.asarray(r_c[0]))))
        rows.append((f"lasso_cd p={p}", t_py, t_c, drift))


def bench_lloyd(rows):
    rng = np.random.default_rng(2)
    for n, k in ((500, 5), (2000, 10)):
        pts = rng.standard_normal((n, 8))
        init = pts[rng.choice(n, size=k, replace=False)].copy()
        t_py, r_py = timeit(lambda: _fallback.lloyd(pts, init.copy(), 300))
        t_c, r_c = timeit(lambda: _compiled.lloyd(pts, init.copy(), 300))
        drift = float(abs(r_py[2] - r_c[2]))
        rows.append((f"lloyd n={n} k={k}", t_py, t_c, drift))


def main():
    if _compiled is None:
        print("compiled extension not available; nothing to compare")
        return 1
    rows = []
    bench_jacobi(rows)
    bench_lasso_cd(rows)
    bench_lloyd(rows)
    print(f"{'kernel':<20} {'python':>10} {'compiled':>10} {'speedup':>8} {'drift':>10}")
    for name, t_py, t_c, drift in rows:
        print(
            f"{name:<20} {t_py * 1e3:>8.1f}ms {t_c * 1e3:>8.1f}ms "
            f"{t_py / t_c:>7.1f}x {drift:>10.2e}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
