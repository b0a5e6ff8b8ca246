"""Numerical hot-loop kernels.

The same three kernels (cyclic Jacobi eigensolver, cyclic coordinate
descent for the lasso, Lloyd iterations for k-means) exist twice: a
Cython extension built at install time and a pure-NumPy fallback. The
compiled module is preferred; set ``DEEPSSC_PURE_PYTHON=1`` to force the
fallback (used by the benchmark and as a safety net on platforms where
the extension failed to build).
"""

import os

if os.environ.get("DEEPSSC_PURE_PYTHON"):
    from deepssc._kernels import _fallback as _impl

    BACKEND = "python"
else:
    try:
        from deepssc._kernels import _compiled as _impl

        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - build-dependent
        from deepssc._kernels import _fallback as _impl

        BACKEND = "python"

jacobi_eig = _impl.jacobi_eig
lasso_cd = _impl.lasso_cd
lloyd = _impl.lloyd
