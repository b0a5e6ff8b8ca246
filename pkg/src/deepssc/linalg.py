"""Dense float64 matrix helpers and a symmetric eigendecomposition.

Everything downstream (PCA, spectral embedding) goes through
``symmetric_eig``, which runs cyclic Jacobi rotations via the kernel
backend and applies a deterministic sign convention so repeated calls on
identical input give bit-identical results.
"""

from dataclasses import dataclass

import numpy as np

from deepssc import _kernels
from deepssc.errors import InvalidInputError, NumericalError

JACOBI_TOL = 1e-11
JACOBI_MAX_SWEEPS = 100


def as_matrix(a, name="matrix"):
    """Validate and return ``a`` as a finite 2-D float64 array."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def as_vector(a, name="vector"):
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def matmul(a, b):
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise InvalidInputError(
            f"inner dimensions disagree: {a.shape} x {b.shape}"
        )
    out = a @ b
    if not np.all(np.isfinite(out)):
        raise NumericalError("matrix product overflowed to non-finite values")
    return out


@dataclass
class EigenResult:
    """Eigenvalues in ascending order; eigenvectors as aligned columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def symmetric_eig(s):
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi.

    The column for each eigenvalue is flipped so its largest-magnitude
    entry is nonnegative (first such entry on ties).
    """
    s = as_matrix(s, "s")
    n, m = s.shape
    if n != m:
        raise InvalidInputError(f"matrix must be square, got {s.shape}")
    asym = float(np.max(np.abs(s - s.T))) if n else 0.0
    if asym > 1e-9:
        raise InvalidInputError(f"matrix is not symmetric (max|s - s'| = {asym:.3e})")
    w, v, off, converged = _kernels.jacobi_eig(s, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    if not converged:
        raise NumericalError(
            f"Jacobi sweeps did not converge (off-diagonal norm {off:.3e})",
            residual=off,
        )
    order = np.argsort(w, kind="stable")
    w = w[order]
    v = v[:, order]
    for j in range(n):
        i = int(np.argmax(np.abs(v[:, j])))
        if v[i, j] < 0.0:
            v[:, j] = -v[:, j]
    return EigenResult(w, v)
