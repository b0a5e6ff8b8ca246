"""Dataset ingestion, preprocessing, and synthetic generators.

Files store one sample per row; in memory the convention is column-major:
``x`` is d x n with one sample per column. Synthetic data comes from a
union of random low-dimensional subspaces, optionally pushed through a
fixed invertible nonlinearity (elementwise cubic followed by a random
rotation) to break linear self-expression while preserving clusters.
"""

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from deepssc.errors import IngestionError, InvalidInputError
from deepssc.linalg import as_matrix, symmetric_eig


@dataclass
class Dataset:
    """d x n sample matrix with optional ground-truth labels.

    Labels are compacted to contiguous ids 0..k-1 in first-appearance
    order at construction; ``k`` is inferred from them when absent.
    """

    x: np.ndarray
    labels: Optional[np.ndarray] = None
    k: Optional[int] = None

    def __post_init__(self):
        self.x = as_matrix(self.x, "x")
        d, n = self.x.shape
        if d < 1 or n < 2:
            raise InvalidInputError(f"need d >= 1 and n >= 2, got {d}x{n}")
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.ndim != 1 or labels.shape[0] != n:
                raise InvalidInputError(
                    f"labels must be a length-{n} vector, got shape {labels.shape}"
                )
            if np.any(labels < 0):
                raise InvalidInputError("labels must be non-negative")
            self.labels = compact_labels(labels)
            found = int(self.labels.max()) + 1
            if self.k is None:
                self.k = found
            elif self.k != found:
                raise InvalidInputError(
                    f"k={self.k} but labels contain {found} distinct ids"
                )


def compact_labels(labels):
    """Remap arbitrary integer ids to 0..k-1 in first-appearance order."""
    labels = np.asarray(labels, dtype=np.int64)
    mapping = {}
    out = np.empty_like(labels)
    for i, lab in enumerate(labels):
        key = int(lab)
        if key not in mapping:
            mapping[key] = len(mapping)
        out[i] = mapping[key]
    return out


def load_matrix_csv(path):
    """Load a samples-by-features CSV into a d x n matrix.

    A single leading header row is skipped when its first field does not
    parse as a float. Ragged rows or unparseable fields raise
    ``IngestionError`` naming the offending row and column (1-based).
    """
    rows = []
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise IngestionError(f"cannot open data file {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle)
        for lineno, record in enumerate(reader, start=1):
            if not record:
                continue
            if lineno == 1:
                try:
                    float(record[0])
                except ValueError:
                    continue  # header row
            values = []
            for col, fieldtext in enumerate(record, start=1):
                try:
                    values.append(float(fieldtext))
                except ValueError as exc:
                    raise IngestionError(
                        f"{path}: row {lineno}, column {col}: "
                        f"cannot parse {fieldtext!r} as a float"
                    ) from exc
            if rows and len(values) != len(rows[0]):
                raise IngestionError(
                    f"{path}: row {lineno} has {len(values)} fields, "
                    f"expected {len(rows[0])}"
                )
            rows.append(values)
    if not rows:
        raise IngestionError(f"{path}: no data rows")
    return np.array(rows, dtype=np.float64).T


def save_matrix_csv(path, x):
    """Write a d x n matrix as one sample per row, full precision."""
    x = as_matrix(x, "x")
    with open(path, "w", newline="") as handle:
        for col in x.T:
            handle.write(",".join(repr(float(v)) for v in col))
            handle.write("\n")


def load_labels(path):
    """Load one non-negative integer label per line."""
    labels = []
    try:
        handle = open(path)
    except OSError as exc:
        raise IngestionError(f"cannot open labels file {path}: {exc}") from exc
    with handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                value = int(text)
            except ValueError as exc:
                raise IngestionError(
                    f"{path}: line {lineno}: cannot parse {text!r} as an integer"
                ) from exc
            if value < 0:
                raise IngestionError(f"{path}: line {lineno}: negative label {value}")
            labels.append(value)
    if not labels:
        raise IngestionError(f"{path}: no labels")
    return np.array(labels, dtype=np.int64)


def save_labels(path, labels):
    with open(path, "w") as handle:
        for lab in labels:
            handle.write(f"{int(lab)}\n")


def normalize_columns(x):
    """Scale every column with norm > 1e-12 to unit l2 norm."""
    x = as_matrix(x, "x")
    out = x.copy()
    norms = np.linalg.norm(out, axis=0)
    keep = norms > 1e-12
    out[:, keep] /= norms[keep]
    return out


def pca_reduce(x, target_dim):
    """Project onto the top principal directions.

    Returns ``(reduced, basis, mean)`` where ``reduced`` is
    target_dim x n, ``basis`` has orthonormal columns, and ``mean`` is
    the per-row mean removed before projection.
    """
    x = as_matrix(x, "x")
    d, n = x.shape
    if not 1 <= target_dim <= min(d, n):
        raise InvalidInputError(
            f"target_dim {target_dim} out of range for a {d}x{n} matrix"
        )
    mean = x.mean(axis=1)
    centered = x - mean[:, None]
    cov = centered @ centered.T / (n - 1)
    eig = symmetric_eig(cov)
    # ascending eigenvalues: the top target_dim live at the tail
    idx = np.arange(d - target_dim, d)[::-1]
    basis = eig.eigenvectors[:, idx]
    reduced = basis.T @ centered
    return reduced, basis, mean


@dataclass
class SynthSpec:
    """Parameters of the union-of-subspaces generator."""

    num_subspaces: int
    ambient_dim: int
    subspace_dim: int
    points_per: int
    noise_sigma: float = 0.0
    warp: str = "identity"
    seed: int = 0

    def __post_init__(self):
        if self.num_subspaces < 1:
            raise InvalidInputError("need at least one subspace")
        if self.subspace_dim >= self.ambient_dim:
            raise InvalidInputError(
                f"subspace_dim {self.subspace_dim} must be below "
                f"ambient_dim {self.ambient_dim}"
            )
        if self.points_per < self.subspace_dim + 1:
            raise InvalidInputError(
                f"points_per must be at least subspace_dim + 1 = "
                f"{self.subspace_dim + 1}"
            )
        if self.noise_sigma < 0:
            raise InvalidInputError("noise_sigma must be non-negative")
        if self.warp not in ("identity", "cubic_rotate"):
            raise InvalidInputError(f"unknown warp {self.warp!r}")


def _random_orthonormal(rng, rows, cols):
    q, r = np.linalg.qr(rng.standard_normal((rows, cols)))
    return q * np.sign(np.where(np.diag(r) == 0, 1.0, np.diag(r)))


def _gen_points(spec, rng):
    blocks = []
    bases = []
    for _ in range(spec.num_subspaces):
        basis = _random_orthonormal(rng, spec.ambient_dim, spec.subspace_dim)
        coeffs = rng.standard_normal((spec.subspace_dim, spec.points_per))
        pts = basis @ coeffs
        if spec.noise_sigma > 0:
            pts = pts + spec.noise_sigma * rng.standard_normal(pts.shape)
        blocks.append(pts)
        bases.append(basis)
    x = np.concatenate(blocks, axis=1)
    labels = np.repeat(np.arange(spec.num_subspaces), spec.points_per)
    return x, labels, bases


def gen_linear_subspaces(spec):
    """Sample points from a union of random linear subspaces."""
    if spec.warp != "identity":
        raise InvalidInputError("gen_linear_subspaces requires warp='identity'")
    rng = np.random.default_rng(spec.seed)
    x, labels, _ = _gen_points(spec, rng)
    return Dataset(x=x, labels=labels, k=spec.num_subspaces)


def cubic_rotate_warp(x, rotation):
    """The fixed nonlinearity x -> R (x + 0.5 x^3), elementwise cube."""
    return rotation @ (x + 0.5 * x**3)


def invert_cubic_rotate(z, rotation):
    """Exact inverse of ``cubic_rotate_warp`` via Cardano's formula."""
    y = rotation.T @ z
    # unique real root of x^3 + 2x - 2y = 0 (monotone cubic)
    disc = np.sqrt(y**2 + 8.0 / 27.0)
    return np.cbrt(y + disc) + np.cbrt(y - disc)


def gen_nonlinear_subspaces(spec):
    """Union of subspaces pushed through the cubic-rotate warp.

    With ``warp='identity'`` this reduces to ``gen_linear_subspaces``.
    The rotation is drawn from the same seeded stream after the points,
    so the pre-warp point cloud matches the linear generator.
    """
    if spec.warp == "identity":
        return gen_linear_subspaces(spec)
    rng = np.random.default_rng(spec.seed)
    x, labels, _ = _gen_points(spec, rng)
    rotation = _random_orthonormal(rng, spec.ambient_dim, spec.ambient_dim)
    warped = cubic_rotate_warp(x, rotation)
    return Dataset(x=warped, labels=labels, k=spec.num_subspaces)
