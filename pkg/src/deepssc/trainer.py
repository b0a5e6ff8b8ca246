"""Alternating optimization of the network and the self-expression matrix.

Each epoch visits the samples in a seeded random order. For every sample
the current features are refreshed by a forward pass, its sparse code is
re-solved against the latest features of the other samples, and one SGD
step moves the network toward the (held-fixed) reconstruction of that
sample. Training stops when the relative change of the total loss falls
below the convergence threshold or the epoch budget runs out.
"""

import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from deepssc import network, sparse
from deepssc.errors import InvalidInputError, NumericalError
from deepssc.linalg import as_matrix
from deepssc.network import forward_batch, init_network, sgd_step

WEIGHT_DECAY = 1e-3  # l2 regularization on the network weights
AUTO_LAMBDA_SCALE = 1e-3  # sphere-term weight is this over n in auto mode


@dataclass
class TrainerConfig:
    layer_dims: List[int] = field(default_factory=list)
    gamma: float = 0.05
    delta: float = 1e-4
    lambda_mode: str = "auto"
    lambda_value: Optional[float] = None
    mu: float = 1e-3
    tau: int = 100
    conv_tol: float = 1e-3
    activation: str = "tanh"
    alternation: str = "per_sample"
    post_linearize: bool = False
    normalize_input: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.gamma <= 0:
            raise InvalidInputError("gamma must be positive")
        if self.delta <= 0:
            raise InvalidInputError("delta must be positive")
        if self.mu <= 0:
            raise InvalidInputError("mu must be positive")
        if self.tau < 0:
            raise InvalidInputError("tau must be non-negative")
        if self.conv_tol <= 0:
            raise InvalidInputError("conv_tol must be positive")
        if self.lambda_mode not in ("auto", "explicit"):
            raise InvalidInputError(f"unknown lambda_mode {self.lambda_mode!r}")
        if self.lambda_mode == "explicit" and (
            self.lambda_value is None or self.lambda_value < 0
        ):
            raise InvalidInputError("explicit lambda_mode needs lambda_value >= 0")
        if self.alternation not in ("per_sample", "per_epoch"):
            raise InvalidInputError(f"unknown alternation {self.alternation!r}")

    def effective_lambda(self, n):
        if self.lambda_mode == "auto":
            return AUTO_LAMBDA_SCALE / n
        return float(self.lambda_value)


@dataclass
class LossBreakdown:
    recon: float
    l1: float
    sphere: float
    total: float


@dataclass
class EpochRecord:
    epoch: int
    loss: LossBreakdown
    seconds: float


@dataclass
class TrainTrace:
    records: List[EpochRecord] = field(default_factory=list)

    @property
    def epochs_run(self):
        return len(self.records)


def compute_loss(params, x, c, gamma, lam):
    """Loss terms evaluated on the current top-layer features."""
    x = as_matrix(x, "x")
    c = as_matrix(c, "c")
    n = x.shape[1]
    if c.shape != (n, n):
        raise InvalidInputError(f"coefficient matrix must be {n}x{n}, got {c.shape}")
    h = forward_batch(params, x)
    resid = h - h @ c
    recon = 0.5 * float(np.sum(resid * resid))
    l1 = gamma * float(np.sum(np.abs(c)))
    norms = np.sum(h * h, axis=0)
    sphere = 0.25 * lam * float(np.sum((norms - 1.0) ** 2))
    return LossBreakdown(recon=recon, l1=l1, sphere=sphere, total=recon + l1 + sphere)


def _update_gram_column(gram, h, i):
    col = h.T @ h[:, i]
    gram[:, i] = col
    gram[i, :] = col


def train(dataset, config):
    """Run the alternating optimization; returns (params, C, trace)."""
    x = dataset.x
    d, n = x.shape
    if not config.layer_dims or config.layer_dims[0] != d:
        raise InvalidInputError(
            f"layer_dims must start at the input dimension {d}, "
            f"got {config.layer_dims}"
        )
    lam = config.effective_lambda(n)
    rng = np.random.default_rng(config.seed)
    params = init_network(config.layer_dims, config.activation)

    h = forward_batch(params, x)
    gram = h.T @ h
    c = _self_expression_from_gram(gram, config.gamma, config.delta)
    trace = TrainTrace()
    prev_total = compute_loss(params, x, c, config.gamma, lam).total

    for epoch in range(1, config.tau + 1):
        start = time.perf_counter()
        order = rng.permutation(n)
        try:
            if config.alternation == "per_sample":
                params = _epoch_per_sample(
                    params, x, h, gram, c, order, config, lam
                )
            else:
                params = _epoch_per_epoch(params, x, h, c, order, config, lam)
                h = forward_batch(params, x)
                gram = h.T @ h
                c = _self_expression_from_gram(gram, config.gamma, config.delta)
        except NumericalError as exc:
            raise NumericalError(
                f"epoch {epoch}: {exc}", residual=exc.residual, best=exc.best
            ) from exc
        # epoch boundary: consistent features for the loss and next epoch
        h = forward_batch(params, x)
        gram = h.T @ h
        loss = compute_loss(params, x, c, config.gamma, lam)
        trace.records.append(
            EpochRecord(
                epoch=epoch, loss=loss, seconds=time.perf_counter() - start
            )
        )
        rel = abs(loss.total - prev_total) / max(prev_total, 1e-12)
        prev_total = loss.total
        if rel < config.conv_tol:
            break
    return params, c, trace


def _self_expression_from_gram(gram, gamma, delta):
    n = gram.shape[0]
    c = np.zeros((n, n))
    for i in range(n):
        c[:, i] = sparse.solve_column(gram, i, gamma, delta)
    return c


def _epoch_per_sample(params, x, h, gram, c, order, config, lam):
    """Interleaved sweep: refresh features and code of sample i, then step."""
    for i in order:
        i = int(i)
        h[:, i] = network.forward(params, x[:, i]).output
        _update_gram_column(gram, h, i)
        try:
            c[:, i] = sparse.solve_column(gram, i, config.gamma, config.delta)
        except NumericalError as exc:
            raise NumericalError(
                f"sample {i}: {exc}", residual=exc.residual, best=exc.best
            ) from exc
        target = h @ c[:, i]
        grads = network.per_sample_gradient(params, x[:, i], target, lam)
        params = sgd_step(params, grads, config.mu, WEIGHT_DECAY)
    return params


def _epoch_per_epoch(params, x, h, c, order, config, lam):
    """Prose variant: sweep all network updates with the codes held fixed."""
    for i in order:
        i = int(i)
        h[:, i] = network.forward(params, x[:, i]).output
        target = h @ c[:, i]
        grads = network.per_sample_gradient(params, x[:, i], target, lam)
        params = sgd_step(params, grads, config.mu, WEIGHT_DECAY)
    return params


def infer_features(params, x, post_linearize):
    """Top-layer features; optionally with the activations stripped."""
    x = as_matrix(x, "x")
    if not post_linearize:
        return forward_batch(params, x)
    h = x
    for layer in params.layers:
        h = layer.w @ h + layer.b[:, None]
    return h


def ssc_baseline(dataset, gamma, delta=sparse.DEFAULT_DELTA):
    """Shallow SSC: self-expression directly on the input features."""
    return sparse.self_expression(dataset.x, gamma, delta)
