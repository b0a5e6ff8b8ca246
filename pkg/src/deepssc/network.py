"""Small fully connected network: forward pass, backprop, SGD step.

Layers compute h = g(W h_prev + b). Weights start as the rectangular
identity band and biases at zero, so an untrained network is (up to the
activation) a truncating projection of its input. The per-sample loss is
1/2 ||h - target||^2 + (lam/4) (h'h - 1)^2 with the target treated as a
constant vector.
"""

from dataclasses import dataclass

import numpy as np

from deepssc.errors import InvalidInputError
from deepssc.linalg import as_matrix, as_vector

ACTIVATIONS = ("tanh", "sigmoid", "nssigmoid", "relu", "identity")


def _check_activation(kind):
    if kind not in ACTIVATIONS:
        raise InvalidInputError(f"unknown activation {kind!r}")


def activation_apply(kind, z):
    """Apply activation ``kind`` elementwise. nssigmoid is softplus."""
    _check_activation(kind)
    z = np.asarray(z, dtype=np.float64)
    if kind == "tanh":
        return np.tanh(z)
    if kind == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    if kind == "nssigmoid":
        return np.logaddexp(0.0, z)
    if kind == "relu":
        return np.maximum(z, 0.0)
    return z.copy()


def activation_derivative(kind, z):
    _check_activation(kind)
    z = np.asarray(z, dtype=np.float64)
    if kind == "tanh":
        t = np.tanh(z)
        return 1.0 - t * t
    if kind == "sigmoid":
        s = 1.0 / (1.0 + np.exp(-z))
        return s * (1.0 - s)
    if kind == "nssigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    if kind == "relu":
        return np.where(z > 0.0, 1.0, 0.0)
    return np.ones_like(z)


@dataclass
class LayerParams:
    w: np.ndarray
    b: np.ndarray


@dataclass
class NetworkParams:
    """Layer stack plus activation; an empty stack is the identity map."""

    layers: list
    activation: str

    @property
    def depth(self):
        return len(self.layers)

    def copy(self):
        return NetworkParams(
            layers=[LayerParams(l.w.copy(), l.b.copy()) for l in self.layers],
            activation=self.activation,
        )


@dataclass
class ForwardTrace:
    """Pre-activations z(1..M) and outputs h(0..M); h(0) is the input."""

    pre_activations: list
    outputs: list

    @property
    def output(self):
        return self.outputs[-1]


def init_network(dims, activation):
    """Identity-band weights (ones on the main diagonal) and zero biases."""
    _check_activation(activation)
    if not dims or any(d < 1 for d in dims):
        raise InvalidInputError(f"layer widths must all be >= 1, got {dims}")
    layers = []
    for prev, cur in zip(dims[:-1], dims[1:]):
        layers.append(LayerParams(w=np.eye(cur, prev), b=np.zeros(cur)))
    return NetworkParams(layers=layers, activation=activation)


def forward(params, x):
    """Run one sample through the stack, keeping the full trace."""
    x = as_vector(x, "x")
    if params.layers and params.layers[0].w.shape[1] != x.shape[0]:
        raise InvalidInputError(
            f"input length {x.shape[0]} does not match first layer "
            f"width {params.layers[0].w.shape[1]}"
        )
    pre = []
    outs = [x]
    h = x
    for layer in params.layers:
        z = layer.w @ h + layer.b
        h = activation_apply(params.activation, z)
        pre.append(z)
        outs.append(h)
    return ForwardTrace(pre_activations=pre, outputs=outs)


def forward_batch(params, x):
    """Columnwise forward pass; returns the top-layer outputs d(M) x n.

    Columns go through the same matrix-vector path as ``forward`` so the
    batch output is bit-identical to the per-sample loop (BLAS
    matrix-matrix products can differ in the last ulp).
    """
    x = as_matrix(x, "x")
    if params.layers and params.layers[0].w.shape[1] != x.shape[0]:
        raise InvalidInputError(
            f"input dim {x.shape[0]} does not match first layer "
            f"width {params.layers[0].w.shape[1]}"
        )
    if not params.layers:
        return x.copy()
    n = x.shape[1]
    out = np.empty((params.layers[-1].w.shape[0], n))
    for j in range(n):
        h = x[:, j]
        for layer in params.layers:
            h = activation_apply(params.activation, layer.w @ h + layer.b)
        out[:, j] = h
    return out


def per_sample_loss(params, x, target, lam):
    """Scalar loss backing ``per_sample_gradient`` (used by the tests)."""
    h = forward(params, x).output
    resid = h - target
    sphere = float(h @ h) - 1.0
    return 0.5 * float(resid @ resid) + 0.25 * lam * sphere * sphere


def per_sample_gradient(params, x, target, lam):
    """Backprop gradients of the per-sample loss w.r.t. every layer.

    ``target`` is treated as a constant (the reconstruction from the
    fixed sparse code); returns a list of ``LayerParams``-shaped pairs.
    """
    target = as_vector(target, "target")
    trace = forward(params, x)
    h = trace.output
    if h.shape != target.shape:
        raise InvalidInputError(
            f"target length {target.shape[0]} does not match top-layer "
            f"width {h.shape[0]}"
        )
    grads = [LayerParams(np.zeros_like(l.w), np.zeros_like(l.b)) for l in params.layers]
    if not params.layers:
        return grads
    delta = (h - target) + lam * (float(h @ h) - 1.0) * h
    for m in range(len(params.layers) - 1, -1, -1):
        delta = delta * activation_derivative(params.activation, trace.pre_activations[m])
        grads[m].w = np.outer(delta, trace.outputs[m])
        grads[m].b = delta.copy()
        if m > 0:
            delta = params.layers[m].w.T @ delta
    return grads


def sgd_step(params, grads, mu, phi):
    """One SGD step with l2 weight decay ``phi`` on weights only."""
    if len(grads) != len(params.layers):
        raise InvalidInputError("gradient/parameter layer counts differ")
    layers = []
    for layer, grad in zip(params.layers, grads):
        if grad.w.shape != layer.w.shape or grad.b.shape != layer.b.shape:
            raise InvalidInputError("gradient shapes do not match parameters")
        layers.append(
            LayerParams(
                w=layer.w - mu * (grad.w + phi * layer.w),
                b=layer.b - mu * grad.b,
            )
        )
    return NetworkParams(layers=layers, activation=params.activation)
