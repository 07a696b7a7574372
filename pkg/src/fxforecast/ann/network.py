"""
Layered feed-forward network with tansig hidden layers and a purelin output.

Parameters are kept as per-layer weight matrices of shape ``(fan_out, fan_in)``
and bias vectors.  The flat parameter vector used by the trainers lists, layer
by layer, the row-major weights followed by the biases.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

FORMAT_VERSION = 1

_ACTIVATIONS = ("tansig", "purelin")


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class NetworkSpec:
    input_count: int
    hidden_layer_sizes: tuple[int, ...] = (10,)
    output_count: int = 1
    hidden_activation: str = "tansig"
    output_activation: str = "purelin"

    def __post_init__(self):
        object.__setattr__(self, "hidden_layer_sizes", tuple(int(h) for h in self.hidden_layer_sizes))
        counts = (self.input_count, self.output_count) + self.hidden_layer_sizes
        if any(c < 1 for c in counts):
            raise ValueError("all layer sizes must be >= 1")
        if self.hidden_activation != "tansig" or self.output_activation != "purelin":
            raise ValueError(f"supported activations are tansig (hidden) and purelin (output), got {self.hidden_activation}/{self.output_activation}")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.input_count,) + self.hidden_layer_sizes + (self.output_count,)

    @property
    def n_params(self) -> int:
        s = self.layer_sizes
        return sum(s[i + 1] * (s[i] + 1) for i in range(len(s) - 1))

    def to_dict(self) -> dict:
        return {
            "input_count": self.input_count,
            "hidden_layer_sizes": list(self.hidden_layer_sizes),
            "output_count": self.output_count,
            "hidden_activation": self.hidden_activation,
            "output_activation": self.output_activation,
        }


@dataclass
class Network:
    spec: NetworkSpec
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    seed: int | None = None
    _shapes: list = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sizes = self.spec.layer_sizes
        self.weights = [np.array(w, dtype=float) for w in self.weights]
        self.biases = [np.array(b, dtype=float).reshape(-1) for b in self.biases]
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise ShapeError("layer count does not match spec")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (sizes[i + 1], sizes[i]) or b.shape != (sizes[i + 1],):
                raise ShapeError(f"layer {i}: got W{w.shape}, b{b.shape}, expected W{(sizes[i + 1], sizes[i])}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError("network parameters must be finite")
        self._shapes = [(w.shape, b.shape) for w, b in zip(self.weights, self.biases)]

    @property
    def n_params(self) -> int:
        return self.spec.n_params

    def get_flat(self) -> np.ndarray:
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts += [w.ravel(), b]
        return np.concatenate(parts)

    def with_flat(self, theta) -> "Network":
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise ShapeError(f"expected {self.n_params} parameters, got {theta.shape}")
        weights, biases, pos = [], [], 0
        for wshape, bshape in self._shapes:
            size = wshape[0] * wshape[1]
            weights.append(theta[pos: pos + size].reshape(wshape))
            pos += size
            biases.append(theta[pos: pos + bshape[0]].copy())
            pos += bshape[0]
        return Network(self.spec, weights, biases, self.seed)

    def copy(self) -> "Network":
        return self.with_flat(self.get_flat())

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "spec": self.spec.to_dict(),
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Network":
        if d.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported network format {d.get('format_version')!r}")
        spec = NetworkSpec(**d["spec"])
        return cls(spec, [np.array(w) for w in d["weights"]], [np.array(b) for b in d["biases"]], d.get("seed"))

    @classmethod
    def from_json(cls, text: str) -> "Network":
        return cls.from_dict(json.loads(text))


def init_network(spec: NetworkSpec, seed: int) -> Network:
    """Random network: weights and biases uniform on ``[-0.5, 0.5] / sqrt(fan_in)``."""
    rng = np.random.default_rng(seed)
    sizes = spec.layer_sizes
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        scale = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-0.5, 0.5, size=(fan_out, fan_in)) * scale)
        biases.append(rng.uniform(-0.5, 0.5, size=fan_out) * scale)
    return Network(spec, weights, biases, seed)


def _as_batch(net: Network, inputs) -> tuple[np.ndarray, bool]:
    X = np.asarray(inputs, dtype=float)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != net.spec.input_count:
        raise ShapeError(f"expected inputs with {net.spec.input_count} columns, got shape {np.shape(inputs)}")
    return X, single


def _targets(net: Network, targets, n: int) -> np.ndarray:
    T = np.asarray(targets, dtype=float)
    if T.ndim == 1:
        T = T.reshape(n, -1) if net.spec.output_count == 1 else T[None, :]
    if T.shape != (n, net.spec.output_count):
        raise ShapeError(f"targets shape {np.shape(targets)} does not match {n} samples x {net.spec.output_count} outputs")
    return T


def _activations(net: Network, X: np.ndarray) -> list[np.ndarray]:
    """Layer outputs ``[X, O_1, ..., Y]`` for a batch."""
    outs = [X]
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = outs[-1] @ w.T + b
        outs.append(z if i == last else np.tanh(z))
    return outs


def forward(net: Network, inputs) -> np.ndarray:
    """Network output for one input vector or a batch of rows."""
    X, single = _as_batch(net, inputs)
    y = _activations(net, X)[-1]
    return y[0] if single else y


def mse_loss(net: Network, inputs, targets) -> float:
    X, _ = _as_batch(net, inputs)
    T = _targets(net, targets, X.shape[0])
    e = _activations(net, X)[-1] - T
    return float(np.mean(e**2))


def gradient(net: Network, inputs, targets) -> np.ndarray:
    """Exact gradient of the batch MSE with respect to the flat parameters.

    The MSE averages over every sample and output.  The backward pass uses the
    tansig derivative ``1 - O**2`` for hidden units and 1 for the linear output.
    """
    X, _ = _as_batch(net, inputs)
    if X.shape[0] == 0:
        raise ShapeError("empty batch")
    T = _targets(net, targets, X.shape[0])
    outs = _activations(net, X)
    delta = 2.0 * (outs[-1] - T) / T.size
    grads = []
    for layer in range(len(net.weights) - 1, -1, -1):
        grads.append((delta.T @ outs[layer], delta.sum(axis=0)))
        if layer:
            delta = (delta @ net.weights[layer]) * (1.0 - outs[layer] ** 2)
    parts = []
    for gw, gb in reversed(grads):
        parts += [gw.ravel(), gb]
    return np.concatenate(parts)


def jacobian(net: Network, inputs, targets) -> tuple[np.ndarray, np.ndarray]:
    """Per-residual Jacobian for Gauss-Newton style training.

    Returns ``(J, e)`` where ``e = outputs - targets`` flattened sample-major
    and ``J[r, k] = d e_r / d theta_k``.  ``J.T @ e`` equals ``N/2`` times
    :func:`gradient`, with ``N = e.size``.
    """
    X, _ = _as_batch(net, inputs)
    if X.shape[0] == 0:
        raise ShapeError("empty batch")
    T = _targets(net, targets, X.shape[0])
    outs = _activations(net, X)
    n, n_out = T.shape
    J = np.empty((n, n_out, net.n_params))
    offsets = np.cumsum([0] + [w.size + b.size for w, b in zip(net.weights, net.biases)])
    for k in range(n_out):
        # delta[s, j]: derivative of output k of sample s w.r.t. pre-activation j
        delta = np.zeros((n, n_out))
        delta[:, k] = 1.0
        for layer in range(len(net.weights) - 1, -1, -1):
            a = outs[layer]
            start = offsets[layer]
            nw = net.weights[layer].size
            J[:, k, start: start + nw] = (delta[:, :, None] * a[:, None, :]).reshape(n, -1)
            J[:, k, start + nw: offsets[layer + 1]] = delta
            if layer:
                delta = (delta @ net.weights[layer]) * (1.0 - a**2)
    e = (outs[-1] - T).reshape(-1)
    return J.reshape(n * n_out, net.n_params), e


def predict(net: Network, rows, columns=None) -> np.ndarray:
    """Row-wise forward pass returning one value per row for single-output nets.

    ``rows`` is a 2-d array, or a frame-like mapping when ``columns`` names the
    inputs in training order.
    """
    if columns is not None:
        missing = [c for c in columns if c not in rows]
        if missing:
            raise KeyError(f"missing column(s): {missing}")
        X = np.column_stack([np.asarray(rows[c], dtype=float) for c in columns])
    else:
        X = np.asarray(rows, dtype=float)
        if X.ndim == 1:
            X = X[:, None] if net.spec.input_count == 1 else X[None, :]
    y = forward(net, X)
    return y[:, 0] if net.spec.output_count == 1 else y
