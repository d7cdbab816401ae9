"""One-hidden-layer perceptron trained by per-instance backpropagation."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .base import Classifier, sigmoid


@numba.njit(cache=True)
def _sig(z):
    if z >= 0:
        return 1.0 / (1.0 + np.exp(-z))
    ez = np.exp(z)
    return ez / (1.0 + ez)


@numba.njit(cache=True)
def sample_loss(x, y, W1, b1, w2, b2, cross_entropy):
    H = W1.shape[0]
    a = b2
    for h in range(H):
        a += w2[h] * _sig(np.dot(W1[h], x) + b1[h])
    if cross_entropy:
        # log(1 + e^a) - y * a
        return max(a, 0.0) + np.log1p(np.exp(-abs(a))) - y * a
    o = _sig(a)
    return 0.5 * (o - y) ** 2


@numba.njit(cache=True)
def sample_grad(x, y, W1, b1, w2, b2, cross_entropy, gW1, gb1, gw2):
    """Write d(loss)/d(params) into gW1, gb1, gw2; return the output-bias gradient."""
    H, d = W1.shape
    hidden = np.empty(H)
    a = b2
    for h in range(H):
        hidden[h] = _sig(np.dot(W1[h], x) + b1[h])
        a += w2[h] * hidden[h]
    o = _sig(a)
    delta = (o - y) if cross_entropy else (o - y) * o * (1.0 - o)
    for h in range(H):
        gw2[h] = delta * hidden[h]
        dh = delta * w2[h] * hidden[h] * (1.0 - hidden[h])
        gb1[h] = dh
        for j in range(d):
            gW1[h, j] = dh * x[j]
    return delta


@numba.njit(cache=True)
def _sgd(X, y, order, W1, b1, w2, b2, lr, momentum, epochs, cross_entropy):
    # same gradient as sample_grad, fused with the momentum step; a nested
    # call per instance costs more than the arithmetic itself
    H, d = W1.shape
    hidden = np.empty(H)
    vW1 = np.zeros((H, d))
    vb1 = np.zeros(H)
    vw2 = np.zeros(H)
    vb2 = 0.0
    bias = b2[0]
    for _ in range(epochs):
        for i in order:
            a = bias
            for h in range(H):
                z = b1[h]
                for j in range(d):
                    z += W1[h, j] * X[i, j]
                hidden[h] = _sig(z)
                a += w2[h] * hidden[h]
            o = _sig(a)
            delta = (o - y[i]) if cross_entropy else (o - y[i]) * o * (1.0 - o)
            for h in range(H):
                dh = delta * w2[h] * hidden[h] * (1.0 - hidden[h])
                vw2[h] = momentum * vw2[h] - lr * delta * hidden[h]
                w2[h] += vw2[h]
                vb1[h] = momentum * vb1[h] - lr * dh
                b1[h] += vb1[h]
                for j in range(d):
                    vW1[h, j] = momentum * vW1[h, j] - lr * dh * X[i, j]
                    W1[h, j] += vW1[h, j]
            vb2 = momentum * vb2 - lr * delta
            bias += vb2
    b2[0] = bias


@dataclass(eq=False)
class Mlp(Classifier):
    """Sigmoid hidden layer feeding one sigmoid output unit."""

    kind = "mlp"

    W1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float

    @classmethod
    def init(cls, schema, n_features: int, hidden_units: int, seed: int) -> Mlp:
        """Weights drawn uniformly from [-0.5, 0.5]."""
        rng = np.random.default_rng(seed)
        W1 = rng.uniform(-0.5, 0.5, (hidden_units, n_features))
        b1 = rng.uniform(-0.5, 0.5, hidden_units)
        w2 = rng.uniform(-0.5, 0.5, hidden_units)
        b2 = float(rng.uniform(-0.5, 0.5))
        return cls(tuple(schema), W1, b1, w2, b2)

    @classmethod
    def fit(
        cls,
        schema,
        Z,
        y,
        hidden_units,
        learning_rate=0.3,
        momentum=0.2,
        epochs=500,
        loss="squared",
        seed=0,
    ) -> Mlp:
        net = cls.init(schema, Z.shape[1], hidden_units, seed)
        order = np.random.default_rng(seed + 1).permutation(len(y))
        b2 = np.array([net.b2])
        _sgd(
            np.ascontiguousarray(Z, dtype=np.float64),
            np.asarray(y, dtype=np.float64),
            order,
            net.W1,
            net.b1,
            net.w2,
            b2,
            float(learning_rate),
            float(momentum),
            int(epochs),
            loss == "cross_entropy",
        )
        net.b2 = float(b2[0])
        return net

    def scores(self, Z):
        Z = np.asarray(Z, dtype=np.float64)
        hidden = sigmoid(Z @ self.W1.T + self.b1)
        return sigmoid(hidden @ self.w2 + self.b2)

    def params(self):
        return {"W1": self.W1, "b1": self.b1, "w2": self.w2, "b2": np.array([self.b2])}

    @classmethod
    def from_params(cls, schema, params):
        w2 = np.asarray(params["w2"], dtype=np.float64).reshape(-1)
        return cls(
            tuple(schema),
            np.asarray(params["W1"], dtype=np.float64).reshape(len(w2), -1),
            np.asarray(params["b1"], dtype=np.float64).reshape(-1),
            w2,
            float(np.asarray(params["b2"]).reshape(-1)[0]),
        )
