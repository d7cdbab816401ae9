"""Logistic regression and a linear SVM with calibrated scores."""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .base import Classifier, sigmoid


def logistic_loss_and_grad(w, b, X, y, l2):
    """Mean negative log-likelihood plus ``l2/2 * |w|^2`` and its gradient."""
    z = X @ w + b
    loss = np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * (w @ w)
    r = sigmoid(z) - y
    return loss, X.T @ r / len(y) + l2 * w, r.mean()


def compress_rows(X, y):
    """Distinct rows of ``X`` with their per-row counts of label 0 and label 1.

    Both objectives below are sums over instances, so evaluating them on the
    distinct rows weighted by these counts is exact and much cheaper when
    features take few values.
    """
    U, inverse = np.unique(np.asarray(X, dtype=np.float64), axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    y = np.asarray(y)
    pos = np.bincount(inverse, weights=(y == 1), minlength=len(U))
    neg = np.bincount(inverse, weights=(y != 1), minlength=len(U))
    return U, neg, pos


def weighted_logistic_loss_and_grad(w, b, U, neg, pos, l2):
    """``logistic_loss_and_grad`` evaluated on compressed rows."""
    n = neg.sum() + pos.sum()
    z = U @ w + b
    loss = np.sum((neg + pos) * np.logaddexp(0.0, z) - pos * z) / n + 0.5 * l2 * (w @ w)
    r = (neg + pos) * sigmoid(z) - pos
    return loss, U.T @ r / n + l2 * w, r.sum() / n


@numba.njit(cache=True)
def _logistic_descent(U, neg, pos, l2, lr, max_epochs, tol):
    # compiled twin of the loop in fit_logistic_reference
    m, d = U.shape
    n = neg.sum() + pos.sum()
    w = np.zeros(d)
    b = 0.0
    gw = np.empty(d)

    def loss_grad(w, b):
        loss = 0.0
        gb = 0.0
        gw[:] = 0.0
        for i in range(m):
            z = b
            for j in range(d):
                z += U[i, j] * w[j]
            cnt = neg[i] + pos[i]
            loss += cnt * (max(z, 0.0) + np.log1p(np.exp(-abs(z)))) - pos[i] * z
            p = 1.0 / (1.0 + np.exp(-z)) if z >= 0 else np.exp(z) / (1.0 + np.exp(z))
            r = cnt * p - pos[i]
            gb += r
            for j in range(d):
                gw[j] += r * U[i, j]
        reg = 0.0
        for j in range(d):
            reg += w[j] * w[j]
            gw[j] = gw[j] / n + l2 * w[j]
        return loss / n + 0.5 * l2 * reg, gb / n

    prev, gb = loss_grad(w, b)
    for epoch in range(1, max_epochs + 1):
        for j in range(d):
            w[j] -= lr * gw[j]
        b -= lr * gb
        loss, gb = loss_grad(w, b)
        if prev - loss < tol:
            return w, b, epoch
        prev = loss
    return w, b, max_epochs


def fit_logistic(X, y, l2=1e-8, learning_rate=0.1, max_epochs=10000, tol=1e-10):
    """Full-batch gradient descent; returns ``(w, b, epochs_run)``.

    Stops after ``max_epochs`` or once an epoch improves the loss by less
    than ``tol``.
    """
    U, neg, pos = compress_rows(X, y)
    w, b, epochs = _logistic_descent(
        np.ascontiguousarray(U), neg, pos, float(l2), float(learning_rate), int(max_epochs), float(tol)
    )
    return w, float(b), int(epochs)


def fit_logistic_reference(X, y, l2=1e-8, learning_rate=0.1, max_epochs=10000, tol=1e-10):
    """The same descent in plain numpy, kept as a check on the compiled loop."""
    U, neg, pos = compress_rows(X, y)
    w = np.zeros(U.shape[1])
    b = 0.0
    prev, gw, gb = weighted_logistic_loss_and_grad(w, b, U, neg, pos, l2)
    for epoch in range(1, max_epochs + 1):
        w = w - learning_rate * gw
        b = b - learning_rate * gb
        loss, gw, gb = weighted_logistic_loss_and_grad(w, b, U, neg, pos, l2)
        if prev - loss < tol:
            return w, b, epoch
        prev = loss
    return w, b, max_epochs


@dataclass(eq=False)
class LogisticRegression(Classifier):
    kind = "logistic_regression"

    weights: np.ndarray
    bias: float

    @classmethod
    def fit(cls, schema, Z, y, l2=1e-8, learning_rate=0.1, max_epochs=10000, tol=1e-10):
        w, b, _ = fit_logistic(Z, y, l2, learning_rate, max_epochs, tol)
        return cls(tuple(schema), w, float(b))

    def scores(self, Z):
        return sigmoid(np.asarray(Z) @ self.weights + self.bias)

    def params(self):
        return {"weights": self.weights, "bias": np.array([self.bias])}

    @classmethod
    def from_params(cls, schema, params):
        return cls(
            tuple(schema),
            np.asarray(params["weights"], dtype=np.float64),
            float(np.asarray(params["bias"]).reshape(-1)[0]),
        )


def svm_objective(w, b, X, s, lam):
    """``lam/2 * (|w|^2 + b^2) + mean(max(0, 1 - s * (Xw + b)))`` for s in {-1, 1}."""
    hinge = np.maximum(0.0, 1.0 - s * (X @ w + b))
    return 0.5 * lam * (w @ w + b * b) + hinge.mean()


def _weighted_svm_objective(theta, Ua, neg, pos, lam):
    z = Ua @ theta
    hinge = pos @ np.maximum(0.0, 1.0 - z) + neg @ np.maximum(0.0, 1.0 + z)
    return 0.5 * lam * (theta @ theta) + hinge / (neg.sum() + pos.sum())


def fit_pegasos(X, s, lam, epochs):
    """Deterministic full-batch Pegasos sub-gradient descent.

    The bias is treated as a weight on a constant input. Step ``t`` uses the
    learning rate ``1 / (lam * t)`` followed by projection onto the ball of
    radius ``1 / sqrt(lam)``. The running average of the iterates is the
    candidate solution; the best candidate seen so far is kept, so the
    returned per-epoch objective history never increases.
    """
    U, neg, pos = compress_rows(X, s)
    Ua = np.hstack([U, np.ones((len(U), 1))])
    n = len(s)
    theta = np.zeros(Ua.shape[1])
    avg = np.zeros_like(theta)
    best, best_obj = avg.copy(), _weighted_svm_objective(avg, Ua, neg, pos, lam)
    radius = 1.0 / np.sqrt(lam)
    history = []
    for t in range(1, epochs + 1):
        z = Ua @ theta
        # sub-gradient of the hinge terms: -s * x for every violated instance
        coef = pos * (z < 1.0) - neg * (z > -1.0)
        grad = lam * theta - (coef @ Ua) / n
        theta = theta - grad / (lam * t)
        norm = np.linalg.norm(theta)
        if norm > radius:
            theta *= radius / norm
        avg += (theta - avg) / t
        obj = _weighted_svm_objective(avg, Ua, neg, pos, lam)
        if obj <= best_obj:
            best, best_obj = avg.copy(), obj
        history.append(best_obj)
    return best[:-1].copy(), float(best[-1]), history


@dataclass(eq=False)
class LinearSvm(Classifier):
    """Hinge-loss linear classifier; scores are ``sigmoid(a * margin + b)``."""

    kind = "linear_svm"

    weights: np.ndarray
    bias: float
    calibration: tuple[float, float]
    objective_history: list = field(default_factory=list, repr=False)

    @classmethod
    def fit(cls, schema, Z, y, C=1.0, epochs=1000):
        y = np.asarray(y)
        s = np.where(y == 1, 1.0, -1.0)
        lam = 1.0 / (C * len(y))
        w, b, history = fit_pegasos(Z, s, lam, epochs)
        margins = (Z @ w + b).reshape(-1, 1)
        # calibration runs the logistic-regression procedure on min-max scaled margins
        lo, hi = float(margins.min()), float(margins.max())
        span = hi - lo if hi > lo else 1.0
        a_s, b_s, _ = fit_logistic((margins - lo) / span, y)
        a = float(a_s[0]) / span
        return cls(tuple(schema), w, b, (a, float(b_s) - a * lo), history)

    def margins(self, Z):
        return np.asarray(Z) @ self.weights + self.bias

    def scores(self, Z):
        a, b = self.calibration
        return sigmoid(a * self.margins(Z) + b)

    def params(self):
        return {
            "weights": self.weights,
            "bias": np.array([self.bias]),
            "calibration": np.array(self.calibration),
        }

    @classmethod
    def from_params(cls, schema, params):
        cal = np.asarray(params["calibration"], dtype=np.float64).reshape(-1)
        return cls(
            tuple(schema),
            np.asarray(params["weights"], dtype=np.float64),
            float(np.asarray(params["bias"]).reshape(-1)[0]),
            (float(cal[0]), float(cal[1])),
        )
