from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar, Mapping

import numpy as np

KINDS = ("decision_tree", "naive_bayes", "logistic_regression", "mlp", "linear_svm")
ALIASES = {
    "j48": "decision_tree",
    "tree": "decision_tree",
    "nb": "naive_bayes",
    "logreg": "logistic_regression",
    "mlp": "mlp",
    "svm": "linear_svm",
}
DISPLAY_NAMES = {
    "decision_tree": "J48",
    "linear_svm": "SVM",
    "mlp": "MLP",
    "logistic_regression": "Log-Reg",
    "naive_bayes": "Naive Bayes",
}

DEFAULTS: dict[str, dict] = {
    "decision_tree": {"min_leaf": 2},
    "naive_bayes": {"variance_floor": 1e-6},
    "logistic_regression": {
        "l2": 1e-8,
        "learning_rate": 0.1,
        "max_epochs": 10000,
        "tol": 1e-10,
    },
    "mlp": {
        "hidden_units": None,
        "learning_rate": 0.3,
        "momentum": 0.2,
        "epochs": 500,
        "loss": "squared",
    },
    "linear_svm": {"C": 1.0, "epochs": 1000},
}


class ModelError(ValueError):
    pass


def resolve_kind(name: str) -> str:
    kind = ALIASES.get(name, name)
    if kind not in KINDS:
        raise ModelError(f"unknown model kind {name!r}")
    return kind


@dataclass(frozen=True)
class ModelSpec:
    """Model kind, hyperparameter overrides and seed."""

    kind: str
    params: Mapping = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", resolve_kind(self.kind))
        unknown = set(self.params) - set(DEFAULTS[self.kind])
        if unknown:
            raise ModelError(f"unknown hyperparameters for {self.kind}: {sorted(unknown)}")
        _validate(self.kind, self.hyperparameters(n_features=1))

    def hyperparameters(self, n_features: int) -> dict:
        hp = {**DEFAULTS[self.kind], **self.params}
        if self.kind == "mlp" and hp["hidden_units"] is None:
            hp["hidden_units"] = math.ceil((n_features + 2) / 2)
        return hp


def _validate(kind: str, hp: dict) -> None:
    def positive(name, integer=False):
        x = hp[name]
        if integer and not (isinstance(x, int) and not isinstance(x, bool)):
            raise ModelError(f"{name} must be an integer, got {x!r}")
        if not x > 0:
            raise ModelError(f"{name} must be positive, got {x!r}")

    if kind == "decision_tree":
        positive("min_leaf", integer=True)
    elif kind == "naive_bayes":
        positive("variance_floor")
    elif kind == "logistic_regression":
        positive("learning_rate")
        positive("max_epochs", integer=True)
        if hp["l2"] < 0 or hp["tol"] < 0:
            raise ModelError("l2 and tol must be non-negative")
    elif kind == "mlp":
        positive("learning_rate")
        positive("epochs", integer=True)
        positive("hidden_units", integer=True)
        if not 0 <= hp["momentum"] < 1:
            raise ModelError(f"momentum must be in [0, 1), got {hp['momentum']}")
        if hp["loss"] not in ("squared", "cross_entropy"):
            raise ModelError(f"loss must be squared or cross_entropy, got {hp['loss']!r}")
    elif kind == "linear_svm":
        positive("C")
        positive("epochs", integer=True)


@dataclass(frozen=True)
class Normalizer:
    """Per-feature min-max scaling to [0, 1]; constant features map to 0."""

    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> Normalizer:
        X = np.asarray(X, dtype=np.float64)
        return cls(X.min(axis=0), X.max(axis=0))

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        span = self.hi - self.lo
        safe = np.where(span > 0, span, 1.0)
        return np.where(span > 0, (X - self.lo) / safe, 0.0)

    def __eq__(self, other):
        if not isinstance(other, Normalizer):
            return NotImplemented
        return np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)

    __hash__ = None


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def check_matrix(X, n_features: int | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ModelError(f"expected a 2-D feature matrix, got shape {X.shape}")
    if n_features is not None and X.shape[1] != n_features:
        raise ModelError(f"expected {n_features} features, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise ModelError("non-finite feature value")
    return X


@dataclass(eq=False)
class Classifier:
    """Common surface of the five trained model kinds."""

    kind: ClassVar[str]
    uses_normalizer: ClassVar[bool] = True

    schema: tuple[str, ...]

    def scores(self, Z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> dict[str, np.ndarray]:
        raise NotImplementedError

    @classmethod
    def from_params(cls, schema, params: dict[str, np.ndarray]):
        raise NotImplementedError

    def __eq__(self, other):
        if type(other) is not type(self) or other.schema != self.schema:
            return False
        a, b = self.params(), other.params()
        return a.keys() == b.keys() and all(np.array_equal(a[k], b[k]) for k in a)

    __hash__ = None
