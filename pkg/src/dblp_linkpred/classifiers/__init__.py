"""The five supervised learners: training, scoring and persistence."""

from __future__ import annotations

import json
from typing import IO, Sequence

import numpy as np

from ..dataset import Dataset
from .base import (
    ALIASES,
    DEFAULTS,
    DISPLAY_NAMES,
    KINDS,
    Classifier,
    ModelError,
    ModelSpec,
    Normalizer,
    check_matrix,
    resolve_kind,
    sigmoid,
)
from .bayes import GaussianNB
from .linear import LinearSvm, LogisticRegression
from .mlp import Mlp
from .tree import DecisionTree

MODEL_CLASSES: dict[str, type[Classifier]] = {
    cls.kind: cls for cls in (DecisionTree, GaussianNB, LogisticRegression, Mlp, LinearSvm)
}
FORMAT_TAG = "dblp-linkpred-model"
FORMAT_VERSION = 1

__all__ = [
    "ALIASES",
    "DEFAULTS",
    "DISPLAY_NAMES",
    "KINDS",
    "Classifier",
    "DecisionTree",
    "GaussianNB",
    "LinearSvm",
    "LogisticRegression",
    "Mlp",
    "ModelError",
    "ModelSpec",
    "Normalizer",
    "load_model",
    "predict_class",
    "predict_score",
    "predict_scores",
    "resolve_kind",
    "save_model",
    "sigmoid",
    "train",
]


def train(d: Dataset, spec: ModelSpec) -> tuple[Classifier, Normalizer]:
    if len(d) == 0:
        raise ModelError("cannot train on an empty dataset")
    X = check_matrix(d.X, len(d.schema))
    y = d.y
    neg, pos = d.class_counts()
    if (not neg or not pos) and spec.kind not in ("naive_bayes", "decision_tree"):
        raise ModelError(f"{spec.kind} needs both classes in the training data")
    hp = spec.hyperparameters(X.shape[1])
    normalizer = Normalizer.fit(X)
    cls = MODEL_CLASSES[spec.kind]
    Z = normalizer.transform(X) if cls.uses_normalizer else X
    if spec.kind == "mlp":
        model = Mlp.fit(d.schema, Z, y, seed=spec.seed, **hp)
    else:
        model = cls.fit(d.schema, Z, y, **hp)
    return model, normalizer


def predict_scores(m: Classifier, n: Normalizer, X) -> np.ndarray:
    """Class-1 scores in [0, 1] for each row of ``X``."""
    X = check_matrix(X, len(m.schema))
    Z = n.transform(X) if m.uses_normalizer else X
    return m.scores(Z)


def predict_score(m: Classifier, n: Normalizer, x: Sequence[float]) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ModelError("predict_score takes a single feature vector")
    return float(predict_scores(m, n, x[None, :])[0])


def predict_class(m: Classifier, n: Normalizer, x: Sequence[float], threshold: float = 0.5) -> int:
    return int(predict_score(m, n, x) >= threshold)


def _fmt(values) -> str:
    return " ".join(format(float(v), ".17g") for v in np.asarray(values).reshape(-1))


def save_model(m: Classifier, n: Normalizer, fh: IO[str], spec: ModelSpec | None = None) -> None:
    """Write a self-describing text model file."""
    fh.write(f"{FORMAT_TAG} {FORMAT_VERSION}\n")
    fh.write(f"kind {m.kind}\n")
    fh.write(f"schema {' '.join(m.schema)}\n")
    if spec is not None:
        hp = spec.hyperparameters(len(m.schema))
        fh.write(f"hyperparameters {json.dumps(hp, sort_keys=True)}\n")
        fh.write(f"seed {spec.seed}\n")
    fh.write(f"normalizer.min {_fmt(n.lo)}\n")
    fh.write(f"normalizer.max {_fmt(n.hi)}\n")
    for name, arr in m.params().items():
        arr = np.asarray(arr)
        shape = "x".join(str(s) for s in arr.shape) or "scalar"
        fh.write(f"param {name} {shape} {_fmt(arr)}".rstrip() + "\n")
    fh.write("end\n")


def load_model(fh: IO[str]) -> tuple[Classifier, Normalizer]:
    header = fh.readline().split()
    if header != [FORMAT_TAG, str(FORMAT_VERSION)]:
        raise ModelError(f"not a version {FORMAT_VERSION} model file: {' '.join(header)!r}")
    kind = schema = None
    lo = hi = None
    params: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(fh, 2):
        line = line.rstrip("\n")
        key, _, rest = line.partition(" ")
        if key == "end":
            break
        try:
            if key == "kind":
                kind = resolve_kind(rest)
            elif key == "schema":
                schema = tuple(rest.split())
            elif key == "normalizer.min":
                lo = np.array([float(v) for v in rest.split()])
            elif key == "normalizer.max":
                hi = np.array([float(v) for v in rest.split()])
            elif key == "param":
                name, shape, *vals = rest.split()
                arr = np.array([float(v) for v in vals])
                if shape != "scalar":
                    arr = arr.reshape([int(s) for s in shape.split("x")])
                params[name] = arr
            elif key in ("hyperparameters", "seed"):
                pass
            else:
                raise ModelError(f"unknown entry {key!r}")
        except ValueError as exc:
            raise ModelError(f"line {lineno}: {exc}") from None
    else:
        raise ModelError("model file has no end marker")
    if kind is None or schema is None or lo is None or hi is None:
        raise ModelError("model file is missing kind, schema or normalizer")
    return MODEL_CLASSES[kind].from_params(schema, params), Normalizer(lo, hi)
