"""Classification metrics, ROC/AUC and the cross-validation protocol."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .classifiers import DISPLAY_NAMES, ModelSpec, predict_scores, train
from .dataset import Dataset, stratified_kfold


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other: ConfusionCounts) -> ConfusionCounts:
        return ConfusionCounts(
            self.tp + other.tp, self.tn + other.tn, self.fp + other.fp, self.fn + other.fn
        )

    def to_dict(self) -> dict:
        return {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn}


def confusion(predictions: Sequence[int], labels: Sequence[int]) -> ConfusionCounts:
    p = np.asarray(predictions)
    t = np.asarray(labels)
    if p.shape != t.shape or p.ndim != 1:
        raise ValueError(f"predictions and labels differ in shape: {p.shape} vs {t.shape}")
    if len(p) == 0:
        raise ValueError("nothing to evaluate")
    return ConfusionCounts(
        tp=int(np.sum((p == 1) & (t == 1))),
        tn=int(np.sum((p == 0) & (t == 0))),
        fp=int(np.sum((p == 1) & (t == 0))),
        fn=int(np.sum((p == 0) & (t == 1))),
    )


def accuracy(c: ConfusionCounts) -> float:
    if c.total == 0:
        raise ValueError("accuracy of empty confusion counts")
    return (c.tp + c.tn) / c.total


def precision(c: ConfusionCounts) -> float:
    """``tp / (tp + fp)``; 0 when nothing was predicted positive."""
    return c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0


def recall(c: ConfusionCounts) -> float:
    return c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0


def specificity(c: ConfusionCounts) -> float:
    return c.tn / (c.tn + c.fp) if c.tn + c.fp else 0.0


def f_measure(c: ConfusionCounts) -> float:
    """Harmonic mean of precision and recall; 0 when either is 0."""
    p, r = precision(c), recall(c)
    if p == 0 or r == 0:
        return 0.0
    return 2 / (1 / r + 1 / p)


def degeneracy_flags(c: ConfusionCounts) -> list[str]:
    flags = []
    if c.tp + c.fp == 0:
        flags.append("precision_undefined")
    if c.tp + c.fn == 0:
        flags.append("recall_undefined")
    if precision(c) == 0 or recall(c) == 0:
        flags.append("f_measure_undefined")
    return flags


@dataclass(frozen=True)
class RocCurve:
    """ROC vertices from (0, 0) to (1, 1), one per distinct score.

    ``thresholds[i]`` is the lowest score predicted positive at vertex ``i``
    (``inf`` for the origin).
    """

    fpr: tuple[float, ...]
    tpr: tuple[float, ...]
    thresholds: tuple[float, ...]

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr, self.tpr))


def roc_and_auc(scores: Sequence[float], labels: Sequence[int]) -> tuple[RocCurve, float]:
    """ROC curve over descending distinct scores and its trapezoidal area.

    Tied scores form a single vertex, so the area equals the probability that
    a random positive outranks a random negative with ties counted as half.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels differ in shape")
    P = int(np.sum(y == 1))
    N = int(np.sum(y == 0))
    if P == 0 or N == 0:
        raise ValueError("ROC needs both classes")
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    last = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tp = np.r_[0, np.cumsum(y == 1)[last]]
    fp = np.r_[0, np.cumsum(y == 0)[last]]
    auc = float(np.sum(np.diff(fp) * (tp[1:] + tp[:-1])) / (2.0 * P * N))
    curve = RocCurve(
        tuple((fp / N).tolist()),
        tuple((tp / P).tolist()),
        (float("inf"), *s[last].tolist()),
    )
    return curve, auc


@dataclass
class ModelResult:
    """Metrics of one model on one feature set, from pooled predictions."""

    model: str
    features: tuple[str, ...]
    mode: str
    counts: ConfusionCounts
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float | None
    roc: RocCurve | None = field(default=None, repr=False)
    flags: list[str] = field(default_factory=list)
    fold_counts: list[ConfusionCounts] = field(default_factory=list, repr=False)

    @classmethod
    def from_predictions(cls, model, features, mode, scores, labels, fold_counts=()):
        scores = np.asarray(scores, dtype=np.float64)
        labels = np.asarray(labels)
        c = confusion((scores >= 0.5).astype(int), labels)
        flags = degeneracy_flags(c)
        try:
            roc, auc = roc_and_auc(scores, labels)
        except ValueError:
            roc, auc = None, None
            flags.append("auc_undefined")
        return cls(
            model,
            tuple(features),
            mode,
            c,
            accuracy(c),
            precision(c),
            recall(c),
            f_measure(c),
            auc,
            roc,
            flags,
            list(fold_counts),
        )

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "features": list(self.features),
            "mode": self.mode,
            **self.counts.to_dict(),
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "auc": self.auc,
            "flags": list(self.flags),
        }


@dataclass
class EvalReport:
    results: list[ModelResult]
    protocol: dict = field(default_factory=dict)

    def extend(self, other: EvalReport) -> None:
        self.results.extend(other.results)

    def to_dict(self) -> dict:
        return {"protocol": self.protocol, "results": [r.to_dict() for r in self.results]}


def cross_validate(d: Dataset, spec: ModelSpec, k: int = 10, seed: int = 0) -> EvalReport:
    """k-fold CV pooling confusion counts and (score, label) pairs over folds."""
    folds = stratified_kfold(d, k, seed)
    y = d.y
    scores = np.empty(len(d))
    fold_counts = []
    X = d.X
    for train_idx, test_idx in folds:
        model, norm = train(d.subset(train_idx), spec)
        s = predict_scores(model, norm, X[test_idx])
        scores[test_idx] = s
        fold_counts.append(confusion((s >= 0.5).astype(int), y[test_idx]))
    result = ModelResult.from_predictions(spec.kind, d.schema, "cv", scores, y, fold_counts)
    return EvalReport(
        [result],
        {"mode": "cv", "k": k, "fold_seed": seed, "model_seed": spec.seed, "dataset": d.meta.to_dict()},
    )


def evaluate_holdout(train_d: Dataset, test_d: Dataset, spec: ModelSpec) -> EvalReport:
    if train_d.schema != test_d.schema:
        raise ValueError(f"schema mismatch: {train_d.schema} vs {test_d.schema}")
    model, norm = train(train_d, spec)
    scores = predict_scores(model, norm, test_d.X)
    result = ModelResult.from_predictions(spec.kind, train_d.schema, "holdout", scores, test_d.y)
    return EvalReport(
        [result],
        {
            "mode": "holdout",
            "model_seed": spec.seed,
            "train": train_d.meta.to_dict(),
            "test": test_d.meta.to_dict(),
        },
    )


def format_table(results: Sequence[ModelResult], title: str = "") -> str:
    """Aligned text table: Model | Accuracy(%) | AUC | F-Measure."""
    header = ("Model", "Accuracy(%)", "AUC", "F-Measure")
    rows = [
        (
            DISPLAY_NAMES.get(r.model, r.model),
            f"{100 * r.accuracy:.2f}",
            "n/a" if r.auc is None else f"{r.auc:.3f}",
            f"{r.f1:.3f}",
        )
        for r in results
    ]
    widths = [max(len(x) for x in col) for col in zip(header, *rows)]

    def line(cells):
        return " | ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()

    out = [title] if title else []
    out += [line(header), "-+-".join("-" * w for w in widths)]
    out += [line(r) for r in rows]
    return "\n".join(out) + "\n"


CSV_FIELDS = (
    "table", "model", "features", "mode", "tp", "tn", "fp", "fn",
    "accuracy", "precision", "recall", "f1", "auc", "flags",
)


def results_csv(tables: Sequence[tuple[str, Sequence[ModelResult]]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for name, results in tables:
        for r in results:
            d = r.to_dict()
            w.writerow(
                [name, r.model, "+".join(r.features), r.mode, d["tp"], d["tn"], d["fp"], d["fn"]]
                + [repr(d[k]) if d[k] is not None else "" for k in ("accuracy", "precision", "recall", "f1", "auc")]
                + [";".join(r.flags)]
            )
    return buf.getvalue()


def roc_csv(curve: RocCurve) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("threshold", "fpr", "tpr"))
    for t, f, p in zip(curve.thresholds, curve.fpr, curve.tpr):
        w.writerow((repr(t), repr(f), repr(p)))
    return buf.getvalue()


def results_json(tables: Sequence[tuple[str, Sequence[ModelResult]]], protocol: dict) -> str:
    doc = {
        "protocol": protocol,
        "tables": [{"name": n, "results": [r.to_dict() for r in rs]} for n, rs in tables],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
