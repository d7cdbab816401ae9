"""Binary decision tree grown by information gain on numeric features."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import Classifier


def entropy(n0: np.ndarray | float, n1: np.ndarray | float) -> np.ndarray:
    n0 = np.asarray(n0, dtype=np.float64)
    n1 = np.asarray(n1, dtype=np.float64)
    total = n0 + n1
    out = np.zeros(np.broadcast(n0, n1).shape)
    for part in (n0, n1):
        p = np.divide(part, total, out=np.zeros_like(out), where=total > 0)
        out -= np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return out


def best_split(x: np.ndarray, y: np.ndarray, min_leaf: int) -> tuple[float, float] | None:
    """Highest-gain threshold on one feature as ``(gain, threshold)``.

    Thresholds are midpoints between adjacent distinct values; both sides
    must hold ``min_leaf`` instances. Ties go to the lowest threshold.
    """
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    n = len(xs)
    ones = np.cumsum(ys)
    left_n = np.arange(1, n)
    left1 = ones[:-1]
    left0 = left_n - left1
    right1 = ones[-1] - left1
    right0 = (n - left_n) - right1
    valid = (xs[1:] > xs[:-1]) & (left_n >= min_leaf) & (n - left_n >= min_leaf)
    if not valid.any():
        return None
    parent = entropy(n - ones[-1], ones[-1])
    children = (left_n * entropy(left0, left1) + (n - left_n) * entropy(right0, right1)) / n
    gain = np.where(valid, parent - children, -np.inf)
    i = int(np.flatnonzero(gain >= gain.max() - 1e-12)[0])
    return float(gain[i]), float((xs[i] + xs[i + 1]) / 2)


@dataclass(eq=False)
class DecisionTree(Classifier):
    """Nodes stored as parallel arrays; leaves have ``feature == -1``.

    ``x[feature] <= threshold`` routes left. ``counts[i]`` holds the
    (negative, positive) training instances that reached node ``i``.
    """

    kind = "decision_tree"
    uses_normalizer = False

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray

    @classmethod
    def fit(cls, schema, X: np.ndarray, y: np.ndarray, min_leaf: int = 2) -> DecisionTree:
        feature, threshold, left, right, counts = [], [], [], [], []

        def new_node(idx):
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            ones = int(y[idx].sum())
            counts.append((len(idx) - ones, ones))
            return len(feature) - 1

        stack = [(new_node(np.arange(len(y))), np.arange(len(y)))]
        while stack:
            node, idx = stack.pop()
            n0, n1 = counts[node]
            if n0 == 0 or n1 == 0 or len(idx) < 2 * min_leaf:
                continue
            best = None
            for j in range(X.shape[1]):
                cand = best_split(X[idx, j], y[idx], min_leaf)
                if cand is not None and cand[0] > 1e-12 and (best is None or cand[0] > best[0] + 1e-12):
                    best = (cand[0], j, cand[1])
            if best is None:
                continue
            _, j, thr = best
            go_left = X[idx, j] <= thr
            feature[node], threshold[node] = j, thr
            left[node] = new_node(idx[go_left])
            right[node] = new_node(idx[~go_left])
            # right pushed first so the left subtree is expanded first
            stack.append((right[node], idx[~go_left]))
            stack.append((left[node], idx[go_left]))

        return cls(
            tuple(schema),
            np.array(feature, dtype=np.int64),
            np.array(threshold, dtype=np.float64),
            np.array(left, dtype=np.int64),
            np.array(right, dtype=np.int64),
            np.array(counts, dtype=np.int64).reshape(-1, 2),
        )

    def leaf_of(self, x: np.ndarray) -> int:
        node = 0
        while self.feature[node] >= 0:
            node = self.left[node] if x[self.feature[node]] <= self.threshold[node] else self.right[node]
        return int(node)

    def scores(self, Z: np.ndarray) -> np.ndarray:
        out = np.empty(len(Z))
        for i, x in enumerate(Z):
            n0, n1 = self.counts[self.leaf_of(x)]
            out[i] = (n1 + 1) / (n0 + n1 + 2)
        return out

    def features_used(self) -> set[int]:
        return {int(f) for f in self.feature if f >= 0}

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature < 0))

    def describe(self) -> str:
        """Indented text rendering of the tree."""

        def walk(node, depth):
            pad = "|   " * depth
            if self.feature[node] < 0:
                n0, n1 = self.counts[node]
                return [f"{pad}class {int(n1 > n0)} ({n0}/{n1})"]
            name = self.schema[self.feature[node]]
            thr = self.threshold[node]
            return (
                [f"{pad}{name} <= {thr:g}"]
                + walk(self.left[node], depth + 1)
                + [f"{pad}{name} > {thr:g}"]
                + walk(self.right[node], depth + 1)
            )

        return "\n".join(walk(0, 0))

    def params(self):
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left,
            "right": self.right,
            "counts": self.counts,
        }

    @classmethod
    def from_params(cls, schema, params):
        ints = {k: np.asarray(params[k]).astype(np.int64) for k in ("feature", "left", "right", "counts")}
        return cls(
            tuple(schema),
            ints["feature"],
            np.asarray(params["threshold"], dtype=np.float64),
            ints["left"],
            ints["right"],
            ints["counts"].reshape(-1, 2),
        )
