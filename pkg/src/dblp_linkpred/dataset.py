"""Labelled pair datasets: temporal split, pair sampling, assembly, k-fold."""

from __future__ import annotations

import csv
import math
import random
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import IO, Iterator, Sequence

import numpy as np

from .features import FEATURE_NAMES, UNREACHABLE, extract, parse_mask
from .graph import AuthorIndex, CoauthorGraph
from .ingest import Publication, filter_publications

CLASS_ATTRIBUTE = "class"


class SamplingWarning(UserWarning):
    pass


class LeakageWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SplitSpec:
    train_years: tuple[int, int] = (2012, 2016)
    test_years: tuple[int, int] = (2017, 2018)

    def __post_init__(self):
        for lo, hi in (self.train_years, self.test_years):
            if lo > hi:
                raise ValueError(f"empty year range {lo}:{hi}")
        a, b = sorted([self.train_years, self.test_years])
        if a[1] >= b[0]:
            raise ValueError(f"year ranges {self.train_years} and {self.test_years} overlap")


def temporal_split(
    pubs: Sequence[Publication], spec: SplitSpec
) -> tuple[list[Publication], list[Publication]]:
    return (
        filter_publications(pubs, *spec.train_years),
        filter_publications(pubs, *spec.test_years),
    )


@dataclass(frozen=True)
class DatasetMeta:
    relation: str = "linkpred"
    split: str = ""
    year_range: tuple[int, int] | None = None
    unreachable_sentinel: float | None = None
    seed: int | None = None
    neg_ratio: float | None = None
    exclude_direct_edge: bool | None = None
    papers_scope: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Instance:
    u: int | None
    v: int | None
    values: tuple[float, ...]
    label: int


@dataclass(frozen=True)
class Dataset:
    """Feature rows plus binary labels.

    Equality covers the schema, the rows and the labels only; author pairs
    and metadata do not survive an ARFF round trip.
    """

    schema: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]
    labels: tuple[int, ...]
    pairs: tuple[tuple[int, int], ...] | None = field(default=None, compare=False)
    meta: DatasetMeta = field(default_factory=DatasetMeta, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "schema", tuple(self.schema))
        object.__setattr__(self, "rows", tuple(tuple(float(x) for x in r) for r in self.rows))
        object.__setattr__(self, "labels", tuple(int(y) for y in self.labels))
        if not self.schema:
            raise ValueError("dataset schema has no features")
        if CLASS_ATTRIBUTE in self.schema or len(set(self.schema)) != len(self.schema):
            raise ValueError(f"invalid feature names {self.schema}")
        if len(self.rows) != len(self.labels):
            raise ValueError("rows and labels differ in length")
        for i, row in enumerate(self.rows):
            if len(row) != len(self.schema):
                raise ValueError(f"row {i} has {len(row)} values, schema has {len(self.schema)}")
            if not all(math.isfinite(x) for x in row):
                raise ValueError(f"row {i} has a non-finite value")
        if any(y not in (0, 1) for y in self.labels):
            raise ValueError("labels must be 0 or 1")
        if self.pairs is not None:
            pairs = tuple((min(u, v), max(u, v)) for u, v in self.pairs)
            if len(pairs) != len(self.rows):
                raise ValueError("pairs and rows differ in length")
            if len(set(pairs)) != len(pairs):
                raise ValueError("duplicate author pair in dataset")
            object.__setattr__(self, "pairs", pairs)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def X(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.float64).reshape(len(self.rows), len(self.schema))

    @property
    def y(self) -> np.ndarray:
        return np.array(self.labels, dtype=np.int64)

    def instances(self) -> Iterator[Instance]:
        for i, (row, label) in enumerate(zip(self.rows, self.labels)):
            u, v = self.pairs[i] if self.pairs is not None else (None, None)
            yield Instance(u, v, row, label)

    def subset(self, indices: Sequence[int]) -> Dataset:
        return Dataset(
            self.schema,
            tuple(self.rows[i] for i in indices),
            tuple(self.labels[i] for i in indices),
            tuple(self.pairs[i] for i in indices) if self.pairs is not None else None,
            self.meta,
        )

    def select(self, features: Sequence[str]) -> Dataset:
        """Project onto a subset of the feature columns."""
        cols = [self.schema.index(f) for f in features]
        return Dataset(
            tuple(features),
            tuple(tuple(r[c] for c in cols) for r in self.rows),
            self.labels,
            self.pairs,
            self.meta,
        )

    def class_counts(self) -> tuple[int, int]:
        ones = sum(self.labels)
        return len(self.labels) - ones, ones


def _non_edges_within(g: CoauthorGraph, max_dist: int) -> list[tuple[int, int]]:
    """All non-adjacent pairs ``u < v`` with ``2 <= d(u, v) <= max_dist``."""
    out = []
    for s in range(1, g.n + 1):
        depth = {s: 0}
        frontier = [s]
        for d in range(1, max_dist + 1):
            nxt = []
            for x in frontier:
                for y in g.adj[x - 1]:
                    if y not in depth:
                        depth[y] = d
                        nxt.append(y)
            frontier = nxt
        out.extend((s, t) for t, d in sorted(depth.items()) if t > s and d >= 2)
    return out


def sample_pairs(
    g: CoauthorGraph,
    ratio: float = 1.0,
    max_neg_distance: int | None = None,
    seed: int = 0,
) -> list[tuple[int, int, int]]:
    """Every edge as a positive plus ``ratio`` sampled non-edges per positive.

    Negatives are drawn uniformly among non-adjacent pairs (optionally only
    those within ``max_neg_distance`` hops). If fewer exist than requested a
    ``SamplingWarning`` is issued and all available ones are returned.
    """
    if not ratio > 0:
        raise ValueError(f"ratio must be positive, got {ratio}")
    if max_neg_distance is not None and max_neg_distance < 2:
        raise ValueError("max_neg_distance must be at least 2")
    positives = [(u, v, 1) for u, v in g.edges()]
    if not positives:
        raise ValueError("no positives: graph has no edges")
    requested = max(1, round(ratio * len(positives)))
    rng = random.Random(seed)

    if max_neg_distance is not None:
        candidates = _non_edges_within(g, max_neg_distance)
        available = len(candidates)
    else:
        candidates = None
        available = g.n * (g.n - 1) // 2 - g.n_edges
    k = min(requested, available)
    if k < requested:
        warnings.warn(
            f"requested {requested} negative pairs but only {available} exist",
            SamplingWarning,
            stacklevel=2,
        )

    if candidates is None and 2 * k > available:
        candidates = [
            (u, v) for u in range(1, g.n) for v in range(u + 1, g.n + 1) if not g.has_edge(u, v)
        ]
    if candidates is not None:
        negatives = rng.sample(candidates, k)
    else:
        seen: set[tuple[int, int]] = set()
        negatives = []
        while len(negatives) < k:
            u, v = rng.randint(1, g.n), rng.randint(1, g.n)
            if u == v:
                continue
            pair = (min(u, v), max(u, v))
            if pair in seen or pair in g.shared:
                continue
            seen.add(pair)
            negatives.append(pair)
    return positives + [(u, v, 0) for u, v in negatives]


def future_link_pairs(
    train_g: CoauthorGraph,
    train_index: AuthorIndex,
    test_g: CoauthorGraph,
    test_index: AuthorIndex,
    ratio: float = 1.0,
    seed: int = 0,
) -> list[tuple[int, int, int]]:
    """Experimental: pairs of authors present in both periods, in training ids.

    Positives are pairs that first co-author in the test period; negatives are
    sampled pairs not linked in either period.
    """
    common = [n for n in train_index.id_to_name if n in test_index]
    to_test = {train_index.id_of(n): test_index.id_of(n) for n in common}
    ids = sorted(to_test)
    positives = []
    for a, b in test_g.edges():
        name_a, name_b = test_index.name_of(a), test_index.name_of(b)
        if name_a in train_index and name_b in train_index:
            u, v = sorted((train_index.id_of(name_a), train_index.id_of(name_b)))
            if not train_g.has_edge(u, v):
                positives.append((u, v, 1))
    if not positives:
        raise ValueError("no positives: no new links among authors active in both periods")
    positives.sort()
    requested = max(1, round(ratio * len(positives)))
    rng = random.Random(seed)
    negatives: list[tuple[int, int, int]] = []
    seen = set()
    attempts = 0
    while len(negatives) < requested and attempts < 100 * requested and len(ids) > 1:
        attempts += 1
        u, v = sorted(rng.sample(ids, 2))
        if (u, v) in seen or train_g.has_edge(u, v) or test_g.has_edge(to_test[u], to_test[v]):
            continue
        seen.add((u, v))
        negatives.append((u, v, 0))
    if len(negatives) < requested:
        warnings.warn(
            f"found {len(negatives)} of {requested} requested negative pairs",
            SamplingWarning,
            stacklevel=2,
        )
    return positives + negatives


def leaky_features(d: Dataset) -> list[str]:
    """Features whose value alone determines the label on this dataset.

    Checks ``feature > 0 <=> label == 1`` and ``feature == 1 <=> label == 1``.
    """
    neg, pos = d.class_counts()
    if not neg or not pos:
        return []
    X, y = d.X, d.y.astype(bool)
    return [
        name
        for j, name in enumerate(d.schema)
        if np.array_equal(X[:, j] > 0, y) or np.array_equal(X[:, j] == 1, y)
    ]


def assemble(
    g: CoauthorGraph,
    pairs: Sequence[tuple[int, ...]],
    mask: Sequence[str] = FEATURE_NAMES,
    exclude_direct_edge: bool = False,
    *,
    drop_endpoints: bool = False,
    papers_scope: str = "total",
    labels: Sequence[int] | None = None,
    unreachable: float | None = None,
    meta: DatasetMeta | None = None,
) -> Dataset:
    """Compute features for ``pairs`` and label them by adjacency in ``g``.

    ``labels`` overrides adjacency labelling (used by the future-link mode).
    Unreachable distances are encoded as ``unreachable`` when given, else as
    one more than the longest finite distance among the pairs.
    """
    mask = parse_mask(mask)
    vectors = extract(
        g, pairs, mask, exclude_direct_edge, drop_endpoints=drop_endpoints, papers_scope=papers_scope
    )
    if labels is None:
        labels = [int(g.has_edge(p[0], p[1])) for p in pairs]
    elif len(labels) != len(pairs):
        raise ValueError("labels and pairs differ in length")

    if unreachable is None:
        finite = [
            fv.shortest_distance
            for fv in vectors
            if fv.shortest_distance is not None and fv.shortest_distance != UNREACHABLE
        ]
        unreachable = float(max(finite, default=0) + 1)
    meta = replace(
        meta or DatasetMeta(),
        unreachable_sentinel=unreachable,
        exclude_direct_edge=exclude_direct_edge,
        papers_scope=papers_scope,
    )
    d = Dataset(
        mask,
        tuple(fv.values(unreachable) for fv in vectors),
        tuple(labels),
        tuple((p[0], p[1]) for p in pairs),
        meta,
    )
    leaky = leaky_features(d)
    if leaky:
        warnings.warn(
            f"label leakage: {', '.join(leaky)} alone determines the class of every instance",
            LeakageWarning,
            stacklevel=2,
        )
    return d


def stratified_kfold(
    data: Dataset | Sequence[int], k: int = 10, seed: int = 0
) -> list[tuple[np.ndarray, np.ndarray]]:
    """``k`` (train, test) index splits preserving class proportions.

    Each class is shuffled, the classes are concatenated and position ``i``
    goes to fold ``i % k``.
    """
    labels = np.asarray(data.labels if isinstance(data, Dataset) else data, dtype=np.int64)
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    rng = np.random.default_rng(seed)
    order = []
    for c in (0, 1):
        members = np.flatnonzero(labels == c)
        if len(members) < k:
            raise ValueError(f"class {c} has {len(members)} instances, fewer than k={k}")
        order.append(rng.permutation(members))
    order = np.concatenate(order)
    fold_of = np.empty(len(labels), dtype=np.int64)
    fold_of[order] = np.arange(len(order)) % k
    all_idx = np.arange(len(labels))
    return [(all_idx[fold_of != f], all_idx[fold_of == f]) for f in range(k)]


def format_number(x: float) -> str:
    """Shortest decimal text that round-trips; integral values without ``.0``."""
    if float(x).is_integer() and abs(x) < 2**53:
        return str(int(x))
    return repr(float(x))


def write_csv(d: Dataset, fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow([*d.schema, CLASS_ATTRIBUTE])
    for row, label in zip(d.rows, d.labels):
        w.writerow([*(format_number(x) for x in row), label])
