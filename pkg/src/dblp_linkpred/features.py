"""Per-pair link-prediction features on a co-authorship graph.

Three features are available: the hop distance between the two authors
(topological), the size of the union of their neighbourhoods and the sum of
their publication counts (both aggregated).
"""

from __future__ import annotations

import heapq
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .graph import CoauthorGraph

UNREACHABLE = math.inf

FEATURE_NAMES = ("shortest_distance", "sum_of_neighbors", "sum_of_papers")
SHORT_NAMES = {
    "dist": "shortest_distance",
    "neighbors": "sum_of_neighbors",
    "papers": "sum_of_papers",
}
PAPERS_SCOPES = ("total", "joint")


class FeatureError(ValueError):
    """A feature could not be computed for a specific pair."""

    def __init__(self, pair, message):
        super().__init__(f"pair {pair}: {message}")
        self.pair = pair


def parse_mask(features: str | Iterable[str]) -> tuple[str, ...]:
    """Canonical feature mask from names or CLI short names (``dist,neighbors``)."""
    if isinstance(features, str):
        features = [f for f in features.split(",") if f.strip()]
    chosen = set()
    for f in features:
        f = f.strip()
        name = SHORT_NAMES.get(f, f)
        if name not in FEATURE_NAMES:
            raise ValueError(f"unknown feature {f!r}; expected one of {sorted(SHORT_NAMES)}")
        chosen.add(name)
    if not chosen:
        raise ValueError("feature mask is empty")
    return tuple(n for n in FEATURE_NAMES if n in chosen)


def short_mask(mask: Sequence[str]) -> str:
    inverse = {v: k for k, v in SHORT_NAMES.items()}
    return ",".join(inverse[m] for m in mask)


def _check_pair(g: CoauthorGraph, u: int, v: int) -> None:
    g.check(u)
    g.check(v)
    if u == v:
        raise ValueError(f"pair ({u}, {v}) is not two distinct authors")


def _dijkstra(g: CoauthorGraph, source: int, target: int | None, skip: tuple[int, int] | None):
    """Unit-weight Dijkstra. Returns the target distance, or all distances."""
    dist = {source: 0}
    heap = [(0, source)]
    while heap:
        d, x = heapq.heappop(heap)
        if d > dist[x]:
            continue
        if x == target:
            return d
        for y in g.adj[x - 1]:
            if skip is not None and (x, y) in (skip, skip[::-1]):
                continue
            nd = d + 1
            if nd < dist.get(y, UNREACHABLE):
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return UNREACHABLE if target is not None else dist


def shortest_distance(
    g: CoauthorGraph, u: int, v: int, exclude_direct_edge: bool = False
) -> int | float:
    """Hop count between ``u`` and ``v``; ``UNREACHABLE`` (inf) when disconnected.

    With ``exclude_direct_edge`` the edge ``u-v`` is ignored during the search.
    """
    _check_pair(g, u, v)
    skip = (u, v) if exclude_direct_edge else None
    return _dijkstra(g, u, v, skip)


def single_source_distances(g: CoauthorGraph, source: int) -> dict[int, int]:
    g.check(source)
    return _dijkstra(g, source, None, None)


def components(g: CoauthorGraph) -> list[int]:
    """Component label per node (index ``id - 1``)."""
    label = [0] * g.n
    current = 0
    for s in range(1, g.n + 1):
        if label[s - 1]:
            continue
        current += 1
        label[s - 1] = current
        stack = [s]
        while stack:
            x = stack.pop()
            for y in g.adj[x - 1]:
                if not label[y - 1]:
                    label[y - 1] = current
                    stack.append(y)
    return label


def sum_of_neighbors(g: CoauthorGraph, u: int, v: int, drop_endpoints: bool = False) -> int:
    """``|N(u) | N(v)|``; common neighbours count once.

    By default ``u`` and ``v`` stay in each other's neighbourhoods, so two
    co-authors count each other. ``drop_endpoints`` removes them.
    """
    _check_pair(g, u, v)
    union = set(g.adj[u - 1]).union(g.adj[v - 1])
    if drop_endpoints:
        union -= {u, v}
    return len(union)


def sum_of_papers(g: CoauthorGraph, u: int, v: int, scope: str = "total") -> int:
    """Publication count of ``u`` plus that of ``v``.

    ``scope="joint"`` counts, for each of the two authors, only the
    publications they share with the other one.
    """
    _check_pair(g, u, v)
    if scope == "total":
        return g.paper_count[u - 1] + g.paper_count[v - 1]
    if scope == "joint":
        return 2 * g.shared_papers(u, v)
    raise ValueError(f"papers scope must be one of {PAPERS_SCOPES}, got {scope!r}")


@dataclass(frozen=True)
class FeatureVector:
    """Raw feature values for one pair; inactive features are ``None``."""

    shortest_distance: int | float | None
    sum_of_neighbors: int | None
    sum_of_papers: int | None
    mask: tuple[str, ...]

    def values(self, unreachable: float) -> tuple[float, ...]:
        """Active features as floats, with ``unreachable`` substituted for inf."""
        out = []
        for name in self.mask:
            x = getattr(self, name)
            out.append(float(unreachable) if x == UNREACHABLE else float(x))
        return tuple(out)


def extract(
    g: CoauthorGraph,
    pairs: Sequence[tuple[int, int]],
    mask: Sequence[str] = FEATURE_NAMES,
    exclude_direct_edge: bool = False,
    *,
    drop_endpoints: bool = False,
    papers_scope: str = "total",
) -> list[FeatureVector]:
    mask = parse_mask(mask)
    if papers_scope not in PAPERS_SCOPES:
        raise ValueError(f"papers scope must be one of {PAPERS_SCOPES}, got {papers_scope!r}")
    for pair in pairs:
        try:
            _check_pair(g, pair[0], pair[1])
        except (KeyError, ValueError) as exc:
            raise FeatureError(tuple(pair[:2]), exc) from exc

    dist = _distances(g, pairs, exclude_direct_edge) if "shortest_distance" in mask else None
    out = []
    for i, (u, v, *_) in enumerate(pairs):
        out.append(
            FeatureVector(
                shortest_distance=dist[i] if dist is not None else None,
                sum_of_neighbors=sum_of_neighbors(g, u, v, drop_endpoints)
                if "sum_of_neighbors" in mask
                else None,
                sum_of_papers=sum_of_papers(g, u, v, papers_scope)
                if "sum_of_papers" in mask
                else None,
                mask=mask,
            )
        )
    return out


def _distances(g: CoauthorGraph, pairs, exclude_direct_edge: bool) -> list[int | float]:
    """Distances for many pairs.

    Pairs in different components are answered without a search. A node
    that sources two or more of the remaining searches gets one full sweep.
    """
    label = components(g)
    result: list[int | float] = [UNREACHABLE] * len(pairs)
    todo = []
    for i, (u, v, *_) in enumerate(pairs):
        if label[u - 1] != label[v - 1]:
            continue
        if exclude_direct_edge and g.has_edge(u, v):
            result[i] = _dijkstra(g, u, v, (u, v))
        else:
            todo.append(i)

    load = Counter()
    for i in todo:
        load[pairs[i][0]] += 1
        load[pairs[i][1]] += 1
    by_source = defaultdict(list)
    for i in todo:
        u, v = pairs[i][0], pairs[i][1]
        src, dst = (u, v) if (load[u], -u) >= (load[v], -v) else (v, u)
        by_source[src].append((i, dst))
    for src, jobs in by_source.items():
        if len(jobs) == 1:
            i, dst = jobs[0]
            result[i] = _dijkstra(g, src, dst, None)
        else:
            sweep = _dijkstra(g, src, None, None)
            for i, dst in jobs:
                result[i] = sweep.get(dst, UNREACHABLE)
    return result
