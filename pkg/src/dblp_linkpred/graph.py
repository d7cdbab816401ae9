"""Undirected co-authorship graph with per-author paper counts."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import IO, Iterable, Iterator, Sequence

import numpy as np

from .ingest import Publication


class UnknownAuthorError(KeyError):
    pass


@dataclass(frozen=True)
class AuthorIndex:
    """Bijection between author names and ids ``1..n`` (first-appearance order)."""

    id_to_name: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "_name_to_id", {name: i for i, name in enumerate(self.id_to_name, 1)}
        )
        if len(self._name_to_id) != len(self.id_to_name):
            raise ValueError("duplicate author names in index")

    @property
    def name_to_id(self) -> dict[str, int]:
        return dict(self._name_to_id)

    def __len__(self) -> int:
        return len(self.id_to_name)

    def __contains__(self, name: str) -> bool:
        return name in self._name_to_id

    def id_of(self, name: str) -> int:
        try:
            return self._name_to_id[name]
        except KeyError:
            raise UnknownAuthorError(name) from None

    def name_of(self, author_id: int) -> str:
        if not 1 <= author_id <= len(self.id_to_name):
            raise UnknownAuthorError(author_id)
        return self.id_to_name[author_id - 1]


@dataclass(frozen=True, eq=False)
class CoauthorGraph:
    """Immutable adjacency-set graph; node ids run from 1 to ``n``.

    ``shared`` maps each edge ``(u, v)`` with ``u < v`` to the number of
    publications the two authors have in common.
    """

    adj: tuple[tuple[int, ...], ...]
    paper_count: tuple[int, ...]
    shared: dict[tuple[int, int], int]

    @property
    def n(self) -> int:
        return len(self.adj)

    @property
    def n_edges(self) -> int:
        return len(self.shared)

    def check(self, u: int) -> None:
        if not isinstance(u, (int, np.integer)) or not 1 <= u <= len(self.adj):
            raise UnknownAuthorError(u)

    def neighbors(self, u: int) -> tuple[int, ...]:
        self.check(u)
        return self.adj[u - 1]

    def degree(self, u: int) -> int:
        return len(self.neighbors(u))

    def papers(self, u: int) -> int:
        self.check(u)
        return self.paper_count[u - 1]

    def has_edge(self, u: int, v: int) -> bool:
        self.check(u)
        self.check(v)
        return (min(u, v), max(u, v)) in self.shared

    def shared_papers(self, u: int, v: int) -> int:
        self.check(u)
        self.check(v)
        return self.shared.get((min(u, v), max(u, v)), 0)

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges as ``(u, v)`` with ``u < v`` in lexicographic order."""
        for u, nbrs in enumerate(self.adj, 1):
            for v in nbrs:
                if v > u:
                    yield u, v

    def to_dense_matrix(self) -> np.ndarray:
        """0/1 adjacency matrix; row/column ``i`` holds author id ``i + 1``."""
        m = np.zeros((self.n, self.n), dtype=np.int8)
        for u, v in self.edges():
            m[u - 1, v - 1] = m[v - 1, u - 1] = 1
        return m

    def __eq__(self, other):
        if not isinstance(other, CoauthorGraph):
            return NotImplemented
        return self.adj == other.adj and self.paper_count == other.paper_count and self.shared == other.shared

    __hash__ = None


def build_graph(pubs: Iterable[Publication]) -> tuple[CoauthorGraph, AuthorIndex]:
    """Co-authorship graph over every distinct author name in ``pubs``."""
    ids: dict[str, int] = {}
    papers: Counter = Counter()
    shared: Counter = Counter()
    for pub in pubs:
        if not pub.authors:
            raise ValueError(f"publication {pub.key!r} has no authors")
        members = []
        for name in dict.fromkeys(pub.authors):
            if name not in ids:
                ids[name] = len(ids) + 1
            members.append(ids[name])
            papers[ids[name]] += 1
        for u, v in combinations(sorted(members), 2):
            shared[u, v] += 1

    n = len(ids)
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for u, v in shared:
        nbrs[u - 1].add(v)
        nbrs[v - 1].add(u)
    graph = CoauthorGraph(
        adj=tuple(tuple(sorted(s)) for s in nbrs),
        paper_count=tuple(papers[i] for i in range(1, n + 1)),
        shared=dict(sorted(shared.items())),
    )
    return graph, AuthorIndex(tuple(ids))


def write_edge_list(graph: CoauthorGraph, fh: IO[str]) -> None:
    for u, v in graph.edges():
        fh.write(f"{u} {v}\n")


def write_node_table(graph: CoauthorGraph, index: AuthorIndex, fh: IO[str]) -> None:
    for i, name in enumerate(index.id_to_name, 1):
        fh.write(f"{i}\t{name}\t{graph.paper_count[i - 1]}\n")


def graph_summary(graph: CoauthorGraph, pubs: Sequence[Publication] | None = None) -> dict:
    degrees = [len(a) for a in graph.adj]
    summary = {
        "authors": graph.n,
        "edges": graph.n_edges,
        "isolated_authors": sum(1 for d in degrees if d == 0),
        "max_degree": max(degrees, default=0),
    }
    if pubs is not None:
        summary["papers"] = len(pubs)
    return summary
