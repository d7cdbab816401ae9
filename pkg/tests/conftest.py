import random

import pytest
from hypothesis import HealthCheck, settings

from dblp_linkpred.graph import build_graph
from dblp_linkpred.ingest import Publication

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# filled by test_acceptance.py, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_pubs(rng: random.Random, n_authors: int, n_papers: int, max_size: int = 4, years=(2012, 2018)):
    names = [f"A{i}" for i in range(n_authors)]
    pubs = []
    for i in range(n_papers):
        k = rng.randint(1, min(max_size, n_authors))
        pubs.append(
            Publication(f"k/{i}", "article", f"T{i}", rng.randint(*years), tuple(rng.sample(names, k)))
        )
    return pubs


def pubs_from_edges(edges, n: int | None = None):
    """One two-author paper per edge, plus single-author papers for listed isolated nodes."""
    pubs = [Publication(f"e/{i}", "article", "t", 2015, (f"n{u}", f"n{v}")) for i, (u, v) in enumerate(edges)]
    if n is not None:
        seen = {x for e in edges for x in e}
        pubs += [Publication(f"s/{x}", "article", "t", 2015, (f"n{x}",)) for x in range(1, n + 1) if x not in seen]
    return pubs


@pytest.fixture
def triangle():
    return build_graph([Publication("t", "article", "T", 2015, ("A", "B", "C"))])


@pytest.fixture
def path3():
    return build_graph(
        [
            Publication("p1", "article", "T", 2015, ("A", "B")),
            Publication("p2", "article", "T", 2015, ("B", "C")),
        ]
    )
