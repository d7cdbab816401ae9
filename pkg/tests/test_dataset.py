import io
import random
import warnings
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dblp_linkpred.dataset import (
    Dataset,
    DatasetMeta,
    LeakageWarning,
    SamplingWarning,
    SplitSpec,
    assemble,
    format_number,
    future_link_pairs,
    leaky_features,
    sample_pairs,
    stratified_kfold,
    temporal_split,
    write_csv,
)
from dblp_linkpred.features import FEATURE_NAMES, shortest_distance
from dblp_linkpred.graph import build_graph
from dblp_linkpred.ingest import Publication, filter_publications
from conftest import pubs_from_edges, random_pubs


def test_temporal_split_partitions_paper_years():
    pubs = [Publication(f"k{y}", "article", "t", y, ("A",)) for y in range(2010, 2020)]
    train, test = temporal_split(pubs, SplitSpec())
    assert [p.year for p in train] == [2012, 2013, 2014, 2015, 2016]
    assert [p.year for p in test] == [2017, 2018]
    both = filter_publications(pubs, 2012, 2018)
    assert sorted(train + test, key=lambda p: p.year) == both
    assert not set(train) & set(test)


def test_temporal_split_empty_range():
    pubs = [Publication("k", "article", "t", 2015, ("A",))]
    assert temporal_split(pubs, SplitSpec((2000, 2001), (2002, 2003))) == ([], [])


def test_split_spec_rejects_overlap():
    with pytest.raises(ValueError):
        SplitSpec((2012, 2016), (2016, 2018))
    with pytest.raises(ValueError):
        SplitSpec((2016, 2012), (2017, 2018))


def test_triangle_has_no_negatives(triangle):
    g, _ = triangle
    with pytest.warns(SamplingWarning):
        pairs = sample_pairs(g, 1.0)
    assert pairs == [(1, 2, 1), (1, 3, 1), (2, 3, 1)]


def test_path_negatives(path3):
    g, _ = path3
    # two positives ask for two negatives but only one non-edge exists
    with pytest.warns(SamplingWarning):
        pairs = sample_pairs(g, 1.0)
    assert [p for p in pairs if p[2] == 1] == [(1, 2, 1), (2, 3, 1)]
    assert [p for p in pairs if p[2] == 0] == [(1, 3, 0)]


def test_no_edges_no_positives():
    g, _ = build_graph([Publication("a", "article", "t", 2015, ("A",)), Publication("b", "article", "t", 2015, ("B",))])
    with pytest.raises(ValueError, match="no positives"):
        sample_pairs(g)
    with pytest.raises(ValueError):
        sample_pairs(g, ratio=0)


@given(st.integers(0, 10_000), st.sampled_from([0.5, 1.0, 2.0, 5.0]), st.sampled_from([None, 2, 3]))
def test_sampled_pairs_contract(seed, ratio, max_dist):
    rng = random.Random(seed)
    g, _ = build_graph(random_pubs(rng, 30, 25, max_size=3))
    if g.n_edges == 0:
        return
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        pairs = sample_pairs(g, ratio, max_dist, seed)
    pos = [(u, v) for u, v, y in pairs if y == 1]
    neg = [(u, v) for u, v, y in pairs if y == 0]
    assert sorted(pos) == list(g.edges())
    assert len({frozenset(p[:2]) for p in pairs}) == len(pairs)
    assert all(not g.has_edge(u, v) and u != v for u, v in neg)
    if max_dist is not None:
        assert all(shortest_distance(g, u, v) <= max_dist for u, v in neg)
        available = sum(
            1
            for u in range(1, g.n + 1)
            for v in range(u + 1, g.n + 1)
            if not g.has_edge(u, v) and shortest_distance(g, u, v) <= max_dist
        )
    else:
        available = g.n * (g.n - 1) // 2 - g.n_edges
    requested = max(1, round(ratio * len(pos)))
    assert len(neg) == min(requested, available)
    assert (len(neg) < requested) == any(issubclass(w.category, SamplingWarning) for w in caught)


def test_negatives_are_uniform_over_non_edges():
    # a 6-cycle has 9 non-edges; draw 3 of them per seed
    g, _ = build_graph(pubs_from_edges([(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 1)]))
    counts = Counter()
    runs = 600
    for seed in range(runs):
        for u, v, y in sample_pairs(g, 0.5, seed=seed):
            if y == 0:
                counts[u, v] += 1
    assert len(counts) == 9
    expected = runs * 3 / 9
    sd = (runs * (3 / 9) * (6 / 9)) ** 0.5
    assert all(abs(c - expected) < 5 * sd for c in counts.values())


def test_sampling_is_seeded():
    g, _ = build_graph(random_pubs(random.Random(1), 40, 30))
    assert sample_pairs(g, seed=5) == sample_pairs(g, seed=5)
    assert sample_pairs(g, seed=5) != sample_pairs(g, seed=6)


def test_labels_follow_adjacency_and_sentinel():
    g, _ = build_graph(pubs_from_edges([(1, 2), (2, 3), (4, 5)]))
    pairs = [(1, 2), (1, 3), (1, 4), (4, 5)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LeakageWarning)
        d = assemble(g, pairs, ["dist"])
    assert d.labels == (1, 0, 0, 1)
    # distances 1, 2, inf, 1: the sentinel is one past the longest finite one
    assert d.rows == ((1.0,), (2.0,), (3.0,), (1.0,))
    assert d.meta.unreachable_sentinel == 3.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LeakageWarning)
        assert assemble(g, pairs, ["dist"], unreachable=100).rows[2] == (100.0,)


def test_every_instance_label_matches_graph():
    g, _ = build_graph(random_pubs(random.Random(3), 50, 40))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        d = assemble(g, sample_pairs(g, 2.0, seed=1))
    for inst in d.instances():
        assert inst.label == int(g.has_edge(inst.u, inst.v))


def test_distance_with_direct_edge_leaks():
    g, _ = build_graph(random_pubs(random.Random(3), 50, 40))
    pairs = sample_pairs(g, seed=1)
    with pytest.warns(LeakageWarning, match="shortest_distance"):
        assemble(g, pairs, FEATURE_NAMES)


def test_joint_paper_count_leaks_on_its_own():
    g, _ = build_graph(random_pubs(random.Random(3), 50, 40))
    pairs = sample_pairs(g, seed=1)
    with pytest.warns(LeakageWarning, match="sum_of_papers"):
        d = assemble(g, pairs, ["papers"], papers_scope="joint")
    assert leaky_features(d) == ["sum_of_papers"]


def test_total_paper_count_alone_does_not_leak():
    g, _ = build_graph(random_pubs(random.Random(3), 50, 40))
    pairs = sample_pairs(g, seed=1)
    with warnings.catch_warnings():
        warnings.simplefilter("error", LeakageWarning)
        d = assemble(g, pairs, ["papers"])
    assert leaky_features(d) == []


def _contingency_leak(column, labels) -> bool:
    """A feature leaks if some derived binary test splits the classes perfectly."""
    for test in (lambda x: x > 0, lambda x: x == 1):
        table = Counter((bool(test(x)), y) for x, y in zip(column, labels))
        if table[True, 0] == 0 and table[False, 1] == 0:
            return True
    return False


@given(
    st.lists(
        st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 1)),
        min_size=2,
        max_size=12,
    )
)
def test_leak_check_matches_contingency_table(rows):
    labels = [r[2] for r in rows]
    d = Dataset(("a", "b"), [r[:2] for r in rows], labels)
    expect = []
    if 0 < sum(labels) < len(labels):
        expect = [n for j, n in enumerate(("a", "b")) if _contingency_leak([r[j] for r in rows], labels)]
    assert leaky_features(d) == expect


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(("a",), [(1.0, 2.0)], [1])
    with pytest.raises(ValueError):
        Dataset(("a",), [(float("inf"),)], [1])
    with pytest.raises(ValueError):
        Dataset(("a",), [(1.0,)], [2])
    with pytest.raises(ValueError):
        Dataset(("a", "a"), [(1.0, 1.0)], [1])
    with pytest.raises(ValueError):
        Dataset(("class",), [(1.0,)], [1])
    with pytest.raises(ValueError):
        Dataset(("a",), [(1.0,), (2.0,)], [1, 0], pairs=((1, 2), (2, 1)))


def test_dataset_is_deterministic():
    def make():
        g, _ = build_graph(random_pubs(random.Random(11), 60, 50))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            d = assemble(g, sample_pairs(g, seed=2), meta=DatasetMeta(seed=2))
        buf = io.StringIO()
        write_csv(d, buf)
        return d, buf.getvalue()

    (d1, csv1), (d2, csv2) = make(), make()
    assert d1 == d2 and d1.pairs == d2.pairs and d1.meta == d2.meta and csv1 == csv2


def test_select_and_subset():
    d = Dataset(("a", "b", "c"), [(1, 2, 3), (4, 5, 6)], [0, 1], pairs=((1, 2), (3, 4)))
    assert d.select(["c", "a"]).rows == ((3.0, 1.0), (6.0, 4.0))
    sub = d.subset([1])
    assert sub.rows == ((4.0, 5.0, 6.0),) and sub.pairs == ((3, 4),) and sub.labels == (1,)


def test_csv_export():
    d = Dataset(("shortest_distance", "sum_of_neighbors"), [(1, 2.5)], [1])
    buf = io.StringIO()
    write_csv(d, buf)
    assert buf.getvalue() == "shortest_distance,sum_of_neighbors,class\n1,2.5,1\n"


@pytest.mark.parametrize("x,text", [(3.0, "3"), (-0.0, "0"), (0.1, "0.1"), (1e-7, "1e-07"), (2.5, "2.5"), (1e300, "1e+300")])
def test_format_number(x, text):
    assert format_number(x) == text
    assert float(format_number(x)) == x


def test_kfold_five_by_five():
    labels = [0] * 5 + [1] * 5
    folds = stratified_kfold(labels, 5, seed=0)
    assert len(folds) == 5
    for train, test in folds:
        assert sorted(labels[i] for i in test) == [0, 1]
        assert len(train) == 8


def test_kfold_errors():
    with pytest.raises(ValueError):
        stratified_kfold([0, 1] * 10, k=1)
    with pytest.raises(ValueError, match="class 1"):
        stratified_kfold([0] * 10 + [1] * 3, k=5)


def test_kfold_seeded():
    labels = [0] * 30 + [1] * 20
    a = stratified_kfold(labels, 10, seed=1)
    b = stratified_kfold(labels, 10, seed=1)
    c = stratified_kfold(labels, 10, seed=2)
    assert all((x[1] == y[1]).all() for x, y in zip(a, b))
    assert any((x[1] != y[1]).any() for x, y in zip(a, c) if len(x[1]) == len(y[1]))


def test_future_link_pairs():
    train = [Publication("a", "article", "t", 2014, ("A", "B")), Publication("b", "article", "t", 2014, ("C", "D"))]
    test = [Publication("c", "article", "t", 2017, ("A", "C")), Publication("d", "article", "t", 2017, ("B", "D"))]
    g1, i1 = build_graph(train)
    g2, i2 = build_graph(test)
    pairs = future_link_pairs(g1, i1, g2, i2, ratio=1.0, seed=0)
    pos = {(i1.name_of(u), i1.name_of(v)) for u, v, y in pairs if y == 1}
    neg = {frozenset((i1.name_of(u), i1.name_of(v))) for u, v, y in pairs if y == 0}
    assert pos == {("A", "C"), ("B", "D")}
    assert neg <= {frozenset("AD"), frozenset("BC")}
