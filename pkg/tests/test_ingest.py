import io
import json
import subprocess
import sys
import textwrap

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dblp_linkpred.ingest import (
    PAPER_KINDS,
    IngestConfig,
    IngestError,
    IngestStats,
    Publication,
    UnknownEntityWarning,
    dump_xml,
    filter_publications,
    iter_publications,
    parse_stream,
    parse_year,
    write_jsonl,
)
from dblp_linkpred.synthetic import community_publications, dblp_xml
from oracles import scan_record_count


def parse(data: bytes, **cfg):
    return parse_stream(io.BytesIO(data), IngestConfig(**cfg))


def doc(*records: str, decl: str = "") -> bytes:
    return (decl + "<dblp>\n" + "\n".join(records) + "\n</dblp>\n").encode("latin-1")


MINIMAL = '<article key="x"><author>A</author><author>B</author><title>T</title><year>2015</year></article>'


def test_minimal_record():
    pubs, stats = parse(doc(MINIMAL))
    assert pubs == [Publication("x", "article", "T", 2015, ("A", "B"))]
    assert stats.records_read == 1 and stats.records_skipped == 0


def test_truncated_mid_record_is_skipped():
    data = doc(MINIMAL.replace('"x"', '"x1"'), MINIMAL.replace('"x"', '"x2"'))
    cut = data[: data.index(b"x2") + 20]
    pubs, stats = parse(cut)
    assert [p.key for p in pubs] == ["x1"]
    assert stats.records_skipped == 1


def test_line_budget_cuts_record():
    records = [
        f'<article key="k{i}">\n<author>A{i}</author>\n<title>T</title>\n<year>2015</year>\n</article>'
        for i in range(3)
    ]
    data = doc(*records)
    # line 1 is <dblp>, each record has 5 lines; stop inside the third
    pubs, stats = parse(data, max_lines=1 + 5 + 5 + 2)
    assert [p.key for p in pubs] == ["k0", "k1"]
    assert stats.records_skipped == 1
    assert stats.truncated
    assert stats.lines_consumed == 13


def test_line_budget_at_record_boundary_skips_nothing():
    records = [f'<article key="k{i}">\n<author>A</author>\n<year>2015</year>\n</article>' for i in range(3)]
    pubs, stats = parse(doc(*records), max_lines=1 + 4)
    assert [p.key for p in pubs] == ["k0"]
    assert stats.records_skipped == 0 and stats.truncated


def test_malformed_record_abort_reports_position():
    bad = '<article key="b"><author>A</author><title>T</titel><year>2015</year></article>'
    with pytest.raises(IngestError, match=r"line 3, column \d+"):
        parse(doc(MINIMAL, bad), on_malformed="abort")


def test_malformed_record_skip_resumes_at_next_record():
    bad = '<article key="b">\n<author>A</author>\n<title>T</titel>\n<year>2015</year>\n</article>'
    good = MINIMAL.replace('"x"', '"c"')
    pubs, stats = parse(doc(MINIMAL, bad, good))
    assert [p.key for p in pubs] == ["x", "c"]
    assert stats.records_skipped == 1


def test_mismatched_nesting_many_errors():
    bad = "<article key='b'><author>A</article>"
    pubs, stats = parse(doc(bad, MINIMAL, bad, MINIMAL.replace('"x"', '"y"')))
    assert [p.key for p in pubs] == ["x", "y"]
    assert stats.records_skipped == 2


@pytest.mark.parametrize("data", [b"", b"\n\n  \n"])
def test_empty_input(data):
    with pytest.raises(IngestError, match="empty"):
        parse(data)


@pytest.mark.parametrize("data", [b"<foo><article key='a'/></foo>", b"hello world\n"])
def test_requires_dblp_root(data):
    with pytest.raises(IngestError, match="dblp"):
        parse(data)


def test_latin1_entities_and_numeric_references():
    rec = '<article key="e"><author>J&ouml;rg M&uuml;ller</author><author>&#233;mile &#x00C5;</author><title>Caf&eacute; &amp; more</title><year>2014</year></article>'
    data = doc(rec, decl='<?xml version="1.0" encoding="ISO-8859-1"?>\n<!DOCTYPE dblp SYSTEM "dblp.dtd">\n')
    (pub,), _ = parse(data)
    assert pub.authors == ("Jörg Müller", "émile Å")
    assert pub.title == "Café & more"


def test_unknown_entity_kept_literally_with_warning():
    rec = '<article key="e"><author>X &foo; Y</author><title>T</title><year>2014</year></article>'
    with pytest.warns(UnknownEntityWarning):
        (pub,), stats = parse(doc(rec))
    assert pub.authors == ("X &foo; Y",)
    assert stats.unknown_entities == {"foo": 1}


def test_encoding_default_latin1_and_declared_utf8():
    rec = '<article key="e"><author>Müller</author><year>2014</year></article>'
    latin = ("<dblp>" + rec + "</dblp>").encode("latin-1")
    utf8 = ('<?xml version="1.0" encoding="UTF-8"?><dblp>' + rec + "</dblp>").encode("utf-8")
    assert parse(latin)[0][0].authors == ("Müller",)
    assert parse(utf8)[0][0].authors == ("Müller",)


def test_kind_filter_default_and_configurable():
    recs = [
        '<www key="w"><author>A</author><title>Home Page</title></www>',
        '<proceedings key="p"><editor>E</editor><title>P</title><year>2015</year></proceedings>',
        '<inproceedings key="i"><author>A</author><year>2015</year></inproceedings>',
        '<phdthesis key="t"><author>A</author><year>2015</year></phdthesis>',
    ]
    pubs, stats = parse(doc(*recs))
    assert [p.key for p in pubs] == ["i"]
    assert stats.records_read == 4 and stats.records_excluded == 3
    pubs, _ = parse(doc(*recs), kinds=frozenset({"www", "phdthesis"}))
    assert [p.key for p in pubs] == ["w", "t"]


def test_missing_year_flagged_not_dropped():
    rec = '<article key="n"><author>A</author><title>T</title></article>'
    (pub,), stats = parse(doc(rec))
    assert pub.year is None and stats.missing_year == 1


def test_year_filter_counts_missing_as_skipped():
    recs = [
        '<article key="n"><author>A</author></article>',
        '<article key="a"><author>A</author><year>2011</year></article>',
        '<article key="b"><author>A</author><year>2012</year></article>',
    ]
    pubs, stats = parse(doc(*recs), year_lo=2012, year_hi=2016)
    assert [p.key for p in pubs] == ["b"]
    assert stats.records_skipped == 1 and stats.records_excluded == 1


def test_config_validation():
    with pytest.raises(ValueError):
        IngestConfig(year_lo=2016, year_hi=2012)
    with pytest.raises(ValueError):
        IngestConfig(max_lines=0)
    with pytest.raises(ValueError):
        IngestConfig(on_malformed="ignore")
    with pytest.raises(ValueError):
        IngestConfig(kinds=frozenset({"blog"}))


def test_duplicate_authors_within_record_removed():
    rec = '<article key="d"><author>A</author><author>B</author><author>A</author><year>2015</year></article>'
    (pub,), _ = parse(doc(rec))
    assert pub.authors == ("A", "B")


@pytest.mark.parametrize("text,year", [("2015", 2015), (" 1900 ", 1900), ("2100", 2100), ("1899", None), ("2101", None), ("20x5", None), ("15", None)])
def test_parse_year(text, year):
    assert parse_year(text) == year


def _pubs_with_years(years):
    return [Publication(f"k{y}", "article", "t", y, ("A",)) for y in years]


def test_filter_publications_boundaries():
    pubs = _pubs_with_years([2011, 2012, 2016, 2017])
    assert [p.year for p in filter_publications(pubs, 2012, 2016)] == [2012, 2016]
    assert [p.year for p in filter_publications(pubs, 2017, 2018)] == [2017]


def test_filter_publications_drops_authorless_and_yearless():
    pubs = [
        Publication("a", "article", "t", 2014, ()),
        Publication("b", "article", "t", None, ("A",)),
        Publication("c", "article", "t", 2014, ("A",)),
    ]
    assert [p.key for p in filter_publications(pubs, 2012, 2016)] == ["c"]
    with pytest.raises(ValueError):
        filter_publications(pubs, 2016, 2012)


name_text = st.text(
    alphabet=st.characters(min_codepoint=32, max_codepoint=0x2FF, blacklist_characters="\x7f"),
    min_size=1,
    max_size=12,
).map(str.strip).filter(bool)


@st.composite
def publications(draw):
    return Publication(
        key=draw(st.from_regex(r"[a-z]{1,5}/[A-Za-z0-9]{1,8}", fullmatch=True)),
        kind=draw(st.sampled_from(sorted(PAPER_KINDS))),
        title=draw(name_text),
        year=draw(st.one_of(st.none(), st.integers(1900, 2100))),
        authors=tuple(dict.fromkeys(draw(st.lists(name_text, min_size=1, max_size=5)))),
    )


@given(st.lists(publications(), max_size=8))
def test_round_trip_through_canonical_xml(pubs):
    back, stats = parse(dump_xml(pubs))
    assert back == pubs
    assert stats.records_read == len(pubs)


def test_determinism():
    data = dblp_xml(community_publications(200, 300, seed=3), www_every=7)
    a = parse(data, max_lines=2000)
    b = parse(data, max_lines=2000)
    assert a[0] == b[0] and a[1] == b[1]


@pytest.mark.parametrize("max_lines", [None, 3, 5, 100, 1234, 5000, 9999])
def test_record_count_matches_line_scanner(max_lines):
    data = dblp_xml(community_publications(300, 500, seed=1, accented_every=7), www_every=5)
    pubs, stats = parse(data, max_lines=max_lines)
    assert len(pubs) == scan_record_count(data, max_lines, PAPER_KINDS)


def test_iter_publications_is_lazy():
    data = dblp_xml(community_publications(200, 2000, seed=2))
    stream = io.BytesIO(data)
    first = next(iter_publications(stream))
    assert first.key.startswith("synth/")
    assert stream.tell() < len(data)


def test_jsonl_dump():
    pubs = [Publication("a", "article", "Tï", 2015, ("X", "Y"))]
    buf = io.StringIO()
    assert write_jsonl(pubs, buf) == 1
    assert json.loads(buf.getvalue()) == {
        "key": "a", "kind": "article", "title": "Tï", "year": 2015, "authors": ["X", "Y"]
    }


def test_stats_accumulate_into_given_object():
    stats = IngestStats()
    list(iter_publications(io.BytesIO(doc(MINIMAL)), None, stats))
    assert stats.records_read == 1 and stats.lines_consumed == 3


MEMORY_PROBE = textwrap.dedent(
    """
    import resource, sys
    from dblp_linkpred.ingest import iter_publications
    from dblp_linkpred.synthetic import LargeXmlStream
    import io
    stream = io.BufferedReader(LargeXmlStream({size}))
    next(iter_publications(io.BytesIO(b"<dblp><article key='w'><author>A</author></article></dblp>")))
    base = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    n = sum(1 for _ in iter_publications(stream))
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    print(n, (peak - base) // 1024)
    """
)


def test_streaming_memory_bound_on_100mb():
    size = 100 * 1024 * 1024
    out = subprocess.run(
        [sys.executable, "-c", MEMORY_PROBE.format(size=size)],
        capture_output=True,
        text=True,
        check=True,
        timeout=600,
    ).stdout.split()
    records, growth_mib = int(out[0]), int(out[1])
    assert records > 200_000
    assert growth_mib < 32, f"resident memory grew by {growth_mib} MiB while parsing 100 MB"
