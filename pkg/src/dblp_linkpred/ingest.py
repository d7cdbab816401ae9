"""Streaming reader for DBLP-flavoured bibliography XML.

The reader feeds the raw bytes to expat a batch of lines at a time and emits
each ``<article>``/``<inproceedings>``/... record as soon as its closing tag
has been seen, so memory stays proportional to the largest single record.
"""

from __future__ import annotations

import json
import logging
import re
import warnings
from collections import Counter
from dataclasses import dataclass, field
from html.entities import name2codepoint
from typing import IO, Iterable, Iterator
from xml.parsers import expat
from xml.sax.saxutils import escape, quoteattr

logger = logging.getLogger(__name__)

PUBLICATION_KINDS = (
    "article",
    "inproceedings",
    "proceedings",
    "book",
    "incollection",
    "phdthesis",
    "mastersthesis",
    "www",
)
PAPER_KINDS = frozenset({"article", "inproceedings", "incollection", "book"})

YEAR_MIN, YEAR_MAX = 1900, 2100

# ISO-8859-1 named character entities (nbsp .. yuml). DBLP declares these in
# its DTD, which is never fetched.
LATIN1_ENTITIES = {
    name: chr(cp) for name, cp in name2codepoint.items() if 160 <= cp <= 255
}

_BATCH_BYTES = 1 << 16
_READ_LIMIT = 1 << 16
_RECORD_START = re.compile(
    rb"^\s*<(" + b"|".join(k.encode() for k in PUBLICATION_KINDS) + rb")[\s>]"
)
_DECL_ENCODING = re.compile(rb"""^\s*<\?xml[^>]*encoding\s*=\s*["']([A-Za-z0-9._-]+)["']""")


class IngestError(ValueError):
    """Raised for unusable input: empty, wrong root, or malformed under abort."""


class UnknownEntityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Publication:
    key: str
    kind: str
    title: str
    year: int | None
    authors: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "key": self.key,
            "kind": self.kind,
            "title": self.title,
            "year": self.year,
            "authors": list(self.authors),
        }


@dataclass(frozen=True)
class IngestConfig:
    max_lines: int | None = None
    year_lo: int | None = None
    year_hi: int | None = None
    on_malformed: str = "skip_record"
    kinds: frozenset[str] = PAPER_KINDS

    def __post_init__(self):
        if self.max_lines is not None and self.max_lines < 1:
            raise ValueError(f"max_lines must be positive, got {self.max_lines}")
        if self.on_malformed not in ("skip_record", "abort"):
            raise ValueError(f"on_malformed must be skip_record or abort, got {self.on_malformed!r}")
        if (
            self.year_lo is not None
            and self.year_hi is not None
            and self.year_lo > self.year_hi
        ):
            raise ValueError(f"year_lo {self.year_lo} > year_hi {self.year_hi}")
        unknown = set(self.kinds) - set(PUBLICATION_KINDS)
        if unknown:
            raise ValueError(f"unknown record kinds: {sorted(unknown)}")
        object.__setattr__(self, "kinds", frozenset(self.kinds))

    @property
    def filters_years(self) -> bool:
        return self.year_lo is not None or self.year_hi is not None


@dataclass
class IngestStats:
    records_read: int = 0
    records_skipped: int = 0
    records_excluded: int = 0
    missing_year: int = 0
    lines_consumed: int = 0
    truncated: bool = False
    unknown_entities: Counter = field(default_factory=Counter)

    def to_dict(self) -> dict:
        return {
            "records_read": self.records_read,
            "records_skipped": self.records_skipped,
            "records_excluded": self.records_excluded,
            "missing_year": self.missing_year,
            "lines_consumed": self.lines_consumed,
            "truncated": self.truncated,
            "unknown_entities": dict(sorted(self.unknown_entities.items())),
        }


def parse_year(text: str) -> int | None:
    text = text.strip()
    if len(text) != 4 or not text.isdigit():
        return None
    year = int(text)
    return year if YEAR_MIN <= year <= YEAR_MAX else None


class _RecordBuilder:
    """expat callbacks; collects finished records into ``done``."""

    def __init__(self, cfg: IngestConfig, stats: IngestStats):
        self.cfg = cfg
        self.stats = stats
        self.done: list[Publication] = []
        self.depth = 0
        self.saw_root = False
        self.in_record = False
        self._reset_record()

    def _reset_record(self):
        self.kind = None
        self.key = ""
        self.authors: list[str] = []
        self.title = ""
        self.year_text = None
        self.field = None
        self.buf: list[str] = []

    def attach(self, parser):
        parser.StartElementHandler = self.start
        parser.EndElementHandler = self.end
        parser.CharacterDataHandler = self.chars
        parser.SkippedEntityHandler = self.entity

    def start(self, tag, attrs):
        self.depth += 1
        if self.depth == 1:
            if tag != "dblp":
                raise IngestError(f"root element is <{tag}>, expected <dblp>")
            self.saw_root = True
        elif self.depth == 2:
            self.in_record = tag in PUBLICATION_KINDS
            if self.in_record:
                self._reset_record()
                self.kind = tag
                self.key = attrs.get("key", "")
        elif self.depth == 3 and self.in_record and tag in ("author", "title", "year"):
            self.field = tag
            self.buf = []

    def end(self, tag):
        if self.in_record:
            if self.depth == 3 and self.field is not None:
                text = "".join(self.buf)
                if self.field == "author":
                    name = text.strip()
                    if name and name not in self.authors:
                        self.authors.append(name)
                elif self.field == "title":
                    self.title = text.strip()
                else:
                    self.year_text = text
                self.field = None
            elif self.depth == 2:
                self._finish()
                self.in_record = False
        self.depth -= 1

    def chars(self, data):
        if self.field is not None:
            self.buf.append(data)

    def entity(self, name, is_parameter):
        if is_parameter:
            return
        if name in LATIN1_ENTITIES:
            self.chars(LATIN1_ENTITIES[name])
            return
        if name not in self.stats.unknown_entities:
            warnings.warn(f"unknown entity &{name}; kept as literal text", UnknownEntityWarning, stacklevel=2)
        self.stats.unknown_entities[name] += 1
        self.chars(f"&{name};")

    def _finish(self):
        self.stats.records_read += 1
        if self.kind not in self.cfg.kinds:
            self.stats.records_excluded += 1
            return
        year = parse_year(self.year_text) if self.year_text is not None else None
        if year is None:
            self.stats.missing_year += 1
        if self.cfg.filters_years:
            if year is None:
                self.stats.records_skipped += 1
                return
            lo = self.cfg.year_lo if self.cfg.year_lo is not None else YEAR_MIN
            hi = self.cfg.year_hi if self.cfg.year_hi is not None else YEAR_MAX
            if not lo <= year <= hi:
                self.stats.records_excluded += 1
                return
        self.done.append(
            Publication(self.key, self.kind, self.title, year, tuple(self.authors))
        )

    def abandon_record(self, always: bool = False):
        """Drop a half-read record (truncation or malformed input)."""
        if self.in_record or always:
            self.stats.records_skipped += 1
        self.in_record = False
        self._reset_record()


def _new_parser(builder: _RecordBuilder, encoding: str | None):
    parser = expat.ParserCreate(encoding) if encoding else expat.ParserCreate()
    parser.UseForeignDTD(True)
    parser.SetParamEntityParsing(expat.XML_PARAM_ENTITY_PARSING_NEVER)
    parser.buffer_text = True
    builder.attach(parser)
    return parser


def _iter_lines(
    stream: IO[bytes], max_lines: int | None, stats: IngestStats
) -> Iterator[tuple[int, bytes]]:
    """Yield ``(line_number, piece)`` up to the line budget.

    Lines longer than the read limit arrive as several pieces sharing a number.
    """
    line_no = 1
    while True:
        if max_lines is not None and stats.lines_consumed >= max_lines:
            if stream.read(1):
                stats.truncated = True
            return
        piece = stream.readline(_READ_LIMIT)
        if not piece:
            return
        if piece.endswith(b"\n"):
            stats.lines_consumed += 1
            yield line_no, piece
            line_no += 1
            continue
        if len(piece) < _READ_LIMIT:
            # final line without a newline
            stats.lines_consumed += 1
        yield line_no, piece


def _chain(*parts: Iterable) -> Iterator:
    for part in parts:
        yield from part


def _take_batch(source: Iterator[tuple[int, bytes]]) -> list[tuple[int, bytes]]:
    batch, size = [], 0
    for item in source:
        batch.append(item)
        size += len(item[1])
        if size >= _BATCH_BYTES:
            break
    return batch


def _drain(builder: _RecordBuilder) -> Iterator[Publication]:
    done, builder.done = builder.done, []
    yield from done


def iter_publications(
    stream: IO[bytes],
    cfg: IngestConfig | None = None,
    stats: IngestStats | None = None,
) -> Iterator[Publication]:
    """Lazily parse DBLP XML from a binary stream.

    Counters are accumulated into ``stats`` when one is passed in. Under
    ``on_malformed="skip_record"`` a syntax error discards the record in
    progress and parsing resumes at the next line that opens a record.
    """
    cfg = cfg or IngestConfig()
    stats = stats if stats is not None else IngestStats()
    builder = _RecordBuilder(cfg, stats)
    lines = _iter_lines(stream, cfg.max_lines, stats)

    head = []
    for item in lines:
        head.append(item)
        if item[1].strip():
            break
    if not head or not head[-1][1].strip():
        raise IngestError("input is empty")
    m = _DECL_ENCODING.match(head[-1][1])
    encoding = m.group(1).decode("ascii") if m else "ISO-8859-1"
    parser = _new_parser(builder, None if m else encoding)
    line_base = 1
    source = _chain(head, lines)

    def error_text(exc: expat.ExpatError) -> str:
        return (
            f"malformed XML at line {line_base + exc.lineno - 1}, "
            f"column {exc.offset}: {expat.ErrorString(exc.code)}"
        )

    while parser is not None:
        batch = _take_batch(source)
        if not batch:
            break
        try:
            parser.Parse(b"".join(piece for _, piece in batch), False)
        except expat.ExpatError as exc:
            if not builder.saw_root:
                raise IngestError(f"no <dblp> root element: {error_text(exc)}") from None
            if cfg.on_malformed == "abort":
                raise IngestError(error_text(exc)) from None
            bad_line = line_base + exc.lineno - 1
            logger.warning("%s; skipping to the next record", error_text(exc))
            builder.abandon_record(always=True)
            yield from _drain(builder)
            source = _chain([item for item in batch if item[0] > bad_line], source)
            parser = None
            for line_no, piece in source:
                if _RECORD_START.match(piece):
                    parser = _new_parser(builder, encoding)
                    builder.depth = 0
                    parser.Parse(b"<dblp>", False)
                    line_base = line_no
                    source = _chain([(line_no, piece)], source)
                    break
            continue
        yield from _drain(builder)

    if not builder.saw_root:
        raise IngestError("no <dblp> root element found")
    if stats.truncated or parser is None:
        builder.abandon_record()
    else:
        try:
            parser.Parse(b"", True)
        except expat.ExpatError as exc:
            if cfg.on_malformed == "abort":
                raise IngestError(error_text(exc)) from None
            builder.abandon_record()
    yield from _drain(builder)


def parse_stream(
    stream: IO[bytes], cfg: IngestConfig | None = None
) -> tuple[list[Publication], IngestStats]:
    stats = IngestStats()
    pubs = list(iter_publications(stream, cfg, stats))
    return pubs, stats


def filter_publications(
    pubs: Iterable[Publication], year_lo: int, year_hi: int
) -> list[Publication]:
    """Keep records with ``year_lo <= year <= year_hi`` and at least one author."""
    if year_lo > year_hi:
        raise ValueError(f"year_lo {year_lo} > year_hi {year_hi}")
    return [
        p
        for p in pubs
        if p.year is not None and year_lo <= p.year <= year_hi and p.authors
    ]


def publication_to_xml(pub: Publication) -> str:
    parts = [f"<{pub.kind} key={quoteattr(pub.key)}>"]
    parts += [f"<author>{escape(a)}</author>" for a in pub.authors]
    parts.append(f"<title>{escape(pub.title)}</title>")
    if pub.year is not None:
        parts.append(f"<year>{pub.year}</year>")
    parts.append(f"</{pub.kind}>")
    return "".join(parts)


def dump_xml(pubs: Iterable[Publication]) -> bytes:
    """Canonical UTF-8 DBLP document, one record per line."""
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', "<dblp>"]
    lines += [publication_to_xml(p) for p in pubs]
    lines.append("</dblp>")
    return ("\n".join(lines) + "\n").encode("utf-8")


def write_jsonl(pubs: Iterable[Publication], fh: IO[str]) -> int:
    n = 0
    for p in pubs:
        fh.write(json.dumps(p.to_dict(), ensure_ascii=False, sort_keys=True))
        fh.write("\n")
        n += 1
    return n
