"""Attribute-Relation File Format (ARFF) reading and writing.

Only NUMERIC (and its REAL/INTEGER aliases) and nominal attributes are
supported, dense data only, no missing values.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import IO, Union

from .dataset import CLASS_ATTRIBUTE, Dataset, DatasetMeta, format_number

NUMERIC = "NUMERIC"
_NUMERIC_ALIASES = {"numeric", "real", "integer"}
_TOKEN = re.compile(r"""'(?:[^'\\]|\\.)*'|"(?:[^"\\]|\\.)*"|[^\s{},'"]+""")
_NEEDS_QUOTES = re.compile(r"""[\s,{}%'"\\]""")


class ArffError(ValueError):
    def __init__(self, line: int | None, message: str):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass
class ArffDocument:
    relation: str
    attributes: list[tuple[str, str | tuple[str, ...]]]
    rows: list[list[float | str]]
    # source line of each attribute, for error messages
    attribute_lines: list[int] = field(default_factory=list)


def quote(name: str) -> str:
    if name and not _NEEDS_QUOTES.search(name):
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


def _unquote(token: str) -> str:
    if len(token) >= 2 and token[0] == token[-1] and token[0] in "'\"":
        return re.sub(r"\\(.)", r"\1", token[1:-1])
    return token


def write_arff(d: Dataset, relation: str | None = None) -> bytes:
    relation = d.meta.relation if relation is None else relation
    lines = [f"@RELATION {quote(relation)}"]
    lines += [f"@ATTRIBUTE {quote(name)} NUMERIC" for name in d.schema]
    lines.append(f"@ATTRIBUTE {CLASS_ATTRIBUTE} {{0,1}}")
    lines.append("@DATA")
    for row, label in zip(d.rows, d.labels):
        lines.append(",".join([*(format_number(x) for x in row), str(label)]))
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_arff(source: Union[bytes, str, IO]) -> ArffDocument:
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            line = source.count(b"\n", 0, exc.start) + 1
            raise ArffError(line, f"not UTF-8: {exc.reason}") from None

    relation = None
    attributes: list[tuple[str, str | tuple[str, ...]]] = []
    rows: list[list[float | str]] = []
    attribute_lines: list[int] = []
    in_data = False
    lineno = 0
    for lineno, raw in enumerate(source.split("\n"), 1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if in_data:
            rows.append(_parse_row(line, lineno, attributes))
            continue
        keyword, _, rest = line.partition(" ")
        if not keyword.startswith("@"):
            keyword, rest = line, ""
        keyword = keyword.lower()
        rest = rest.strip()
        if keyword == "@relation":
            if relation is not None:
                raise ArffError(lineno, "duplicate @RELATION")
            tokens = _TOKEN.findall(rest)
            if len(tokens) != 1:
                raise ArffError(lineno, "@RELATION takes exactly one name")
            relation = _unquote(tokens[0])
        elif keyword == "@attribute":
            if relation is None:
                raise ArffError(lineno, "@ATTRIBUTE before @RELATION")
            name, kind = _parse_attribute(rest, lineno)
            if any(name == a[0] for a in attributes):
                raise ArffError(lineno, f"duplicate attribute {name!r}")
            attributes.append((name, kind))
            attribute_lines.append(lineno)
        elif keyword == "@data":
            if rest:
                raise ArffError(lineno, "unexpected text after @DATA")
            if not attributes:
                raise ArffError(lineno, "@DATA before any @ATTRIBUTE")
            in_data = True
        else:
            raise ArffError(lineno, f"unexpected {line[:40]!r} in header")
    if not in_data:
        raise ArffError(max(lineno, 1), "input ends before @DATA")
    return ArffDocument(relation, attributes, rows, attribute_lines)


def _parse_attribute(rest: str, lineno: int) -> tuple[str, str | tuple[str, ...]]:
    m = _TOKEN.match(rest)
    if not m:
        raise ArffError(lineno, "missing attribute name")
    name = _unquote(m.group())
    spec = rest[m.end():].strip()
    if spec.startswith("{"):
        if not spec.endswith("}"):
            raise ArffError(lineno, "unterminated nominal value set")
        inner = spec[1:-1]
        values = [v.strip() for v in inner.split(",")]
        if not inner.strip() or any(not v for v in values):
            raise ArffError(lineno, "empty nominal value")
        values = tuple(_unquote(v) for v in values)
        if len(set(values)) != len(values):
            raise ArffError(lineno, "duplicate nominal value")
        return name, values
    if spec.lower() in _NUMERIC_ALIASES:
        return name, NUMERIC
    raise ArffError(lineno, f"unsupported attribute type {spec!r}")


def _parse_row(line: str, lineno: int, attributes) -> list[float | str]:
    if line.startswith("{"):
        raise ArffError(lineno, "sparse rows are not supported")
    cells = [c.strip() for c in line.split(",")]
    if len(cells) != len(attributes):
        raise ArffError(lineno, f"expected {len(attributes)} values, found {len(cells)}")
    row: list[float | str] = []
    for cell, (name, kind) in zip(cells, attributes):
        if cell == "?":
            raise ArffError(lineno, f"missing value for {name!r}")
        if kind == NUMERIC:
            try:
                x = float(cell)
            except ValueError:
                raise ArffError(lineno, f"{cell!r} is not a number") from None
            if not math.isfinite(x):
                raise ArffError(lineno, f"non-finite value {cell!r}")
            row.append(x)
        else:
            value = _unquote(cell)
            if value not in kind:
                raise ArffError(lineno, f"{cell!r} not in nominal set of {name!r}")
            row.append(value)
    return row


def to_dataset(doc: ArffDocument) -> Dataset:
    """Numeric feature columns plus a final nominal ``{0,1}`` class."""
    lines = doc.attribute_lines or [None] * len(doc.attributes)
    if len(doc.attributes) < 2:
        raise ArffError(lines[-1], "need at least one feature and a class attribute")
    *features, (class_name, class_kind) = doc.attributes
    if class_kind == NUMERIC or set(class_kind) != {"0", "1"}:
        raise ArffError(lines[-1], f"class attribute {class_name!r} must be nominal {{0,1}}")
    for (name, kind), line in zip(features, lines):
        if kind != NUMERIC:
            raise ArffError(line, f"feature {name!r} must be NUMERIC")
        if name == CLASS_ATTRIBUTE:
            raise ArffError(line, f"feature may not be named {CLASS_ATTRIBUTE!r}")
    return Dataset(
        tuple(name for name, _ in features),
        tuple(tuple(r[:-1]) for r in doc.rows),
        tuple(int(r[-1]) for r in doc.rows),
        meta=replace(DatasetMeta(), relation=doc.relation),
    )


def read_arff(source: Union[bytes, str, IO]) -> Dataset:
    return to_dataset(parse_arff(source))
