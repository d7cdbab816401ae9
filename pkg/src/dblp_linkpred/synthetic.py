"""Synthetic bibliographies with community structure, and DBLP-style XML for them."""

from __future__ import annotations

import io
import random
from typing import Iterator, Sequence
from xml.sax.saxutils import escape, quoteattr

from .ingest import Publication

# a few names that need the Latin-1 entity table when written DBLP-style
_ACCENTED = ("M&uuml;ller", "Jos&eacute;", "G&ouml;del", "Fran&ccedil;ois", "&Aring;str&ouml;m")
_ENTITY_CHARS = {"&uuml;": "ü", "&eacute;": "é", "&ouml;": "ö", "&ccedil;": "ç", "&Aring;": "Å"}


def author_names(n: int, accented_every: int = 0) -> list[str]:
    names = []
    for i in range(n):
        if accented_every and i % accented_every == 0:
            base = _ACCENTED[(i // accented_every) % len(_ACCENTED)]
            for ent, ch in _ENTITY_CHARS.items():
                base = base.replace(ent, ch)
            names.append(f"{base} {i:04d}")
        else:
            names.append(f"Author {i:04d}")
    return names


def community_publications(
    n_authors: int = 2000,
    n_papers: int = 2000,
    community_size: int = 25,
    mix: float = 0.05,
    max_authors: int = 4,
    years: tuple[int, int] = (2012, 2018),
    seed: int = 0,
    accented_every: int = 0,
) -> list[Publication]:
    """Papers written within communities of ``community_size`` authors.

    Each paper draws 2..``max_authors`` authors from one community; with
    probability ``mix`` one co-author comes from anywhere instead. Every
    author is guaranteed at least one paper, so the author count is exact
    when ``n_papers`` is large enough.
    """
    rng = random.Random(seed)
    names = author_names(n_authors, accented_every)
    communities = [
        list(range(s, min(s + community_size, n_authors))) for s in range(0, n_authors, community_size)
    ]
    unused = list(range(n_authors))
    rng.shuffle(unused)
    pubs = []
    for i in range(n_papers):
        if unused:
            first = unused.pop()
            group = communities[first // community_size]
        else:
            group = rng.choice(communities)
            first = rng.choice(group)
        size = rng.randint(2, max_authors)
        others = [a for a in group if a != first]
        team = [first, *rng.sample(others, min(size - 1, len(others)))]
        if rng.random() < mix:
            team[-1] = rng.randrange(n_authors)
        team = list(dict.fromkeys(team))
        kind = "article" if rng.random() < 0.5 else "inproceedings"
        pubs.append(
            Publication(
                key=f"synth/{kind[:4]}/{i:06d}",
                kind=kind,
                title=f"On topic {rng.randrange(10_000)} number {i}.",
                year=rng.randint(*years),
                authors=tuple(names[a] for a in team),
            )
        )
    return pubs


def _encode_name(name: str) -> str:
    text = escape(name)
    for ent, ch in _ENTITY_CHARS.items():
        text = text.replace(ch, ent)
    return text


def record_xml(pub: Publication, extras: bool = True) -> str:
    """One record in DBLP layout, multi-line, with fields the parser skips."""
    out = [f"<{pub.kind} mdate=\"2019-01-01\" key={quoteattr(pub.key)}>"]
    out += [f"<author>{_encode_name(a)}</author>" for a in pub.authors]
    out.append(f"<title>{escape(pub.title)}</title>")
    if extras:
        out.append("<pages>1-10</pages>")
    if pub.year is not None:
        out.append(f"<year>{pub.year}</year>")
    if extras:
        out.append(f"<ee>https://doi.org/10.0000/{escape(pub.key)}</ee>")
        out.append(f"<url>db/{escape(pub.key)}.html</url>")
    out.append(f"</{pub.kind}>")
    return "\n".join(out) + "\n"


_HEADER = '<?xml version="1.0" encoding="ISO-8859-1"?>\n<!DOCTYPE dblp SYSTEM "dblp.dtd">\n<dblp>\n'
_WWW = '<www mdate="2019-01-01" key="homepages/x/{0}">\n<author>Home Page {0}</author>\n<title>Home Page</title>\n<url>https://example.org/{0}</url>\n</www>\n'


def dblp_xml(pubs: Sequence[Publication], www_every: int = 0) -> bytes:
    """A DBLP-flavoured Latin-1 document; a ``<www>`` record after every ``www_every`` papers."""
    buf = io.StringIO()
    buf.write(_HEADER)
    for i, p in enumerate(pubs, 1):
        buf.write(record_xml(p))
        if www_every and i % www_every == 0:
            buf.write(_WWW.format(i))
    buf.write("</dblp>\n")
    return buf.getvalue().encode("iso-8859-1")


class LargeXmlStream(io.RawIOBase):
    """A read-only stream of about ``size`` bytes of generated DBLP XML.

    Records are produced on demand, so the document never exists in memory.
    """

    def __init__(self, size: int, seed: int = 0):
        self.size = size
        self.records = 0
        self._rng = random.Random(seed)
        self._chunks = self._generate()
        self._buf = b""

    def _generate(self) -> Iterator[bytes]:
        yield _HEADER.encode()
        produced = len(_HEADER)
        i = 0
        while produced < self.size:
            authors = tuple(f"Author {self._rng.randrange(100_000):05d}" for _ in range(3))
            pub = Publication(f"big/{i}", "article", f"Title {i}.", 2000 + i % 20, tuple(dict.fromkeys(authors)))
            chunk = record_xml(pub).encode()
            produced += len(chunk)
            self.records += 1
            i += 1
            yield chunk
        yield b"</dblp>\n"

    def readable(self) -> bool:
        return True

    def readinto(self, b) -> int:
        while len(self._buf) < len(b):
            nxt = next(self._chunks, None)
            if nxt is None:
                break
            self._buf += nxt
        n = min(len(b), len(self._buf))
        b[:n] = self._buf[:n]
        self._buf = self._buf[n:]
        return n
