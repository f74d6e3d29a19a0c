"""Markup stripping and placeholder substitution for post bodies.

The stripper walks the markup once, keeps human-readable text, and records
every link, code block, image, and table as an ArtifactSpan. Substitution
then injects the four placeholder tokens at the recorded positions:

    [external-link]  appended right after the anchor text of a hyperlink
    [code-snippet]   replaces a <pre>/<code> block (content dropped)
    [figure]         replaces an <img> element
    [table]          replaces a <table> element (content dropped)

Malformed markup is never fatal: unclosed elements are closed at end of
input and the resulting span is flagged ``recovered``. Artifacts nested
inside an open hyperlink collapse into the hyperlink's span so spans never
overlap.
"""

from __future__ import annotations

import html
import re
from dataclasses import dataclass

LINK = "link"
CODE = "code"
FIGURE = "figure"
TABLE = "table"

REPLACEMENTS = {
    LINK: "[external-link]",
    CODE: "[code-snippet]",
    FIGURE: "[figure]",
    TABLE: "[table]",
}

_TAG_RE = re.compile(r"<!--.*?-->|<(/?)([a-zA-Z][a-zA-Z0-9]*)((?:[^>\"']|\"[^\"]*\"|'[^']*')*?)(/?)>", re.S)
_HREF_RE = re.compile(r"""href\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s>]+))""", re.I)

_BLOCK_TAGS = frozenset({
    "p", "br", "div", "li", "ul", "ol", "h1", "h2", "h3", "h4", "h5", "h6",
    "blockquote", "hr", "tr", "td", "th", "pre", "table", "dt", "dd",
})


@dataclass(frozen=True)
class ArtifactSpan:
    """A non-text artifact found in the markup.

    ``start``/``end`` are character offsets into the original markup;
    ``plain_pos`` is where the placeholder belongs in the stripped text.
    """

    kind: str
    start: int
    end: int
    replacement: str
    plain_pos: int
    target: str | None = None
    recovered: bool = False

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"bad span offsets [{self.start}, {self.end})")
        if self.replacement != REPLACEMENTS[self.kind]:
            raise ValueError(f"span kind {self.kind} with replacement {self.replacement!r}")


class _PlainBuilder:
    """Accumulates stripped text with collapsed whitespace."""

    def __init__(self):
        self._parts: list[str] = []
        self._pending = ""  # "", " " or "\n"

    def text(self, raw: str) -> None:
        for piece in re.split(r"(\s+)", raw):
            if not piece:
                continue
            if piece.isspace():
                if self._parts and not self._pending:
                    self._pending = " "
            else:
                if self._pending:
                    self._parts.append(self._pending)
                    self._pending = ""
                self._parts.append(piece)

    def block_break(self) -> None:
        if self._parts:
            self._pending = "\n"

    def position(self) -> int:
        return sum(len(p) for p in self._parts)

    def result(self) -> str:
        return "".join(self._parts)


def strip_markup(body_markup: str) -> tuple[str, list[ArtifactSpan]]:
    """Drop tags, keep text, record artifacts.

    Returns the plain text (whitespace collapsed, newline at block
    boundaries) and the artifact spans in document order.
    """
    out = _PlainBuilder()
    spans: list[ArtifactSpan] = []
    open_link: tuple[int, str | None] | None = None  # (markup start, href)
    pos = 0
    n = len(body_markup)

    while pos < n:
        m = _TAG_RE.search(body_markup, pos)
        if m is None:
            out.text(html.unescape(body_markup[pos:]))
            break
        if m.start() > pos:
            out.text(html.unescape(body_markup[pos:m.start()]))
        pos = m.end()
        if m.group(2) is None:  # comment
            continue
        closing, name, attrs, selfclosed = m.group(1), m.group(2).lower(), m.group(3), m.group(4)

        if name == "a":
            if not closing and open_link is None:
                href = _HREF_RE.search(attrs or "")
                target = next((g for g in href.groups() if g is not None), None) if href else None
                open_link = (m.start(), target)
            elif closing and open_link is not None:
                start, target = open_link
                spans.append(ArtifactSpan(LINK, start, m.end(), REPLACEMENTS[LINK],
                                          out.position(), target=target))
                open_link = None
            continue

        if name == "img" and not closing:
            if open_link is None:  # inside a link the artifact collapses into it
                spans.append(ArtifactSpan(FIGURE, m.start(), m.end(),
                                          REPLACEMENTS[FIGURE], out.position()))
            continue

        if name in ("pre", "code", "table") and not closing and not selfclosed:
            kind = TABLE if name == "table" else CODE
            if name in ("pre", "table"):  # block-level; bare <code> is inline
                out.block_break()
            end, recovered = _consume_element(body_markup, name, pos)
            if open_link is None:
                spans.append(ArtifactSpan(kind, m.start(), end, REPLACEMENTS[kind],
                                          out.position(), recovered=recovered))
            if name in ("pre", "table"):
                out.block_break()
            pos = end
            continue

        if name in _BLOCK_TAGS:
            out.block_break()

    if open_link is not None:
        start, target = open_link
        spans.append(ArtifactSpan(LINK, start, n, REPLACEMENTS[LINK],
                                  out.position(), target=target, recovered=True))

    spans.sort(key=lambda s: (s.start, s.end))
    return out.result(), spans


def _consume_element(markup: str, name: str, pos: int) -> tuple[int, bool]:
    """Scan past the matching close tag of ``name``; best-effort at EOF."""
    depth = 1
    for m in _TAG_RE.finditer(markup, pos):
        if m.group(2) is None or m.group(2).lower() != name:
            continue
        if m.group(1):  # closing
            depth -= 1
            if depth == 0:
                return m.end(), False
        elif not m.group(4):
            depth += 1
    return len(markup), True


def substitute_placeholders(plain: str, spans: list[ArtifactSpan]) -> str:
    """Insert each span's placeholder token at its recorded position.

    Tokens are set off by single spaces from adjacent non-space text:
    "Use this guide" + link span at the end -> "Use this guide [external-link]".
    """
    pieces: list[str] = []
    cursor = 0
    for span in sorted(spans, key=lambda s: (s.plain_pos, s.start)):
        p = span.plain_pos
        pieces.append(plain[cursor:p])
        before = "".join(pieces)
        left_pad = "" if (not before or before[-1].isspace()) else " "
        right = plain[p:]
        right_pad = "" if (not right or right[0].isspace()) else " "
        pieces.append(f"{left_pad}{span.replacement}{right_pad}")
        cursor = p
    pieces.append(plain[cursor:])
    return "".join(pieces)
