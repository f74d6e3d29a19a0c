"""Rule-based sentence segmentation over placeholder-substituted text.

Splits at terminal punctuation runs ([.!?]+) followed by whitespace and at
newlines, with a fixed abbreviation exception list for periods ("e.g.",
"i.e.", "etc.", "vs." and a few honorifics). Placeholder tokens contain no
terminal punctuation, so they are never split.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..textprep import tokenize

QUESTION = "question"
ANSWER = "answer"

# Words whose trailing period does not end a sentence (compared lowercase,
# without the final dot; internal dots kept, so "e.g." compares as "e.g").
ABBREVIATIONS = frozenset({
    "e.g", "i.e", "etc", "vs", "cf", "al", "approx", "resp",
    "dr", "mr", "mrs", "ms", "prof", "st", "inc", "ltd", "fig",
})

_BOUNDARY_RE = re.compile(r"[.!?]+(?=\s|$)")
_LAST_WORD_RE = re.compile(r"([\w.\-']+)$")


@dataclass(frozen=True)
class Sentence:
    """One sentence of a post body, addressable by (post, side, answer, index)."""

    post_id: int
    origin: str  # QUESTION or ANSWER
    answer_id: int | None
    index: int
    raw_text: str
    token_count: int

    def __post_init__(self):
        if not self.raw_text:
            raise ValueError("sentence text must be non-empty")
        if self.origin not in (QUESTION, ANSWER):
            raise ValueError(f"bad origin {self.origin!r}")


def sentence_key(s: Sentence) -> str:
    """Canonical store key: "<post_id>:<q|a>:<answer_id|->:<index>"."""
    side = "q" if s.origin == QUESTION else "a"
    aid = "-" if s.answer_id is None else str(s.answer_id)
    return f"{s.post_id}:{side}:{aid}:{s.index}"


def make_key(post_id: int, origin: str, answer_id: int | None, index: int) -> str:
    side = "q" if origin == QUESTION else "a"
    return f"{post_id}:{side}:{'-' if answer_id is None else answer_id}:{index}"


def split_sentence_texts(text: str) -> list[str]:
    """Sentence strings in document order; empty pieces dropped."""
    out: list[str] = []
    for line in text.split("\n"):
        start = 0
        for m in _BOUNDARY_RE.finditer(line):
            if "." in m.group(0) and _is_abbreviation(line, m.start()):
                continue
            piece = line[start:m.end()].strip()
            if piece:
                out.append(piece)
            start = m.end()
        tail = line[start:].strip()
        if tail:
            out.append(tail)
    return out


def _is_abbreviation(line: str, punct_start: int) -> bool:
    m = _LAST_WORD_RE.search(line, 0, punct_start)
    if not m:
        return False
    return m.group(1).lower().rstrip(".") in ABBREVIATIONS


def segment_sentences(text: str, post_id: int = 0, origin: str = QUESTION,
                      answer_id: int | None = None) -> list[Sentence]:
    """Segment substituted text into Sentence records with contiguous indices."""
    return [
        Sentence(post_id=post_id, origin=origin, answer_id=answer_id, index=i,
                 raw_text=piece, token_count=len(tokenize(piece)))
        for i, piece in enumerate(split_sentence_texts(text))
    ]
