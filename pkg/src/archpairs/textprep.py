"""Tokenization, normalization and n-gram generation.

Tokens are words (internal apostrophes, hyphens and number-internal dots are
kept, so "2.0" and "don't" stay whole), the four artifact placeholders as
single tokens, and the question mark. Question marks are the one punctuation
mark the downstream scoring treats as meaningful; everything else delimits.

Normalization applies, in order: lowercasing, stop-word removal, and a
deterministic suffix-rule lemmatizer backed by a small irregular-form
lexicon. No model or external data download is involved.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigError

PLACEHOLDERS = ("[external-link]", "[code-snippet]", "[figure]", "[table]")

_TOKEN_RE = re.compile(
    r"\[(?:external-link|code-snippet|figure|table)\]"  # placeholders stay whole
    r"|\w+(?:[.'\-]\w+)*"                               # words, 2.0, don't, key-value
    r"|\?"                                              # question mark is meaningful
)


def _load_lines(name: str) -> list[str]:
    text = resources.files("archpairs.data").joinpath(name).read_text("utf-8")
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]


def load_stop_list(path: str | Path | None = None) -> frozenset[str]:
    """Stop list from a plain-text file (one word per line); packaged default."""
    if path is None:
        return frozenset(_load_lines("stopwords.txt"))
    return frozenset(
        ln.strip() for ln in Path(path).read_text("utf-8").splitlines()
        if ln.strip() and not ln.startswith("#")
    )


def load_lemma_exceptions(path: str | Path | None = None) -> dict[str, str]:
    """Irregular-form lexicon, "form lemma" per line; packaged default."""
    lines = (
        _load_lines("lemma_exceptions.txt")
        if path is None
        else [ln.strip() for ln in Path(path).read_text("utf-8").splitlines()
              if ln.strip() and not ln.startswith("#")]
    )
    table: dict[str, str] = {}
    for ln in lines:
        form, lemma = ln.split()
        table[form] = lemma
    return table


DEFAULT_STOP_LIST = load_stop_list()
_IRREGULAR = load_lemma_exceptions()


@dataclass(frozen=True)
class TokenSeq:
    """An ordered token sequence; ``normalized`` marks post-normalize output."""

    tokens: tuple[str, ...]
    normalized: bool = False

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class NormalizeConfig:
    lowercase: bool = True
    remove_stopwords: bool = True
    lemmatize: bool = True
    stop_list: frozenset[str] = field(default_factory=lambda: DEFAULT_STOP_LIST)

    def __post_init__(self):
        if self.remove_stopwords and not self.stop_list:
            raise ConfigError("remove_stopwords requires a non-empty stop_list")


def tokenize(text: str) -> TokenSeq:
    """Split text into tokens; placeholders and question marks stay whole.

    Punctuation other than "?" delimits and is dropped, e.g.
    "Use OAuth 2.0!" -> ("Use", "OAuth", "2.0").
    """
    return TokenSeq(tuple(_TOKEN_RE.findall(text.replace("’", "'"))))


def _strip_suffix(word: str) -> str:
    n = len(word)
    if word.endswith("ies") and n > 4:
        return word[:-3] + "y"
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith(("ches", "shes", "xes", "zes")) and n > 4:
        return word[:-2]
    if word.endswith("ied") and n > 4:
        return word[:-3] + "y"
    if word.endswith("ing") and n >= 6:
        return _undouble(word[:-3])
    if word.endswith("ed") and n >= 5:
        return _undouble(word[:-2])
    if word.endswith("s") and not word.endswith(("ss", "us", "is")) and n >= 4:
        return word[:-1]
    return word


def lemmatize_token(word: str) -> str:
    """Deterministic suffix-rule lemma; irregular lexicon consulted first.

    Iterates to a fixpoint so chained suffixes ("runnings") and irregular
    stems reached via stripping ("betters" -> "better" -> "good") resolve
    in one call, keeping lemmatization idempotent.
    """
    prev = None
    while word != prev:
        prev = word
        word = _IRREGULAR[word] if word in _IRREGULAR else _strip_suffix(word)
    return word


def _undouble(stem: str) -> str:
    if len(stem) >= 3 and stem[-1] == stem[-2] and stem[-1] not in "lsz" and stem[-1].isalpha():
        return stem[:-1]
    return stem


def normalize(ts: TokenSeq, cfg: NormalizeConfig | None = None) -> TokenSeq:
    """Apply lowercase -> stop-word removal -> lemmatization, per config flags."""
    cfg = cfg or NormalizeConfig()
    tokens = list(ts.tokens)
    if cfg.lowercase:
        tokens = [t.lower() for t in tokens]
    if cfg.remove_stopwords:
        tokens = [t for t in tokens if t not in cfg.stop_list]
    if cfg.lemmatize:
        tokens = [lemmatize_token(t) if t not in PLACEHOLDERS else t for t in tokens]
    return TokenSeq(tuple(tokens), normalized=True)


def ngrams(ts: TokenSeq, n_min: int, n_max: int) -> list[str]:
    """All contiguous n-grams for n in [n_min, n_max], space-joined, document order."""
    if not 1 <= n_min <= n_max:
        raise ConfigError(f"invalid n-gram range [{n_min}, {n_max}]")
    toks = ts.tokens
    out: list[str] = []
    for n in range(n_min, n_max + 1):
        out.extend(" ".join(toks[i:i + n]) for i in range(len(toks) - n + 1))
    return out
