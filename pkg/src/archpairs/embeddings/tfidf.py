"""Smoothed TF-IDF over token n-grams.

idf(t) = ln((1 + N) / (1 + df(t))) + 1 with N documents; document vectors
are tf * idf, L2-normalized. Vocabulary indices are assigned in sorted
n-gram order so fitting is deterministic.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..textprep import TokenSeq, ngrams
from .vectors import SparseVector


@dataclass(frozen=True)
class TfidfModel:
    vocabulary: dict[str, int]
    idf: np.ndarray
    n_min: int
    n_max: int
    doc_count: int


def fit_tfidf(docs: list[TokenSeq], n_min: int = 1, n_max: int = 1) -> TfidfModel:
    """Fit vocabulary and idf weights on token sequences."""
    if not docs or all(len(d) == 0 for d in docs):
        raise ConfigError("cannot fit tf-idf on an empty corpus")
    df: Counter[str] = Counter()
    for doc in docs:
        df.update(set(ngrams(doc, n_min, n_max)))
    vocab = {term: i for i, term in enumerate(sorted(df))}
    n = len(docs)
    idf = np.empty(len(vocab))
    for term, col in vocab.items():
        idf[col] = math.log((1 + n) / (1 + df[term])) + 1.0
    return TfidfModel(vocabulary=vocab, idf=idf, n_min=n_min, n_max=n_max, doc_count=n)


def tfidf_vector(model: TfidfModel, doc: TokenSeq) -> SparseVector:
    """tf*idf entries for one document, L2-normalized; OOV n-grams ignored."""
    tf: Counter[int] = Counter()
    for gram in ngrams(doc, model.n_min, model.n_max):
        col = model.vocabulary.get(gram)
        if col is not None:
            tf[col] += 1
    if not tf:
        return SparseVector(dim=len(model.vocabulary), entries=())
    entries = sorted((col, count * model.idf[col]) for col, count in tf.items())
    norm = math.sqrt(sum(v * v for _, v in entries))
    return SparseVector(
        dim=len(model.vocabulary),
        entries=tuple((col, v / norm) for col, v in entries),
    )
