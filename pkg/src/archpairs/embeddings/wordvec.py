"""Pretrained word-vector ingestion and mean pooling."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping

import numpy as np

from ..errors import CoverageError, FormatError
from .vectors import DenseVector

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class WordVectorTable:
    dim: int
    vectors: dict[str, DenseVector]

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def get(self, token: str) -> DenseVector | None:
        return self.vectors.get(token)


def load_word_vectors(source: str | Path | IO[str]) -> WordVectorTable:
    """Parse the "token v1 v2 ... vd" text format; dim comes from line 1.

    A line with a different number of components raises with its line number;
    duplicate tokens keep the last occurrence (warned).
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    else:
        lines = source.read().splitlines()
    dim: int | None = None
    vectors: dict[str, DenseVector] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.split()
        token, comps = parts[0], parts[1:]
        if dim is None:
            dim = len(comps)
            if dim == 0:
                raise FormatError(f"word-vector line {lineno}: no components")
        if len(comps) != dim:
            raise FormatError(
                f"word-vector line {lineno}: expected {dim} components, got {len(comps)}")
        try:
            values = np.array([float(c) for c in comps])
        except ValueError as exc:
            raise FormatError(f"word-vector line {lineno}: {exc}") from exc
        if token in vectors:
            log.warning("duplicate word vector for %r (line %d); keeping last", token, lineno)
        vectors[token] = DenseVector(dim=dim, values=values)
    if dim is None:
        raise FormatError("empty word-vector file")
    return WordVectorTable(dim=dim, vectors=vectors)


def pooled_embedding(tokens: Iterable[str],
                     source: WordVectorTable | Mapping[str, DenseVector]) -> DenseVector:
    """Arithmetic mean of the available token vectors; uncovered tokens skipped."""
    lookup = source.vectors if isinstance(source, WordVectorTable) else source
    rows = [lookup[t].values for t in tokens if t in lookup]
    if not rows:
        raise CoverageError("no token in the sequence has a vector")
    mean = np.mean(np.stack(rows), axis=0)
    return DenseVector(dim=mean.shape[0], values=mean)
