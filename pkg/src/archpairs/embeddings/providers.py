"""Embedding providers: map thread sentences to vectors and token matrices.

Three providers back the extraction pipeline:

  HashEmbedder        deterministic feature hashing (default, test-friendly)
  WordVectorEmbedder  mean-pooled pretrained word vectors
  StoreEmbedder       precomputed per-sentence vectors from a store file

Sentence vectors feed the similarity features; token matrices (rows per
token) feed the local CNN features. A store holds sentence vectors only,
so StoreEmbedder reports no token matrices and the CNN feature falls back
to its neutral score.
"""

from __future__ import annotations

import numpy as np

from ..corpus.assemble import ARP
from ..corpus.sentences import Sentence, sentence_key
from ..errors import CoverageError
from ..textprep import tokenize
from .hashing import hash_embed, hash_token_vector
from .store import EmbeddingStore
from .vectors import DenseVector
from .wordvec import WordVectorTable


class HashEmbedder:
    def __init__(self, dim: int = 256, seed: int = 0):
        self.dim = dim
        self.seed = seed

    def sentence_vector(self, key: str, sentence: Sentence) -> DenseVector:
        return hash_embed(sentence.raw_text, dim=self.dim, seed=self.seed)

    def token_matrix(self, key: str, sentence: Sentence) -> np.ndarray:
        tokens = tokenize(sentence.raw_text).tokens
        if not tokens:
            return np.zeros((0, self.dim))
        return np.stack([hash_token_vector(t, self.dim, self.seed).values for t in tokens])


class WordVectorEmbedder:
    """Pools lowercased token vectors; fully-uncovered sentences become zero."""

    def __init__(self, table: WordVectorTable):
        self.table = table
        self.dim = table.dim

    def _rows(self, sentence: Sentence) -> list[np.ndarray]:
        rows = []
        for tok in tokenize(sentence.raw_text).tokens:
            vec = self.table.get(tok.lower())
            if vec is not None:
                rows.append(vec.values)
        return rows

    def sentence_vector(self, key: str, sentence: Sentence) -> DenseVector:
        rows = self._rows(sentence)
        if not rows:
            return DenseVector(dim=self.dim, values=np.zeros(self.dim))
        return DenseVector(dim=self.dim, values=np.mean(np.stack(rows), axis=0))

    def token_matrix(self, key: str, sentence: Sentence) -> np.ndarray:
        rows = self._rows(sentence)
        if not rows:
            return np.zeros((0, self.dim))
        return np.stack(rows)


class StoreEmbedder:
    def __init__(self, store: EmbeddingStore):
        self.store = store
        self.dim = store.dim

    def sentence_vector(self, key: str, sentence: Sentence) -> DenseVector:
        vec = self.store.get(key)
        if vec is None:
            raise CoverageError(f"embedding store has no vector for key {key!r}")
        return vec

    def token_matrix(self, key: str, sentence: Sentence) -> None:
        return None


def sentence_embeddings(arp: ARP, provider) -> dict[str, DenseVector]:
    """Sentence vector per key for every sentence of the thread."""
    return {
        sentence_key(s): provider.sentence_vector(sentence_key(s), s)
        for s in arp.all_sentences()
    }


def token_matrices(arp: ARP, provider) -> dict[str, np.ndarray] | None:
    """Token matrix per key, or None when the provider cannot supply them."""
    out: dict[str, np.ndarray] = {}
    for s in arp.all_sentences():
        key = sentence_key(s)
        mat = provider.token_matrix(key, s)
        if mat is None:
            return None
        out[key] = mat
    return out
