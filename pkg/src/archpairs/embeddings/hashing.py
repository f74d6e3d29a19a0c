"""Deterministic feature-hashing embedder (test/default provider).

Tokens are lowercased and hashed with BLAKE2 into ``dim`` buckets with a
sign bit; the result is L2-normalized. The same (text, dim, seed) always
produces the same vector on any platform, so it can stand in for a
transformer encoder wherever tests need reproducible sentence vectors.
"""

from __future__ import annotations

import hashlib

import numpy as np

from ..errors import ConfigError
from ..textprep import tokenize
from .vectors import DenseVector


def _bucket_sign(token: str, dim: int, seed: int) -> tuple[int, float]:
    digest = hashlib.blake2b(f"{seed}:{token}".encode("utf-8"), digest_size=9).digest()
    bucket = int.from_bytes(digest[:8], "big") % dim
    sign = 1.0 if digest[8] & 1 else -1.0
    return bucket, sign


def hash_embed(text: str, dim: int = 256, seed: int = 0) -> DenseVector:
    """Hash the text's tokens into a fixed-dimension unit vector.

    Empty or token-free text yields the zero vector (which cosine treats
    as similarity 0 everywhere).
    """
    if dim < 1:
        raise ConfigError(f"hash embedding dim must be >= 1, got {dim}")
    acc = np.zeros(dim)
    for token in tokenize(text).tokens:
        bucket, sign = _bucket_sign(token.lower(), dim, seed)
        acc[bucket] += sign
    norm = np.linalg.norm(acc)
    if norm > 0:
        acc /= norm
    return DenseVector(dim=dim, values=acc)


def hash_token_vector(token: str, dim: int = 256, seed: int = 0) -> DenseVector:
    """Single-token variant used to build sentence matrices."""
    if dim < 1:
        raise ConfigError(f"hash embedding dim must be >= 1, got {dim}")
    acc = np.zeros(dim)
    bucket, sign = _bucket_sign(token.lower(), dim, seed)
    acc[bucket] = sign
    return DenseVector(dim=dim, values=acc)
