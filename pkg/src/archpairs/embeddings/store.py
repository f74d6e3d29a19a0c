"""Per-sentence embedding store and its jsonl file format.

One object per line: {"key": "<post>:<q|a>:<answer|->:<idx>", "dim": D,
"vec": [..]}. All vectors in a store share one dimension; keys are unique.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np

from ..errors import FormatError
from .vectors import DenseVector


@dataclass
class EmbeddingStore:
    dim: int
    vectors: dict[str, DenseVector]

    def __contains__(self, key: str) -> bool:
        return key in self.vectors

    def get(self, key: str) -> DenseVector | None:
        return self.vectors.get(key)

    def put(self, key: str, vec: DenseVector) -> None:
        if vec.dim != self.dim:
            raise FormatError(f"store dim {self.dim}, vector dim {vec.dim} for {key!r}")
        if key in self.vectors:
            raise FormatError(f"duplicate store key {key!r}")
        self.vectors[key] = vec


def save_store(store: EmbeddingStore, fh: IO[str]) -> None:
    for key, vec in store.vectors.items():
        fh.write(json.dumps(
            {"key": key, "dim": store.dim, "vec": [float(x) for x in vec.values]}) + "\n")


def load_store(source: str | Path | IO[str]) -> EmbeddingStore:
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
        try:
            obj = json.loads(line)
            key, d, vec = obj["key"], int(obj["dim"]), obj["vec"]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"embedding store line {lineno}: {exc}") from exc
        if dim is None:
            dim = d
        if d != dim or len(vec) != dim:
            raise FormatError(f"embedding store line {lineno}: dim mismatch ({d} vs {dim})")
        if key in vectors:
            raise FormatError(f"embedding store line {lineno}: duplicate key {key!r}")
        vectors[key] = DenseVector(dim=dim, values=np.array(vec, dtype=np.float64))
    return EmbeddingStore(dim=dim or 0, vectors=vectors)
