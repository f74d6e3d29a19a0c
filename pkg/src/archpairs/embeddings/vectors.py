"""Sparse/dense vector types and cosine similarity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError


@dataclass(frozen=True, eq=False)
class DenseVector:
    dim: int
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if self.values.shape != (self.dim,):
            raise ConfigError(f"dense vector shape {self.values.shape} != ({self.dim},)")
        if not np.all(np.isfinite(self.values)):
            raise ConfigError("dense vector has non-finite values")

    @classmethod
    def of(cls, values) -> "DenseVector":
        arr = np.asarray(values, dtype=np.float64)
        return cls(dim=arr.shape[0], values=arr)


@dataclass(frozen=True)
class SparseVector:
    """Sorted (index, value) pairs over a fixed dimensionality."""

    dim: int
    entries: tuple[tuple[int, float], ...]

    def __post_init__(self):
        prev = -1
        for idx, val in self.entries:
            if not prev < idx < self.dim:
                raise ConfigError(f"sparse index {idx} out of order or >= dim {self.dim}")
            if not np.isfinite(val):
                raise ConfigError(f"sparse value at {idx} not finite")
            prev = idx

    def to_dense(self) -> np.ndarray:
        arr = np.zeros(self.dim)
        for idx, val in self.entries:
            arr[idx] = val
        return arr

    def norm(self) -> float:
        return float(np.sqrt(sum(v * v for _, v in self.entries)))


def _as_array(v) -> np.ndarray:
    if isinstance(v, DenseVector):
        return v.values
    if isinstance(v, SparseVector):
        return v.to_dense()
    return np.asarray(v, dtype=np.float64)


def cosine(u, v) -> float:
    """Cosine similarity in [-1, 1]; zero-norm inputs score 0 by definition."""
    ua, va = _as_array(u), _as_array(v)
    if ua.shape != va.shape:
        raise ConfigError(f"cosine dim mismatch: {ua.shape} vs {va.shape}")
    nu, nv = np.linalg.norm(ua), np.linalg.norm(va)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(ua, va) / (nu * nv))
