"""Model configuration for the sentence CNN.

Two presets cover the pipeline's uses: ``sentence_relevance`` (three
parallel bigram branches projected to a 256-dim sentence representation,
for scoring sentences inside threads) and ``post_classifier`` (kernel
sizes 3/4/5 with a 128-dim projection and sigmoid head, for whole-post
classification).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

from ..errors import ConfigError

RELEVANCE = "relevance"
CLASSIFIER = "classifier"


@dataclass(frozen=True)
class CnnConfig:
    embed_dim: int
    branch_kernels: tuple[int, ...] = (2, 2, 2)
    filters_per_branch: int = 100
    projection_dim: int = 256
    head: str = RELEVANCE
    dropout_rate: float = 0.0
    learning_rate: float = 0.01
    epochs: int = 10
    batch_size: int = 32
    patience: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.embed_dim < 1:
            raise ConfigError("embed_dim must be >= 1")
        if not self.branch_kernels or any(h < 1 for h in self.branch_kernels):
            raise ConfigError("all branch kernels must be >= 1")
        if self.filters_per_branch < 1:
            raise ConfigError("filters_per_branch must be >= 1")
        if self.projection_dim < 1:
            raise ConfigError("projection_dim must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError("dropout_rate must be in [0, 1)")
        if self.head not in (RELEVANCE, CLASSIFIER):
            raise ConfigError(f"unknown head {self.head!r}")

    @property
    def max_kernel(self) -> int:
        return max(self.branch_kernels)

    @property
    def concat_dim(self) -> int:
        return self.filters_per_branch * len(self.branch_kernels)

    @classmethod
    def sentence_relevance(cls, embed_dim: int, **overrides) -> "CnnConfig":
        """Three parallel bigram branches, 256-dim projection, relevance head."""
        defaults = dict(branch_kernels=(2, 2, 2), filters_per_branch=100,
                        projection_dim=256, head=RELEVANCE)
        defaults.update(overrides)
        return cls(embed_dim=embed_dim, **defaults)

    @classmethod
    def post_classifier(cls, embed_dim: int, **overrides) -> "CnnConfig":
        """Kernel sizes 3/4/5, 128-dim projection, dropout 0.5, sigmoid head."""
        defaults = dict(branch_kernels=(3, 4, 5), filters_per_branch=128,
                        projection_dim=128, head=CLASSIFIER, dropout_rate=0.5,
                        learning_rate=0.001, epochs=10, batch_size=32, patience=8)
        defaults.update(overrides)
        return cls(embed_dim=embed_dim, **defaults)

    def to_json(self) -> str:
        obj = asdict(self)
        obj["branch_kernels"] = list(self.branch_kernels)
        return json.dumps(obj, sort_keys=True)

    @classmethod
    def from_json(cls, payload: str) -> "CnnConfig":
        obj = json.loads(payload)
        obj["branch_kernels"] = tuple(obj["branch_kernels"])
        return cls(**obj)
