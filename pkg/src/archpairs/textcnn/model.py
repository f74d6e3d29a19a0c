"""Sentence CNN: forward pass, Adam training, gradient check, persistence.

Per branch i the sentence matrix X (T x d) is convolved with kernels W_i
(valid convolution of length T - h_i + 1), passed through ReLU and
max-pooled over positions into filters_per_branch values. The pooled
branches are concatenated and affinely projected to the sentence
representation z; a logistic head turns z into a relevance/class score.
Gradients flow only to the weights: sentence matrices are inputs supplied
by an embedding provider, not learned parameters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigError, FormatError
from . import kernels
from .config import CnnConfig

_FORMAT_VERSION = 1


@dataclass
class CnnWeights:
    config: CnnConfig
    conv_w: list[np.ndarray]  # per branch: (F, h_i, d)
    conv_b: list[np.ndarray]  # per branch: (F,)
    proj_w: np.ndarray        # (P, sum F)
    proj_b: np.ndarray        # (P,)
    head_w: np.ndarray        # (P,)
    head_b: np.ndarray        # (1,)

    def copy(self) -> "CnnWeights":
        return CnnWeights(
            config=self.config,
            conv_w=[w.copy() for w in self.conv_w],
            conv_b=[b.copy() for b in self.conv_b],
            proj_w=self.proj_w.copy(), proj_b=self.proj_b.copy(),
            head_w=self.head_w.copy(), head_b=self.head_b.copy(),
        )

    def arrays(self) -> list[np.ndarray]:
        return [*self.conv_w, *self.conv_b, self.proj_w, self.proj_b,
                self.head_w, self.head_b]


def init_weights(config: CnnConfig, rng: np.random.Generator | None = None) -> CnnWeights:
    rng = rng or np.random.default_rng(config.seed)
    d, F, P = config.embed_dim, config.filters_per_branch, config.projection_dim
    conv_w, conv_b = [], []
    for h in config.branch_kernels:
        scale = np.sqrt(2.0 / (h * d + F))
        conv_w.append(rng.normal(0.0, scale, size=(F, h, d)))
        conv_b.append(np.zeros(F))
    cdim = config.concat_dim
    proj_w = rng.normal(0.0, np.sqrt(2.0 / (cdim + P)), size=(P, cdim))
    head_w = rng.normal(0.0, np.sqrt(2.0 / (P + 1)), size=P)
    return CnnWeights(config=config, conv_w=conv_w, conv_b=conv_b,
                      proj_w=proj_w, proj_b=np.zeros(P),
                      head_w=head_w, head_b=np.zeros(1))


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + np.exp(-x))
    e = np.exp(x)
    return e / (1.0 + e)


def _bce(logit: float, y: float) -> float:
    # stable: max(l,0) - l*y + log(1 + exp(-|l|))
    return float(max(logit, 0.0) - logit * y + np.log1p(np.exp(-abs(logit))))


@dataclass
class _Forward:
    pooled: list[np.ndarray]
    amax: list[np.ndarray]
    active: list[np.ndarray]
    c: np.ndarray
    z: np.ndarray
    z_used: np.ndarray
    mask: np.ndarray | None
    logit: float
    score: float


def _check_input(x: np.ndarray, config: CnnConfig) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != config.embed_dim:
        raise ConfigError(
            f"sentence matrix shape {x.shape} incompatible with embed_dim {config.embed_dim}")
    if x.shape[0] < config.max_kernel:
        raise ConfigError(
            f"sentence of {x.shape[0]} tokens shorter than max kernel {config.max_kernel}")
    return x


def _run_forward(x: np.ndarray, w: CnnWeights, *, mask: np.ndarray | None = None) -> _Forward:
    cfg = w.config
    pooled, amax, active = [], [], []
    for cw, cb in zip(w.conv_w, w.conv_b):
        p, a, g = kernels.branch_forward(x, cw, cb)
        pooled.append(p)
        amax.append(a)
        active.append(g)
    c = np.concatenate(pooled)
    z = w.proj_w @ c + w.proj_b
    if mask is not None:
        z_used = z * mask / (1.0 - cfg.dropout_rate)
    else:
        z_used = z
    logit = float(w.head_w @ z_used + w.head_b[0])
    return _Forward(pooled=pooled, amax=amax, active=active, c=c, z=z,
                    z_used=z_used, mask=mask, logit=logit, score=_sigmoid(logit))


def cnn_forward(sentence_matrix: np.ndarray, weights: CnnWeights) -> tuple[np.ndarray, float]:
    """Inference pass: (sentence representation z, head score in (0,1))."""
    x = _check_input(sentence_matrix, weights.config)
    state = _run_forward(x, weights)
    return state.z, state.score


def _zero_grads(w: CnnWeights) -> list[np.ndarray]:
    return [np.zeros_like(a) for a in w.arrays()]


def _accumulate_grads(x: np.ndarray, y: float, w: CnnWeights,
                      grads: list[np.ndarray], scale: float,
                      mask: np.ndarray | None = None) -> float:
    """Add d(scale * bce)/dw for one example into grads; returns the loss."""
    cfg = w.config
    state = _run_forward(x, w, mask=mask)
    nb = len(cfg.branch_kernels)
    g_conv_w, g_conv_b = grads[:nb], grads[nb:2 * nb]
    g_proj_w, g_proj_b, g_head_w, g_head_b = grads[2 * nb:2 * nb + 4]

    dlogit = (state.score - y) * scale
    g_head_w += dlogit * state.z_used
    g_head_b += dlogit
    dz = dlogit * w.head_w
    if state.mask is not None:
        dz = dz * state.mask / (1.0 - cfg.dropout_rate)
    g_proj_w += np.outer(dz, state.c)
    g_proj_b += dz
    dc = w.proj_w.T @ dz

    offset = 0
    for i, h in enumerate(cfg.branch_kernels):
        F = cfg.filters_per_branch
        dpooled = dc[offset:offset + F] * state.active[i]
        windows = np.lib.stride_tricks.sliding_window_view(
            x, (h, cfg.embed_dim)).reshape(-1, h, cfg.embed_dim)
        g_conv_w[i] += dpooled[:, None, None] * windows[state.amax[i]]
        g_conv_b[i] += dpooled
        offset += F
    return _bce(state.logit, y) * scale


class _Adam:
    def __init__(self, arrays: list[np.ndarray], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(a) for a in arrays]
        self.v = [np.zeros_like(a) for a in arrays]
        self.t = 0

    def step(self, arrays: list[np.ndarray], grads: list[np.ndarray]) -> None:
        self.t += 1
        b1t = 1.0 - self.beta1 ** self.t
        b2t = 1.0 - self.beta2 ** self.t
        for a, g, m, v in zip(arrays, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            a -= self.lr * (m / b1t) / (np.sqrt(v / b2t) + self.eps)


def _dataset_loss(examples, w: CnnWeights) -> float:
    total = 0.0
    for x, y in examples:
        state = _run_forward(x, w)
        total += _bce(state.logit, float(y))
    return total / len(examples)


def cnn_train(examples: list[tuple[np.ndarray, int]], config: CnnConfig) -> CnnWeights:
    """Minimize binary cross-entropy with Adam; deterministic given config.seed.

    Early stopping watches the loss on the last 10% of the seed-shuffled
    data and restores the best weights seen. Requires examples of both
    classes.
    """
    if not examples:
        raise ConfigError("no training examples")
    labels = {int(y) for _, y in examples}
    if labels - {0, 1}:
        raise ConfigError(f"labels must be 0/1, got {sorted(labels)}")
    if len(labels) < 2:
        raise ConfigError("training requires both classes")
    data = [(_check_input(x, config), float(y)) for x, y in examples]

    rng = np.random.default_rng(config.seed)
    weights = init_weights(config, rng)
    order = rng.permutation(len(data))
    n_val = max(1, int(round(0.1 * len(data)))) if len(data) > 1 else 0
    train_idx = order[:len(data) - n_val]
    val_idx = order[len(data) - n_val:]
    train_set = [data[i] for i in train_idx]
    val_set = [data[i] for i in val_idx]
    if not train_set:
        train_set, val_set = list(data), list(data)

    arrays = weights.arrays()
    opt = _Adam(arrays, lr=config.learning_rate)
    best_loss = np.inf
    best = weights.copy()
    bad_epochs = 0

    for _ in range(config.epochs):
        perm = rng.permutation(len(train_set))
        for start in range(0, len(perm), config.batch_size):
            batch = [train_set[i] for i in perm[start:start + config.batch_size]]
            grads = _zero_grads(weights)
            scale = 1.0 / len(batch)
            for x, y in batch:
                mask = None
                if config.dropout_rate > 0.0:
                    mask = (rng.random(config.projection_dim)
                            >= config.dropout_rate).astype(np.float64)
                _accumulate_grads(x, y, weights, grads, scale, mask=mask)
            opt.step(arrays, grads)
        val_loss = _dataset_loss(val_set or train_set, weights)
        if val_loss < best_loss - 1e-12:
            best_loss = val_loss
            best = weights.copy()
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= config.patience:
                break
    return best


def grad_check(config: CnnConfig, seed: int = 0, step: float = 1e-4) -> float:
    """Max relative error between analytic and central-difference gradients.

    Runs on random weights and a tiny random batch (dropout disabled, which
    is the inference-path gradient the training loop also uses when
    dropout_rate is 0).
    """
    rng = np.random.default_rng(seed)
    weights = init_weights(config, rng)
    t_lo = config.max_kernel
    batch = []
    for i in range(3):
        t = int(rng.integers(t_lo, t_lo + 4))
        batch.append((rng.normal(size=(t, config.embed_dim)), float(i % 2)))

    grads = _zero_grads(weights)
    for x, y in batch:
        _accumulate_grads(x, y, weights, grads, 1.0 / len(batch))

    def total_loss() -> float:
        return float(np.mean([_bce(_run_forward(x, weights).logit, y) for x, y in batch]))

    worst = 0.0
    for arr, g in zip(weights.arrays(), grads):
        flat, gflat = arr.ravel(), g.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = total_loss()
            flat[i] = orig - step
            down = total_loss()
            flat[i] = orig
            numeric = (up - down) / (2.0 * step)
            denom = max(abs(gflat[i]), abs(numeric), 1e-6)
            worst = max(worst, abs(gflat[i] - numeric) / denom)
    return worst


def save_weights(weights: CnnWeights, path: str | Path) -> None:
    """Self-describing npz container: config header + flat parameter arrays."""
    payload = {
        "meta": np.frombuffer(
            json.dumps({"version": _FORMAT_VERSION,
                        "config": json.loads(weights.config.to_json())}).encode(),
            dtype=np.uint8),
        "proj_w": weights.proj_w, "proj_b": weights.proj_b,
        "head_w": weights.head_w, "head_b": weights.head_b,
    }
    for i, (cw, cb) in enumerate(zip(weights.conv_w, weights.conv_b)):
        payload[f"conv_w_{i}"] = cw
        payload[f"conv_b_{i}"] = cb
    np.savez(path, **payload)


def load_weights(path: str | Path, expect: CnnConfig | None = None) -> CnnWeights:
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode())
        if meta.get("version") != _FORMAT_VERSION:
            raise FormatError(f"unsupported weight file version {meta.get('version')}")
        config = CnnConfig.from_json(json.dumps(meta["config"]))
        if expect is not None and expect != config:
            raise FormatError("weight file config does not match the expected config")
        nb = len(config.branch_kernels)
        conv_w = [data[f"conv_w_{i}"] for i in range(nb)]
        conv_b = [data[f"conv_b_{i}"] for i in range(nb)]
        weights = CnnWeights(config=config, conv_w=conv_w, conv_b=conv_b,
                             proj_w=data["proj_w"], proj_b=data["proj_b"],
                             head_w=data["head_w"], head_b=data["head_b"])
    for i, h in enumerate(config.branch_kernels):
        if weights.conv_w[i].shape != (config.filters_per_branch, h, config.embed_dim):
            raise FormatError(f"conv branch {i} has shape {weights.conv_w[i].shape}")
    return weights
