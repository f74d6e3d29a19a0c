"""Pure-numpy convolution kernel (fallback when the C extension is absent)."""

from __future__ import annotations

import numpy as np


def branch_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray):
    """Valid convolution + ReLU + max pooling for one kernel branch.

    x: (T, d) sentence matrix; w: (F, h, d) filters; b: (F,) bias.
    Returns (pooled (F,), argmax positions (F,) int64, active (F,) float)
    where active marks filters whose winning pre-activation was positive.
    """
    F, h, d = w.shape
    T = x.shape[0]
    L = T - h + 1
    windows = np.lib.stride_tricks.sliding_window_view(x, (h, d)).reshape(L, h * d)
    pre = windows @ w.reshape(F, h * d).T + b  # (L, F)
    amax = np.argmax(pre, axis=0)
    mx = pre[amax, np.arange(F)]
    return np.maximum(mx, 0.0), amax.astype(np.int64), (mx > 0).astype(np.float64)
