"""Kernel selection: compiled extension when available, numpy otherwise.

Set ARCHPAIRS_PURE_PYTHON=1 to force the numpy path (used by the kernel
benchmark to compare both implementations in one process).
"""

from __future__ import annotations

import os

import numpy as np

from . import kernels_py

IMPLEMENTATION = "python"
_compiled = None

if not os.environ.get("ARCHPAIRS_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled  # type: ignore[no-redef]
        IMPLEMENTATION = "cython"
    except ImportError:
        _compiled = None


def branch_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray):
    """Conv + ReLU + max-pool for one branch; see kernels_py for the contract."""
    if _compiled is not None:
        return _compiled.branch_forward(
            np.ascontiguousarray(x), np.ascontiguousarray(w), np.ascontiguousarray(b))
    return kernels_py.branch_forward(x, w, b)
