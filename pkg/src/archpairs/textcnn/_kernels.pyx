# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled convolution kernel for the sentence CNN hot loop."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def branch_forward(double[:, ::1] x, double[:, :, ::1] w, double[::1] b):
    """Valid convolution + ReLU + max pooling for one kernel branch.

    Mirrors kernels_py.branch_forward: returns (pooled, argmax, active).
    """
    cdef Py_ssize_t T = x.shape[0]
    cdef Py_ssize_t d = x.shape[1]
    cdef Py_ssize_t F = w.shape[0]
    cdef Py_ssize_t h = w.shape[1]
    cdef Py_ssize_t L = T - h + 1

    pooled = np.empty(F, dtype=np.float64)
    amax = np.zeros(F, dtype=np.int64)
    active = np.zeros(F, dtype=np.float64)
    cdef double[::1] pooled_v = pooled
    cdef cnp.int64_t[::1] amax_v = amax
    cdef double[::1] active_v = active

    cdef Py_ssize_t f, t, j, k, best_t
    cdef double acc, best

    for f in range(F):
        best_t = 0
        best = -1e300
        for t in range(L):
            acc = b[f]
            for j in range(h):
                for k in range(d):
                    acc += w[f, j, k] * x[t + j, k]
            if acc > best:
                best = acc
                best_t = t
        amax_v[f] = best_t
        if best > 0.0:
            pooled_v[f] = best
            active_v[f] = 1.0
        else:
            pooled_v[f] = 0.0
    return pooled, amax, active
