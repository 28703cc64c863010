# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for the Monte Carlo series simulator.

Summation order is strictly left to right over the term index so results are
bitwise identical to the NumPy fallback in ``_kernels_py``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


def accumulate_series(const double[:, ::1] theta, const double[:, ::1] x):
    """Positive-part sums and running maxima of weighted partial sums.

    Row ``i`` holds one realization; column ``t`` the term index.  Returns
    ``(pos_sum, run_max)`` where ``pos_sum[i] = sum_t theta*max(x, 0)`` and
    ``run_max[i] = max_k sum_{t<=k} theta*x``.
    """
    cdef Py_ssize_t n = theta.shape[0]
    cdef Py_ssize_t m = theta.shape[1]
    if x.shape[0] != n or x.shape[1] != m:
        raise ValueError("theta and x must have the same shape")
    out_pos = np.empty(n, dtype=np.float64)
    out_max = np.empty(n, dtype=np.float64)
    cdef double[::1] pos_v = out_pos
    cdef double[::1] max_v = out_max
    cdef Py_ssize_t i, t
    cdef double partial, pos, best, th, xv
    with nogil:
        for i in range(n):
            partial = 0.0
            pos = 0.0
            best = -INFINITY
            for t in range(m):
                th = theta[i, t]
                if th != 0.0:
                    xv = x[i, t]
                    partial = partial + th * xv
                    if xv > 0.0:
                        pos = pos + th * xv
                if partial > best:
                    best = partial
            pos_v[i] = pos
            max_v[i] = best
    return out_pos, out_max


def exceedance_counts(const double[::1] sample, const double[::1] levels):
    """Number of sample points strictly above each level (unsorted input)."""
    cdef Py_ssize_t n = sample.shape[0]
    cdef Py_ssize_t k = levels.shape[0]
    out = np.zeros(k, dtype=np.int64)
    cdef long long[::1] out_v = out
    cdef Py_ssize_t i, j
    cdef double v
    with nogil:
        for i in range(n):
            v = sample[i]
            for j in range(k):
                if v > levels[j]:
                    out_v[j] += 1
    return out
