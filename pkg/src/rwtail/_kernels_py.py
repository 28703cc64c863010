"""Pure NumPy versions of the compiled kernels in ``_kernels.pyx``."""

from __future__ import annotations

import numpy as np


def accumulate_series(theta, x):
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    if theta.shape != x.shape or theta.ndim != 2:
        raise ValueError("theta and x must have the same shape")
    n, m = theta.shape
    if m == 0:
        return np.zeros(n), np.full(n, -np.inf)
    live = theta != 0.0
    # cumsum runs left to right, matching the compiled loop bit for bit
    terms = np.where(live, theta * x, 0.0)
    pos_terms = np.where(live & (x > 0.0), theta * x, 0.0)
    pos_sum = np.cumsum(pos_terms, axis=1)[:, -1]
    run_max = np.max(np.cumsum(terms, axis=1), axis=1)
    return pos_sum, run_max


def exceedance_counts(sample, levels):
    s = np.sort(np.asarray(sample, dtype=np.float64))
    lv = np.asarray(levels, dtype=np.float64)
    return (s.size - np.searchsorted(s, lv, side="right")).astype(np.int64)
