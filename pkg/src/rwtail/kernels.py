"""Kernel dispatch: the compiled extension when it imports, NumPy otherwise.

Set ``RWTAIL_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("RWTAIL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

accumulate_series = _impl.accumulate_series
exceedance_counts = _impl.exceedance_counts

__all__ = ["BACKEND", "accumulate_series", "exceedance_counts"]
