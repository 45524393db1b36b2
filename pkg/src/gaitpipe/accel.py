"""Optional numba acceleration for the hot kernels.

Set ``GAITPIPE_NO_NUMBA=1`` to force the pure-numpy/python fallback path
(useful for debugging and for the kernel benchmark).
"""
from __future__ import annotations

import os

_disabled = os.environ.get("GAITPIPE_NO_NUMBA", "") not in ("", "0")

if not _disabled:
    try:
        from numba import njit as _njit
        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False


def maybe_njit(func):
    """Compile func with numba when available, else return it unchanged."""
    if NUMBA_ENABLED:
        return _njit(cache=True)(func)
    return func
