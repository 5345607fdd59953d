"""Numba switch.

Set ``FASTMM_PURE_NUMPY=1`` to run every kernel through its numpy fallback.
The choice is made once, at import time.
"""
import functools
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_FLAG = os.environ.get("FASTMM_PURE_NUMPY", "").strip().lower()

USE_NUMBA = numba is not None and _FLAG not in ("1", "true", "yes", "on")

njit = functools.partial(numba.njit, cache=True, nogil=True) if numba is not None else None


def backend():
    return "numba" if USE_NUMBA else "numpy"
