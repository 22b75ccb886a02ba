"""Kernel backend selection.

Hot placement kernels are compiled with numba by default.  Setting the
environment variable ``KICKTABLE_BACKEND=python`` (or any failure to
import numba) selects the pure numpy/Python versions of the same
functions, which are slower but dependency-free.  The benchmark CLI can
run both variants side by side regardless of the flag.
"""

from __future__ import annotations

import os

_env = os.environ.get("KICKTABLE_BACKEND", "numba").strip().lower()

if _env not in ("numba", "python"):
    raise RuntimeError(f"KICKTABLE_BACKEND must be 'numba' or 'python', got {_env!r}")

USE_NUMBA = _env == "numba"

if USE_NUMBA:
    try:
        import numba  # noqa: F401
    except ImportError:
        USE_NUMBA = False


def jit(func):
    """Compile `func` with numba when the numba backend is active."""
    if USE_NUMBA:
        import numba

        return numba.njit(cache=True)(func)
    return func


def backend_name() -> str:
    return "numba" if USE_NUMBA else "python"
