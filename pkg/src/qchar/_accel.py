"""Backend selection for the numeric kernels.

Set ``QCHAR_DISABLE_NUMBA=1`` to force the pure-numpy implementations.  When
numba cannot be imported the numpy path is used automatically.
"""
from __future__ import annotations

import os

_FLAG = os.environ.get("QCHAR_DISABLE_NUMBA", "").strip().lower()
DISABLED_BY_ENV = _FLAG not in ("", "0", "false", "no")

try:
    import numba  # noqa: F401

    NUMBA_AVAILABLE = True
except Exception:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and not DISABLED_BY_ENV
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity otherwise.

    Kernels are always compiled when numba exists so that benchmarks can call
    both implementations; the env flag only affects dispatch.
    """
    if not NUMBA_AVAILABLE:
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn
    from numba import njit as _njit

    return _njit(*args, **kwargs)
