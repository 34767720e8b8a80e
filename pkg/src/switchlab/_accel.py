"""Optional numba acceleration.

Set ``SWITCHLAB_DISABLE_NUMBA=1`` to force the pure-numpy kernels (useful for
debugging and for platforms without numba).
"""

import os

_FLAG = os.environ.get("SWITCHLAB_DISABLE_NUMBA", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and _FLAG not in ("1", "true", "yes", "on")


def njit(func):
    """Compile ``func`` in nopython mode, caching to disk."""
    if numba is None:  # pragma: no cover
        return func
    return numba.njit(cache=True)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
