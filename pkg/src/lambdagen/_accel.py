"""Optional numba acceleration.

Set ``LAMBDAGEN_DISABLE_NUMBA=1`` to run every kernel as plain Python over
numpy arrays.  Both paths execute the same source and draw the same random
stream, so results are identical up to libm rounding.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

DISABLED = os.environ.get("LAMBDAGEN_DISABLE_NUMBA", "").lower() not in ("", "0", "false", "no")
USE_NUMBA = numba is not None and not DISABLED


def njit(func):
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True)(func)
    return func


def backend() -> str:
    return "numba" if USE_NUMBA else "python"
