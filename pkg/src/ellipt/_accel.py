"""Optional numba acceleration.

Hot kernels are written once in a numba-compatible subset of numpy and
compiled with ``njit`` when numba is importable and ``ELLIPT_NUMBA`` is not
set to ``0``.  Otherwise the same functions run as plain Python and the
callers dispatch to vectorised numpy implementations instead.
"""
import os
import warnings

_FLAG = os.environ.get("ELLIPT_NUMBA", "1").strip().lower()

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("0", "false", "no", "off")

if _FLAG in ("1", "true", "yes", "on") and not HAVE_NUMBA and "ELLIPT_NUMBA" in os.environ:
    warnings.warn("ELLIPT_NUMBA requested but numba is not installed; using numpy kernels")


def njit(func):
    """Compile ``func`` with numba if available, otherwise return it untouched."""
    if HAVE_NUMBA:
        return numba.njit(cache=True, nogil=True)(func)
    return func


def backend():
    return "numba" if USE_NUMBA else "numpy"
