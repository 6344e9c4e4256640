"""Optional numba acceleration.

Set ``DIMERLAB_DISABLE_NUMBA=1`` to force the pure-numpy kernels even when
numba is importable.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a soft dependency
    numba = None

_FALSY = {"", "0", "false", "no", "off"}

NUMBA_DISABLED_BY_ENV = os.environ.get("DIMERLAB_DISABLE_NUMBA", "").strip().lower() not in _FALSY
NUMBA_AVAILABLE = numba is not None
NUMBA_ENABLED = NUMBA_AVAILABLE and not NUMBA_DISABLED_BY_ENV


def njit(func):
    """Compile ``func`` with numba in nopython mode, or return it untouched."""
    if not NUMBA_AVAILABLE:
        return func
    return numba.njit(cache=True, nogil=True)(func)
