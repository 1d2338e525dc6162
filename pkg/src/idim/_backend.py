"""Backend selection for the hot kernels.

``IDIM_BACKEND=numpy`` forces the pure-numpy paths. Anything else (or unset)
uses numba when it imports cleanly.
"""

import os

_requested = os.environ.get("IDIM_BACKEND", "numba").strip().lower()

try:
    import numba  # noqa: F401
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


USE_NUMBA = HAS_NUMBA and _requested != "numpy"
BACKEND = "numba" if USE_NUMBA else "numpy"


def threads():
    """Worker cap from ``IDIM_THREADS`` (default: CPU count)."""
    raw = os.environ.get("IDIM_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)
