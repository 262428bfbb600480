"""Optional numba acceleration for the integrator hot path.

Set ``MISSILE_GNC_NOJIT=1`` to run every kernel as plain Python (slow, but
useful under a debugger or coverage).
"""

import os

_DISABLED = os.environ.get("MISSILE_GNC_NOJIT", "0") not in ("", "0")

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None


def njit(fn):
    if numba is None or _DISABLED:
        return fn
    return numba.njit(cache=True, fastmath=False)(fn)
