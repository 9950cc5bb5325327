"""Selection between the numba-compiled and pure-NumPy kernel implementations.

The environment variable ``KINSIRS_BACKEND`` controls the choice:

* ``numba``  -- require the compiled kernels (ImportError if numba is absent)
* ``numpy``  -- force the vectorised NumPy fallback
* unset      -- use numba when it imports, NumPy otherwise

The agent-model kernel is bitwise identical on both backends (integer
state, one shared counter-based stream).  The field kernels avoid fastmath
and share their update formulas, but NumPy reductions may associate sums
differently than the compiled loops, so those agree to rounding rather
than bit for bit.
"""

import os

try:
    import numba  # noqa: F401
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

ENV_VAR = "KINSIRS_BACKEND"

# test hook: overrides the environment when not None
_forced = None


def force_backend(name):
    """Override backend selection ('numba', 'numpy', or None to clear)."""
    global _forced
    if name not in (None, "numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    _forced = name


def active_backend():
    """Name of the backend that kernel dispatch will use right now."""
    choice = _forced if _forced is not None else os.environ.get(ENV_VAR, "").strip().lower()
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not HAS_NUMBA:
            raise ImportError(f"{ENV_VAR}=numba requested but numba is not importable")
        return "numba"
    if choice not in ("", None):
        raise ValueError(f"{ENV_VAR} must be 'numba' or 'numpy', got {choice!r}")
    return "numba" if HAS_NUMBA else "numpy"


def kernels():
    """Module holding the hot kernels for the active backend."""
    if active_backend() == "numba":
        from . import _impl_nb
        return _impl_nb
    from . import _impl_np
    return _impl_np
