"""Backend selection for the hot kernels.

The compiled extension (logdiff._core) is used when importable; the
NumPy/SciPy implementations are the fallback. Set LOGDIFF_BACKEND to
"python" or "cython" to force a choice.
"""

import os

from . import _kernels_py

_IMPLEMENTATIONS = {"python": _kernels_py}

try:
    from . import _core as _compiled
except ImportError:
    _compiled = None
else:
    _IMPLEMENTATIONS["cython"] = _compiled

_requested = os.environ.get("LOGDIFF_BACKEND", "").strip().lower()
if _requested:
    if _requested not in _IMPLEMENTATIONS:
        raise ImportError(
            f"LOGDIFF_BACKEND={_requested!r} is not available; "
            f"choices: {sorted(_IMPLEMENTATIONS)}"
        )
    _active = _requested
else:
    _active = "cython" if _compiled is not None else "python"

tridiag_solve = _IMPLEMENTATIONS[_active].tridiag_solve
planar_log_step = _IMPLEMENTATIONS[_active].planar_log_step


def active_backend():
    return _active


def available_backends():
    return sorted(_IMPLEMENTATIONS)


def implementation(name):
    """Return the kernel module for an explicit backend (for benchmarks/tests)."""
    return _IMPLEMENTATIONS[name]
