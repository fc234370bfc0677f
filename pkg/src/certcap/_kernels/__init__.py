"""Kernel backend selection.

The numeric hot loops live twice: as a compiled Cython extension
(`certcap._kernels._speedups`) and as an equivalent pure-Python module
(`certcap._kernels.pure`).  The compiled module is preferred when it imports
cleanly; set the environment variable ``CERTCAP_PURE=1`` to force the pure
backend.  Both produce bit-identical outputs, so the choice only affects
speed.
"""

from __future__ import annotations

import os

from . import pure

_FUNCTIONS = (
    "div_round_away",
    "ln1p_series",
    "ln_window_batch",
    "atanh_series",
    "sin_cos",
    "sin_cos_batch",
    "exp_series",
    "exp_batch",
    "clip_sum",
    "scale_round_batch",
    "add_arrays",
    "midpoint_grid",
)

_active = pure
if not os.environ.get("CERTCAP_PURE"):
    try:
        from . import _speedups as _active  # type: ignore[no-redef]
    except ImportError:
        _active = pure

BACKEND = _active.BACKEND

for _name in _FUNCTIONS:
    globals()[_name] = getattr(_active, _name)


def available_backends():
    """Mapping backend-name -> module, for benchmarks and parity tests."""
    found = {"pure": pure}
    try:
        from . import _speedups

        found["compiled"] = _speedups
    except ImportError:
        pass
    return found


__all__ = list(_FUNCTIONS) + ["BACKEND", "available_backends"]
