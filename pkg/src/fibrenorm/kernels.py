"""Backend dispatch for the binary64 hot loops.

The compiled extension is used when it imports; set ``FIBRENORM_PURE=1`` to
force the Python reference implementation.
"""
from __future__ import annotations

import os

if os.environ.get("FIBRENORM_PURE", "") not in ("", "0"):
    from . import _pykernels as _impl

    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        from . import _pykernels as _impl

        BACKEND = "python"

lift_eval = _impl.lift_eval
lift_iterate = _impl.lift_iterate
lift_orbit = _impl.lift_orbit
rotation_comparator = _impl.rotation_comparator
order_violation = _impl.order_violation
cheb_eval = _impl.cheb_eval
cheb_invert = _impl.cheb_invert
insertion_gaps = _impl.insertion_gaps
pressure_sum = _impl.pressure_sum

__all__ = [
    "BACKEND",
    "lift_eval",
    "lift_iterate",
    "lift_orbit",
    "rotation_comparator",
    "order_violation",
    "cheb_eval",
    "cheb_invert",
    "insertion_gaps",
    "pressure_sum",
]
