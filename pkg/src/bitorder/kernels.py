"""Kernel backend selection.

The compiled extension is used when importable; set ``BITORDER_PURE=1`` to
force the numpy fallback.  ``BACKEND`` names the active choice.
"""

from __future__ import annotations

import os

from . import _purepy

if os.environ.get("BITORDER_PURE", "") not in ("", "0"):
    _impl = _purepy
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _purepy

BACKEND = "purepy" if _impl is _purepy else "compiled"

violation_counts = _impl.violation_counts
accumulate_positive = _impl.accumulate_positive
accumulate_negative = _impl.accumulate_negative
sample_negatives = _impl.sample_negatives
negative_epoch = _impl.negative_epoch
apply_flips = _impl.apply_flips
full_adjacency = _impl.full_adjacency


def compiled():
    """The compiled module, or None when it is not built."""
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels
