"""Numeric kernel backend selection.

The compiled Cython extension is preferred when it imported cleanly;
the pure-Python module is the fallback and the reference.  Set
``SKYBRIDGE_PURE=1`` to force the pure backend (used by the benchmark
and the cross-backend determinism tests).  Both backends are written to
produce bit-identical results.
"""

import os

from skybridge.kernels import _pure

if os.environ.get("SKYBRIDGE_PURE") == "1":
    _impl = _pure
else:
    try:
        from skybridge.kernels import _fast as _impl
    except ImportError:
        _impl = _pure

BACKEND = _impl.BACKEND
waterfill = _impl.waterfill
maxmin_share = _impl.maxmin_share
greedy_assign = _impl.greedy_assign


def get_backend(name=None):
    """Return the kernel module for `name` ('pure', 'fast', or None for
    the active default).  Raises ImportError if 'fast' was not built."""
    if name is None or name == BACKEND:
        return _impl
    if name == "pure":
        return _pure
    if name == "fast":
        from skybridge.kernels import _fast
        return _fast
    raise ValueError(f"unknown kernel backend: {name!r}")
