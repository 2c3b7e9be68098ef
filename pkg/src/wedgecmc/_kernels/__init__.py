"""Kernel backend selection.

The compiled Cython extension is preferred when present; otherwise the numpy
reference implementation is used.  Set WEDGECMC_PURE=1 to force the fallback
(useful for benchmarking and for testing backend equivalence).
"""

import os

from . import _reference

if os.environ.get("WEDGECMC_PURE"):
    _impl = _reference
    BACKEND = "python"
else:
    try:
        from . import _speedups as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _reference
        BACKEND = "python"

wedge_H = _impl.wedge_H
collar_H = _impl.collar_H
wedge_H_partials = _impl.wedge_H_partials
collar_H_partials = _impl.collar_H_partials
wedge_interior = _impl.wedge_interior
collar_interior = _impl.collar_interior

reference = _reference
