"""Kernel lane selection.

Prefers the compiled extension, falls back to the numpy lane, and honors
PRIVHP_PURE_PYTHON=1 for forcing the fallback (useful for benchmarking
and for debugging a suspected kernel discrepancy).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("PRIVHP_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

splitmix64 = _impl.splitmix64
locate_codes = _impl.locate_codes
tree_path_add = _impl.tree_path_add
sketch_add = _impl.sketch_add
sketch_query = _impl.sketch_query
