"""Kernel backend selection.

Prefers the compiled extension when it is importable; set DPKIT_PURE=1 to
force the pure-Python implementation (the benchmark suite compares both).
"""

from __future__ import annotations

import os

from . import _kernel_py

if os.environ.get("DPKIT_PURE"):
    _impl = _kernel_py
else:
    try:
        from . import _kernel_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernel_py

BACKEND = "cython" if _impl is not _kernel_py else "pure"

ANYWHERE = _kernel_py.ANYWHERE
ROOT_ONLY = _kernel_py.ROOT_ONLY
BELOW_ROOT = _kernel_py.BELOW_ROOT

match = _impl.match
substitute = _impl.substitute
successors = _impl.successors
has_redex = _impl.has_redex
reach = _impl.reach
