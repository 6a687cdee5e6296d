"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
fallback is imported. Set ``MIXENT_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("MIXENT_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = "compiled" if _impl is not _kernels_py else "python"

log_normalize_rows = _impl.log_normalize_rows
biexp_scan = _impl.biexp_scan
enumerate_min = _impl.enumerate_min

KIND_GAUSSIAN = _kernels_py.KIND_GAUSSIAN
KIND_BERNOULLI = _kernels_py.KIND_BERNOULLI
KIND_BIEXP = _kernels_py.KIND_BIEXP

__all__ = [
    "BACKEND",
    "log_normalize_rows",
    "biexp_scan",
    "enumerate_min",
    "KIND_GAUSSIAN",
    "KIND_BERNOULLI",
    "KIND_BIEXP",
]
