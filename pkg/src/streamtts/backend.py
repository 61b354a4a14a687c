"""Kernel backend selection.

The compiled extension is preferred when present; ``STREAMTTS_BACKEND=python``
forces the numpy fallback and ``STREAMTTS_BACKEND=ext`` makes a missing
extension a hard error.  All hot sequential kernels (dense, GRU, LSTM, valid
convolution, weighted sum) are routed through the selected module.
"""

import os

from . import kernels_py

try:
    from . import _kernels
except ImportError:
    _kernels = None


def load_backend(name):
    """Return the kernel module for an explicit backend name."""
    if name == "python":
        return kernels_py
    if name == "ext":
        if _kernels is None:
            raise ImportError(
                "compiled backend requested via STREAMTTS_BACKEND=ext "
                "but streamtts._kernels is not built"
            )
        return _kernels
    raise ValueError(f"unknown backend {name!r} (expected 'ext' or 'python')")


def available_backends():
    names = ["python"]
    if _kernels is not None:
        names.insert(0, "ext")
    return names


_forced = os.environ.get("STREAMTTS_BACKEND")
if _forced:
    kernels = load_backend(_forced)
else:
    kernels = _kernels if _kernels is not None else kernels_py

BACKEND = kernels.BACKEND_NAME
