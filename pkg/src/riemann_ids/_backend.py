"""Kernel selection: compiled Cython module when importable, numpy otherwise.

Set ``RIEMANN_IDS_PURE=1`` to force the fallback.
"""
import os

from . import _kernels_py

if os.environ.get("RIEMANN_IDS_PURE"):
    _compiled = None
else:
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

kernels = _compiled if _compiled is not None else _kernels_py
BACKEND = "cython" if _compiled is not None else "numpy"


def available_backends():
    out = {"numpy": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    return out
