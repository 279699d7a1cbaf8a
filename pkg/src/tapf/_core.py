"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
twin. Setting ``TAPF_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _pure

try:
    if os.environ.get("TAPF_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python backend requested")
    from . import _kernels as _backend
    BACKEND = "cython"
except ImportError:
    _backend = _pure
    BACKEND = "python"

max_flow_bfs = _backend.max_flow_bfs
max_flow_spfa = _backend.max_flow_spfa
bellman_ford = _backend.bellman_ford


def backend_module(name: str):
    """Return the kernel module called ``name`` ("cython" or "python")."""
    if name == "python":
        return _pure
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
