"""Backend selection for the agglomeration kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``ULTRAMETRIC_PURE_PYTHON`` is set to a non-empty
value other than ``0``, the numpy fallback is used.  Both expose
``nn_chain``, ``stepwise`` and ``constrained_complete`` with identical
results.
"""
import os

from . import _kernels_py

METHOD_CODES = {"single": 0, "complete": 1, "average": 2, "ward": 3, "median": 4}


def _load_compiled():
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


_compiled = _load_compiled()
_forced_py = os.environ.get("ULTRAMETRIC_PURE_PYTHON", "") not in ("", "0")

BACKEND = "cython" if (_compiled is not None and not _forced_py) else "python"


def available_backends():
    return ["cython", "python"] if _compiled is not None else ["python"]


def get_backend(name=None):
    """Kernel module for ``name`` (``"cython"``/``"python"``), default active."""
    name = name or BACKEND
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")
