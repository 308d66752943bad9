"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy twin.
``RTSGM_BACKEND=python`` forces the fallback.
"""
import importlib
import os

from . import _kernels_py

_COMPILED = "rtsgm._ckernels"


def available():
    names = ["python"]
    try:
        importlib.import_module(_COMPILED)
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


def load(name=None):
    if name in (None, "", "auto"):
        try:
            return importlib.import_module(_COMPILED)
        except ImportError:
            return _kernels_py
    if name == "python":
        return _kernels_py
    if name == "cython":
        return importlib.import_module(_COMPILED)
    raise ValueError(f"unknown kernel backend {name!r}")


kernels = load(os.environ.get("RTSGM_BACKEND"))
