"""Kernel backend selection.

The compiled extension is used when it imports cleanly; setting
``SCATTERBENCH_PURE_PYTHON=1`` forces the numpy fallback.
"""
import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_c = None
if not os.environ.get("SCATTERBENCH_PURE_PYTHON"):
    try:
        from . import _ckernels as _c
        BACKEND = "cython"
    except ImportError:  # extension not built
        _c = None


def circular_convolve(f, g, weight):
    if _c is not None and f.ndim in (1, 2):
        f = np.ascontiguousarray(f, dtype=np.complex128)
        g = np.ascontiguousarray(g, dtype=np.complex128)
        if f.ndim == 1:
            return _c.circular_convolve_1d(f, g, float(weight))
        return _c.circular_convolve_2d(f, g, float(weight))
    return _pykernels.circular_convolve(f, g, weight)


def modulus_rows(x):
    if _c is not None:
        return _c.modulus_rows(np.ascontiguousarray(x, dtype=np.complex128))
    return _pykernels.modulus_rows(x)
