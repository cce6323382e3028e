"""Kernel dispatch: compiled extension when importable, NumPy fallback otherwise.

Set ``THAITRANSLIT_PURE=1`` to force the fallback.
"""

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("THAITRANSLIT_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"


def levenshtein(a: str, b: str) -> int:
    return _impl.levenshtein(a, b)


def weighted_edit_distance(a, b, subcost, indel: float = 1.0) -> float:
    a = np.ascontiguousarray(a, dtype=np.int64)
    b = np.ascontiguousarray(b, dtype=np.int64)
    subcost = np.ascontiguousarray(subcost, dtype=np.float64)
    return float(_impl.weighted_edit_distance(a, b, subcost, indel))


def best_split(X, y, w, idx, features, min_leaf: int):
    """Best (feature, threshold, score) over ``features`` (ascending order)."""
    return _impl.best_split(
        np.ascontiguousarray(X, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.float64),
        np.ascontiguousarray(w, dtype=np.float64),
        np.ascontiguousarray(idx, dtype=np.int64),
        np.ascontiguousarray(np.sort(features), dtype=np.int64),
        int(min_leaf),
    )
