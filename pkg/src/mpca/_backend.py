"""Kernel dispatch: compiled extension if importable, numpy fallback otherwise.

Set ``MPCA_PURE_PYTHON=1`` before import to force the fallback.
"""

from __future__ import annotations

import os

import numpy as np

from mpca import _fallback

native = None
if os.environ.get("MPCA_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from mpca import _kernels as native  # type: ignore[no-redef]
    except ImportError:
        native = None

BACKEND = "cython" if native is not None else "python"
_impl = native if native is not None else _fallback


def _c(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def pairwise_distances(X: np.ndarray) -> np.ndarray:
    return _impl.pairwise_distances(_c(X))


def masked_scatter(X: np.ndarray, D: np.ndarray, lo: float, hi: float) -> tuple[np.ndarray, int]:
    S, count = _impl.masked_scatter(_c(X), _c(D), float(lo), float(hi))
    return S, int(count)


def masked_pair_sums(Y: np.ndarray, D: np.ndarray, lo: float, hi: float) -> tuple[float, float, int]:
    num, den, count = _impl.masked_pair_sums(_c(Y), _c(D), float(lo), float(hi))
    return float(num), float(den), int(count)


def count_in_range(D: np.ndarray, lo: float, hi: float) -> int:
    return int(_impl.count_in_range(_c(D), float(lo), float(hi)))
