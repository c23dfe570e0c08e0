"""Numpy implementations of the pair-loop kernels.

Used when the compiled extension is unavailable or disabled with
``MPCA_PURE_PYTHON=1``. Memory is O(n^2 m) for the distance kernel, which is
fine in the intended regime (a few thousand rows at most).
"""

from __future__ import annotations

import numpy as np


def pairwise_distances(X: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - X[None, :, :]
    D = np.sqrt(np.einsum("ija,ija->ij", diff, diff))
    np.fill_diagonal(D, 0.0)
    return D


def _upper_mask(D: np.ndarray, lo: float, hi: float) -> np.ndarray:
    W = (D >= lo) & (D <= hi)
    return np.triu(W, k=1)


def masked_scatter(X: np.ndarray, D: np.ndarray, lo: float, hi: float) -> tuple[np.ndarray, int]:
    W = _upper_mask(D, lo, hi)
    W = (W | W.T).astype(np.float64)
    L = np.diag(W.sum(axis=1)) - W
    S = X.T @ L @ X
    S = 0.5 * (S + S.T)
    return S, int(W.sum()) // 2


def masked_pair_sums(Y: np.ndarray, D: np.ndarray, lo: float, hi: float) -> tuple[float, float, int]:
    iu, ju = np.nonzero(_upper_mask(D, lo, hi))
    if iu.size == 0:
        return 0.0, 0.0, 0
    diff = Y[iu] - Y[ju]
    num = float(np.einsum("pa,pa->", diff, diff))
    den = float(np.sum(D[iu, ju] ** 2))
    return num, den, int(iu.size)


def count_in_range(D: np.ndarray, lo: float, hi: float) -> int:
    return int(np.count_nonzero(_upper_mask(D, lo, hi)))
