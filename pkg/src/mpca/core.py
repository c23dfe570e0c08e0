"""Multiscale PCA: centering, pair selection by distance, weighted scatter.

The pipeline for one scale interval ``(l, u)``:

1. center the data once (never re-centered per scale);
2. compute the Euclidean distance matrix;
3. set ``w_ij = 1`` when ``l <= ||x_i - x_j|| <= u`` and 0 otherwise;
4. form the weighted Laplacian ``L = diag(sum_j w_ij) - W``;
5. eigendecompose ``M = X^T L X`` and project onto its top eigenvectors.

With every pair selected ``M = n^2 cov(X)`` (biased covariance), so the full
scale reproduces ordinary PCA.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from mpca import _backend
from mpca.errors import DegenerateColumnError, EmptyScaleError, InvalidInputError

logger = logging.getLogger(__name__)

NORMALIZE_MODES = ("none", "mean", "zscore")
_MODE_ALIASES = {"mean-divide": "mean", "z-score": "zscore"}


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """An n x m matrix of row observations.

    Attributes:
        values: The (possibly centered) data, read-only.
        centered: Whether ``mean`` has been subtracted from ``values``.
        mean: Column means subtracted during centering (zeros otherwise).
        column_names: Optional labels carried over from a CSV header.
    """

    values: np.ndarray
    centered: bool = False
    mean: np.ndarray | None = None
    column_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise InvalidInputError(f"expected a 2-D matrix, got shape {v.shape}")
        n, m = v.shape
        if n < 2 or m < 1:
            raise InvalidInputError(f"need at least 2 rows and 1 column, got {n}x{m}")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("data contains non-finite values")
        object.__setattr__(self, "values", _frozen(v))
        mean = np.zeros(m) if self.mean is None else self.mean
        object.__setattr__(self, "mean", _frozen(mean))
        if self.column_names is not None:
            object.__setattr__(self, "column_names", tuple(self.column_names))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class DistanceMatrix:
    entries: np.ndarray
    d_min: float | None
    d_max: float

    @property
    def all_zero(self) -> bool:
        """True when every row coincides, so ``d_min`` is undefined."""
        return self.d_min is None

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class ScaleInterval:
    """Closed distance interval ``[lower, upper]``.

    With ``standard=True`` the bounds are fractions of the largest pairwise
    distance and get resolved against it at analysis time.
    """

    lower: float
    upper: float
    standard: bool = False

    def __post_init__(self) -> None:
        lo, hi = float(self.lower), float(self.upper)
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise InvalidInputError("scale bounds must be finite")
        if lo < 0:
            raise InvalidInputError(f"lower bound must be >= 0, got {lo}")
        if not lo < hi:
            raise InvalidInputError(f"need lower < upper, got ({lo}, {hi})")
        if self.standard and hi > 1:
            raise InvalidInputError(f"standard scale bounds must lie in [0, 1], got ({lo}, {hi})")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def resolve(self, d_max: float) -> tuple[float, float]:
        if self.standard:
            return self.lower * d_max, self.upper * d_max
        return self.lower, self.upper

    def __str__(self) -> str:
        return f"({self.lower:g}, {self.upper:g}){' std' if self.standard else ''}"


FULL_SCALE = ScaleInterval(0.0, 1.0, standard=True)


@dataclass(frozen=True)
class WeightMask:
    weights: np.ndarray
    selected_pair_count: int

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def total_pairs(self) -> int:
        return self.n * (self.n - 1) // 2

    @property
    def empty(self) -> bool:
        return self.selected_pair_count == 0


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenpairs sorted by descending eigenvalue; ``eigenvectors[:, i]`` pairs with ``eigenvalues[i]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def top(self, k: int) -> np.ndarray:
        return self.eigenvectors[:, :k]


class MPCAResult(NamedTuple):
    decomposition: EigenDecomposition
    projections: np.ndarray
    mask: WeightMask


def as_dataset(data: Dataset | np.ndarray | Sequence[Sequence[float]]) -> Dataset:
    """Return a centered Dataset, centering raw input if needed."""
    if isinstance(data, Dataset):
        return data if data.centered else center(data.values, column_names=data.column_names)
    return center(data)


def center(data, column_names: Sequence[str] | None = None) -> Dataset:
    X = np.asarray(data, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise InvalidInputError(f"need a 2-D matrix with at least 2 rows, got shape {X.shape}")
    mu = X.mean(axis=0)
    return Dataset(X - mu, centered=True, mean=mu,
                   column_names=tuple(column_names) if column_names is not None else None)


def normalize(data, mode: str = "none") -> np.ndarray:
    """Rescale columns.

    ``mean`` divides each column by its mean (for all-positive data);
    ``zscore`` centers and divides by the sample standard deviation
    (``ddof=1``).
    """
    X = np.asarray(data, dtype=np.float64)
    mode = _MODE_ALIASES.get(mode, mode)
    if mode == "none":
        return X
    if mode == "mean":
        mu = X.mean(axis=0)
        for j in np.flatnonzero(mu == 0):
            raise DegenerateColumnError(int(j), "column mean is zero, cannot mean-divide")
        return X / mu
    if mode == "zscore":
        if X.shape[0] < 2:
            raise InvalidInputError("z-score needs at least 2 rows")
        sd = X.std(axis=0, ddof=1)
        for j in np.flatnonzero(sd == 0):
            raise DegenerateColumnError(int(j), "column standard deviation is zero")
        return (X - X.mean(axis=0)) / sd
    raise InvalidInputError(f"unknown normalization mode {mode!r}; expected one of {NORMALIZE_MODES}")


def pairwise_distances(data: Dataset | np.ndarray) -> DistanceMatrix:
    X = data.values if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise InvalidInputError(f"need at least 2 rows, got shape {X.shape}")
    D = _backend.pairwise_distances(X)
    positive = D[D > 0]
    d_min = float(positive.min()) if positive.size else None
    return DistanceMatrix(_frozen(D), d_min, float(D.max()))


def binary_weights(dist: DistanceMatrix, scale: ScaleInterval) -> WeightMask:
    lo, hi = scale.resolve(dist.d_max)
    D = dist.entries
    W = (D >= lo) & (D <= hi)
    np.fill_diagonal(W, False)
    count = int(np.count_nonzero(np.triu(W, k=1)))
    return WeightMask(_frozen(W.astype(np.float64)), count)


def laplacian(mask: WeightMask) -> np.ndarray:
    W = mask.weights
    return np.diag(W.sum(axis=1)) - W


def scatter_matrix(data: Dataset | np.ndarray, lap: np.ndarray) -> np.ndarray:
    """``X^T L X`` for centered ``X``."""
    X = data.values if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
    lap = np.asarray(lap, dtype=np.float64)
    if lap.shape != (X.shape[0], X.shape[0]):
        raise InvalidInputError(f"Laplacian shape {lap.shape} does not match {X.shape[0]} rows")
    M = X.T @ lap @ X
    return 0.5 * (M + M.T)


def scale_scatter(data: Dataset, dist: DistanceMatrix, scale: ScaleInterval) -> tuple[np.ndarray, int]:
    """Weighted scatter and selected-pair count in one pass over the pairs.

    Same result as ``scatter_matrix(data, laplacian(binary_weights(...)))``
    without materializing the n x n Laplacian.
    """
    lo, hi = scale.resolve(dist.d_max)
    return _backend.masked_scatter(data.values, dist.entries, lo, hi)


def _normalize_signs(vectors: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def eigendecompose(M) -> EigenDecomposition:
    """Full symmetric eigendecomposition, eigenvalues descending.

    Each eigenvector is flipped so its largest-magnitude component is
    positive. Inside a repeated eigenvalue the solver's orthonormal basis is
    kept as is.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError("matrix contains non-finite entries")
    vals, vecs = np.linalg.eigh(0.5 * (M + M.T))
    order = np.argsort(-vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    return EigenDecomposition(_frozen(vals), _frozen(_normalize_signs(vecs)))


def _check_k(k: int, m: int) -> int:
    k = int(k)
    if not 1 <= k <= m:
        raise InvalidInputError(f"k must be in [1, {m}], got {k}")
    return k


def mpca(data, scale: ScaleInterval, k: int, dist: DistanceMatrix | None = None) -> MPCAResult:
    """Principal components computed from in-scale pairs only.

    Args:
        data: Dataset or raw matrix; raw input is centered first.
        scale: Interval of pair distances to keep.
        k: Number of components to project onto.
        dist: Precomputed distances of the centered data, if available.

    Raises:
        EmptyScaleError: If no pair of points falls inside ``scale``.
    """
    ds = as_dataset(data)
    k = _check_k(k, ds.m)
    if dist is None:
        dist = pairwise_distances(ds)
    if dist.all_zero:
        raise InvalidInputError("all rows are identical; there is no scale to analyze")
    mask = binary_weights(dist, scale)
    if mask.empty:
        lo, hi = scale.resolve(dist.d_max)
        raise EmptyScaleError(lo, hi)
    dec = eigendecompose(scatter_matrix(ds, laplacian(mask)))
    return MPCAResult(dec, ds.values @ dec.top(k), mask)


def covariance_pca(data, k: int | None = None) -> EigenDecomposition:
    """Classical PCA from the sample covariance matrix, for comparison."""
    ds = as_dataset(data)
    if k is not None:
        _check_k(k, ds.m)
    C = np.atleast_2d(np.cov(ds.values, rowvar=False))
    return eigendecompose(C)
