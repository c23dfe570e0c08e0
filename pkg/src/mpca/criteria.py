"""Diagnostics for choosing a scale.

The ratio of distortion compares summed squared pair distances after and
before projection, over in-scale pairs only. Values near 1 mean the
k-dimensional subspace captures the in-scale geometry; the share of exempted
pairs tells how much of the data the scale ignores.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from mpca import _backend
from mpca.core import (
    DistanceMatrix,
    EigenDecomposition,
    ScaleInterval,
    WeightMask,
    as_dataset,
    covariance_pca,
    pairwise_distances,
)
from mpca.errors import InvalidInputError
from mpca.scalespace import ScalePoint, sweep


@dataclass(frozen=True)
class DistortionReport:
    ratio: float | None  # None when the interval selects no pairs
    selected_pairs: int
    total_pairs: int
    exempted_percent: float
    interval: ScaleInterval
    k: int

    @property
    def empty(self) -> bool:
        return self.selected_pairs == 0


@dataclass(frozen=True)
class ScaleRow:
    """One row of a scale table. ``None`` marks an empty scale."""

    interval: ScaleInterval
    selected_pairs: int
    exempted_percent: float
    angle: float | None
    ratio: float | None

    @property
    def empty(self) -> bool:
        return self.selected_pairs == 0


def _exempted(selected: int, total: int) -> float:
    return 100.0 * (total - selected) / total


def exempted_percentage(mask: WeightMask) -> float:
    return _exempted(mask.selected_pair_count, mask.total_pairs)


def ratio_of_distortion(data, decomposition: EigenDecomposition, k: int, scale: ScaleInterval,
                        dist: DistanceMatrix | None = None) -> DistortionReport:
    """Share of in-scale squared pair distances kept by projecting onto k components."""
    ds = as_dataset(data)
    if not 1 <= k < ds.m:
        raise InvalidInputError(f"k must be in [1, {ds.m - 1}], got {k}")
    if dist is None:
        dist = pairwise_distances(ds)
    lo, hi = scale.resolve(dist.d_max)
    Y = ds.values @ decomposition.top(k)
    num, den, count = _backend.masked_pair_sums(Y, dist.entries, lo, hi)
    total = ds.n * (ds.n - 1) // 2
    ratio = None
    if count:
        ratio = num / den if den > 0 else 1.0
    return DistortionReport(ratio, count, total, _exempted(count, total), scale, k)


def component_angle(a, b) -> float:
    """Angle in degrees between the axes spanned by ``a`` and ``b``, in [0, 90]."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise InvalidInputError("component_angle needs nonzero vectors")
    if a.shape != b.shape:
        raise InvalidInputError(f"length mismatch: {a.size} vs {b.size}")
    c = min(abs(float(a @ b)) / (na * nb), 1.0)
    return float(np.degrees(np.arccos(c)))


def angle_sweep(data, grid, reference, workers: int = 1,
                points: Sequence[ScalePoint] | None = None) -> list[tuple[ScaleInterval, float | None]]:
    """First-component angle to ``reference`` at every grid point (None when empty)."""
    ref = np.asarray(reference, dtype=np.float64)
    if not np.any(ref):
        raise InvalidInputError("reference vector must be nonzero")
    if points is None:
        ds = as_dataset(data)
        points = sweep(ds, grid, 1, workers=workers)
    return [(p.interval, None if p.empty else component_angle(p.decomposition.eigenvectors[:, 0], ref))
            for p in points]


def scale_table(data, points: Sequence[ScalePoint], k: int, reference=None,
                dist: DistanceMatrix | None = None) -> list[ScaleRow]:
    """Angle, ratio of distortion and exempted share for every swept point.

    ``reference`` defaults to the first classical principal component.
    """
    ds = as_dataset(data)
    if dist is None:
        dist = pairwise_distances(ds)
    if reference is None:
        reference = covariance_pca(ds).eigenvectors[:, 0]
    total = ds.n * (ds.n - 1) // 2
    rows = []
    for p in points:
        if p.empty:
            rows.append(ScaleRow(p.interval, 0, 100.0, None, None))
            continue
        rep = ratio_of_distortion(ds, p.decomposition, k, p.interval, dist=dist)
        angle = component_angle(p.decomposition.eigenvectors[:, 0], reference)
        rows.append(ScaleRow(p.interval, p.selected_pair_count, _exempted(p.selected_pair_count, total),
                             angle, rep.ratio))
    return rows


def rank_scales(rows: Sequence[ScaleRow]) -> list[ScaleRow]:
    """Non-empty rows by decreasing ratio, then by fewest exempted pairs."""
    live = [r for r in rows if not r.empty]
    return sorted(live, key=lambda r: (-r.ratio, r.exempted_percent, r.interval.lower, r.interval.upper))
