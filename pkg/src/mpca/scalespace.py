"""Sweeping MPCA over the triangle of scales and clustering the results.

Each grid point ``(l, u)`` (standard scale, fractions of the largest pairwise
distance) gets a rank-k projector. Points are compared by the Frobenius
distance between projectors, grouped by agglomerative clustering, and each
group is summarized by its medoid.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from mpca import _backend
from mpca.core import (
    Dataset,
    DistanceMatrix,
    EigenDecomposition,
    ScaleInterval,
    as_dataset,
    eigendecompose,
    pairwise_distances,
    scale_scatter,
)
from mpca.errors import EmptyGridError, InsufficientPointsError, InvalidInputError
from mpca.projector import Projector, projector_from_decomposition

logger = logging.getLogger(__name__)

LINKAGES = ("average", "single", "complete")
MEDOID_MODES = ("distance", "distortion")
DEFAULT_STEP = 0.05
JUMP_THRESHOLD = 3.0
# Projector distance below which two structures count as the same one.
# For rank-1 projectors sqrt(2)*sin(theta) = 0.1 is a rotation of about 4 degrees.
RESOLUTION = 0.1


@dataclass(frozen=True)
class ScaleGrid:
    points: tuple[ScaleInterval, ...]
    step: float
    include_zero_lower: bool = True
    d_min: float | None = None
    d_max: float | None = None

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


@dataclass(frozen=True)
class ScalePoint:
    interval: ScaleInterval
    selected_pair_count: int
    decomposition: EigenDecomposition | None = None
    projector: Projector | None = None

    @property
    def empty(self) -> bool:
        return self.selected_pair_count == 0


@dataclass(frozen=True)
class Merge:
    """One agglomeration step. Cluster ids follow the scipy convention:
    leaves are 0..N-1 and the cluster formed at step s gets id N+s."""

    left: int
    right: int
    height: float
    size: int
    sse_left: float
    sse_right: float
    sse_merged: float
    pseudo_t2: float


@dataclass(frozen=True)
class Cluster:
    label: int
    members: tuple[int, ...]
    medoid: int
    interval: ScaleInterval
    eigenvectors: np.ndarray

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass
class ScaleClustering:
    """Result of clustering the non-empty points of a sweep.

    ``members``, ``medoids`` and ``empty_points`` index into the original
    list of scale points; ``assignments[i]`` is the label of
    ``point_indices[i]``. Clusters are labeled by decreasing size, ties broken
    by lowest member index.
    """

    point_indices: tuple[int, ...]
    assignments: np.ndarray
    merges: list[Merge]
    clusters: list[Cluster]
    chosen_cluster_count: int
    distances: np.ndarray
    empty_points: tuple[int, ...] = field(default_factory=tuple)

    @property
    def medoids(self) -> list[int]:
        return [c.medoid for c in self.clusters]


def build_grid(dist: DistanceMatrix | None, step: float = DEFAULT_STEP,
               include_zero_lower: bool = True) -> ScaleGrid:
    """Standard-scale lattice ``l = i*step < u = j*step <= 1``.

    Points whose resolved lower bound is positive but below the smallest
    nonzero pair distance are dropped: they select exactly the same pairs as
    ``l = 0``.
    """
    if not 0 < step <= 1:
        raise InvalidInputError(f"step must be in (0, 1], got {step}")
    count = int(math.floor(1.0 / step + 1e-9))
    ticks = [round(i * step, 12) for i in range(count + 1)]
    d_min = dist.d_min if dist is not None else None
    d_max = dist.d_max if dist is not None else None
    points = []
    for i, lo in enumerate(ticks[:-1]):
        if lo == 0 and not include_zero_lower:
            continue
        if lo > 0 and d_min is not None and d_max and lo * d_max < d_min:
            continue
        for hi in ticks[i + 1:]:
            points.append(ScaleInterval(lo, hi, standard=True))
    if not points:
        raise EmptyGridError(f"step {step} yields no scale points")
    return ScaleGrid(tuple(points), float(step), include_zero_lower, d_min, d_max)


def _evaluate(ds: Dataset, dist: DistanceMatrix, interval: ScaleInterval, k: int) -> ScalePoint:
    S, count = scale_scatter(ds, dist, interval)
    if count == 0:
        return ScalePoint(interval, 0)
    dec = eigendecompose(S)
    return ScalePoint(interval, count, dec, projector_from_decomposition(dec, k))


def sweep(data, grid: ScaleGrid | Iterable[ScaleInterval], k: int, workers: int = 1,
          dist: DistanceMatrix | None = None) -> list[ScalePoint]:
    """Run MPCA at every grid point; results come back in grid order.

    Points selecting no pairs are returned flagged empty rather than raising.
    With ``workers > 1`` grid points are evaluated on a thread pool (the
    compiled kernels release the GIL).
    """
    ds = as_dataset(data)
    if not 1 <= k < ds.m:
        raise InvalidInputError(f"k must be in [1, {ds.m - 1}], got {k}")
    if dist is None:
        dist = pairwise_distances(ds)
    intervals = list(grid)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda iv: _evaluate(ds, dist, iv, k), intervals))
    return [_evaluate(ds, dist, iv, k) for iv in intervals]


def projector_distance_matrix(points: Sequence[ScalePoint]) -> np.ndarray:
    if any(p.empty or p.projector is None for p in points):
        raise InvalidInputError("empty scale points have no projector")
    ranks = {p.projector.rank for p in points}
    if len(ranks) > 1:
        raise InvalidInputError(f"projectors have mixed ranks {sorted(ranks)}")
    flat = np.stack([p.projector.entries.ravel() for p in points])
    # Frobenius distance of matrices == Euclidean distance of their flattenings
    return _backend.pairwise_distances(flat)


def pseudo_t2(sse_a: float, sse_b: float, sse_t: float, n_a: int, n_b: int) -> float:
    """Separation statistic for merging clusters a and b into t.

    When both parts have zero scatter the value is ``inf`` if the union has
    any scatter and 0 otherwise.
    """
    within = sse_a + sse_b
    gain = max(sse_t - within, 0.0)
    if within == 0:
        return math.inf if gain > 0 else 0.0
    return gain * (n_a + n_b - 2) / within


def _lance_williams(linkage: str, d_ik: np.ndarray, d_jk: np.ndarray, n_i: int, n_j: int) -> np.ndarray:
    if linkage == "average":
        return (n_i * d_ik + n_j * d_jk) / (n_i + n_j)
    if linkage == "single":
        return np.minimum(d_ik, d_jk)
    return np.maximum(d_ik, d_jk)


def agglomerate(distances, linkage: str = "average") -> list[Merge]:
    """Agglomerative clustering with pseudo-t2 recorded at each merge.

    Cluster scatter (SSE) is the sum of squared distances of members to
    their mean, computed from pairwise distances as
    ``sum_{p<q} d_pq^2 / size``; this equals the scatter around the
    entrywise mean projector. Ties in linkage height go to the lowest pair of
    slot indices.
    """
    if linkage not in LINKAGES:
        raise InvalidInputError(f"unknown linkage {linkage!r}; expected one of {LINKAGES}")
    D = np.array(distances, dtype=np.float64)
    N = D.shape[0]
    if D.ndim != 2 or D.shape != (N, N) or N < 2:
        raise InvalidInputError(f"need a square distance matrix with >= 2 points, got {D.shape}")
    D2 = D * D
    C = D.copy()
    np.fill_diagonal(C, np.inf)
    active = np.ones(N, dtype=bool)
    ids = list(range(N))
    members: list[list[int]] = [[i] for i in range(N)]
    sq = [0.0] * N  # within-cluster sum of squared pair distances
    upper = np.triu(np.ones((N, N), dtype=bool), 1)
    merges: list[Merge] = []
    for step in range(N - 1):
        masked = np.where(upper & active[:, None] & active[None, :], C, np.inf)
        i, j = divmod(int(np.argmin(masked)), N)
        n_i, n_j = len(members[i]), len(members[j])
        cross = float(D2[np.ix_(members[i], members[j])].sum())
        sq_t = sq[i] + sq[j] + cross
        sse_i, sse_j, sse_t = sq[i] / n_i, sq[j] / n_j, sq_t / (n_i + n_j)
        merges.append(Merge(ids[i], ids[j], float(C[i, j]), n_i + n_j, sse_i, sse_j, sse_t,
                            pseudo_t2(sse_i, sse_j, sse_t, n_i, n_j)))
        row = _lance_williams(linkage, C[i], C[j], n_i, n_j)
        C[i, :] = row
        C[:, i] = row
        C[i, i] = np.inf
        active[j] = False
        members[i] = members[i] + members[j]
        members[j] = []
        sq[i] = sq_t
        ids[i] = N + step
    return merges


def choose_cluster_count(merges: Sequence[Merge] | Sequence[float], threshold: float = JUMP_THRESHOLD,
                         resolution: float = 0.0) -> int:
    """Cluster count just before the largest relative jump in pseudo-t2.

    A jump at merge ``s`` is ``t2[s] / t2[s-1]``; the denominator is floored
    at ``1e-12 * max(t2)`` so merges of identical members (t2 = 0) do not
    produce spurious infinite ratios. An infinite value (two zero-scatter
    clusters merging) right after a finite one is an infinite jump; other
    steps touching an infinite value are skipped. Merges with linkage height
    below ``resolution`` join indistinguishable structures and count as
    t2 = 0. Returns 1 unless the largest jump exceeds ``threshold``.

    ``merges`` may also be a plain sequence of pseudo-t2 values.
    """
    t2 = np.array([getattr(mg, "pseudo_t2", mg) for mg in merges], dtype=np.float64)
    heights = np.array([getattr(mg, "height", np.inf) for mg in merges], dtype=np.float64)
    t2[heights < resolution] = 0.0
    if t2.size < 2:
        raise InvalidInputError("need at least 2 merges to choose a cluster count")
    n_points = t2.size + 1
    finite = t2[np.isfinite(t2)]
    top = float(finite.max()) if finite.size else 0.0
    floor = max(1e-12 * top, np.finfo(float).tiny)
    best_ratio, best_step = 0.0, None
    for s in range(1, t2.size):
        prev, cur = t2[s - 1], t2[s]
        if not np.isfinite(prev):
            continue
        ratio = cur / max(prev, floor) if np.isfinite(cur) else math.inf
        if ratio > best_ratio:
            best_ratio, best_step = ratio, s
    if best_step is None or best_ratio <= threshold:
        return 1
    return n_points - best_step


def cut_tree(merges: Sequence[Merge], n_points: int, n_clusters: int) -> np.ndarray:
    """Labels after replaying merges until ``n_clusters`` remain.

    Labels are numbered by decreasing cluster size, ties by lowest member.
    """
    if not 1 <= n_clusters <= n_points:
        raise InvalidInputError(f"n_clusters must be in [1, {n_points}], got {n_clusters}")
    groups: dict[int, list[int]] = {i: [i] for i in range(n_points)}
    for s, mg in enumerate(merges[: n_points - n_clusters]):
        groups[n_points + s] = groups.pop(mg.left) + groups.pop(mg.right)
    ordered = sorted(groups.values(), key=lambda g: (-len(g), min(g)))
    labels = np.empty(n_points, dtype=int)
    for lab, g in enumerate(ordered):
        labels[g] = lab
    return labels


def medoid(distances: np.ndarray, members: Sequence[int]) -> int:
    """Member with the smallest distance sum to the rest; ties -> lowest index."""
    idx = np.array(sorted(members))
    sums = distances[np.ix_(idx, idx)].sum(axis=1)
    return int(idx[int(np.argmin(sums))])


def cluster_scales(points: Sequence[ScalePoint], linkage: str = "average", medoid_mode: str = "distance",
                   data=None, k: int | None = None, threshold: float = JUMP_THRESHOLD,
                   resolution: float = RESOLUTION, n_clusters: int | None = None) -> ScaleClustering:
    """Group scale points with similar projectors.

    Args:
        points: Output of :func:`sweep`; empty points are set aside.
        linkage: ``average`` (default), ``single`` or ``complete``.
        medoid_mode: ``distance`` picks the distance medoid; ``distortion``
            picks the member with the largest ratio of distortion and then
            needs ``data``.
        resolution: Projector distance below which merges are ignored by
            the pseudo-t2 rule.
        n_clusters: Force a cluster count instead of the pseudo-t2 rule.
    """
    if medoid_mode not in MEDOID_MODES:
        raise InvalidInputError(f"unknown medoid mode {medoid_mode!r}; expected one of {MEDOID_MODES}")
    if medoid_mode == "distortion" and data is None:
        raise InvalidInputError("distortion medoids need the dataset")
    keep = [i for i, p in enumerate(points) if not p.empty]
    empties = tuple(i for i, p in enumerate(points) if p.empty)
    if len(keep) < 2:
        raise InsufficientPointsError(f"need at least 2 non-empty scale points, got {len(keep)}")
    live = [points[i] for i in keep]
    rank = live[0].projector.rank if k is None else k
    D = projector_distance_matrix(live)
    merges = agglomerate(D, linkage)
    if n_clusters is None:
        n_clusters = choose_cluster_count(merges, threshold, resolution) if len(merges) >= 2 else 1
    labels = cut_tree(merges, len(live), n_clusters)

    scores = None
    if medoid_mode == "distortion":
        from mpca.criteria import ratio_of_distortion

        ds = as_dataset(data)
        dist = pairwise_distances(ds)
        scores = [ratio_of_distortion(ds, p.decomposition, rank, p.interval, dist=dist).ratio for p in live]

    clusters = []
    for lab in range(n_clusters):
        local = [int(i) for i in np.flatnonzero(labels == lab)]
        if scores is None:
            rep = medoid(D, local)
        else:
            rep = max(local, key=lambda i: (scores[i], -i))
        chosen = live[rep]
        clusters.append(Cluster(lab, tuple(keep[i] for i in local), keep[rep], chosen.interval,
                                chosen.decomposition.top(rank).copy()))
    return ScaleClustering(tuple(keep), labels, merges, clusters, n_clusters, D, empties)
