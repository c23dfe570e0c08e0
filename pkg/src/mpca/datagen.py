"""Seeded synthetic datasets with known structure.

All generators draw from ``numpy.random.Generator(PCG64(seed))``, so the
same GeneratorSpec reproduces the same matrix bit for bit on a given numpy build.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from mpca.core import Dataset, center
from mpca.errors import InvalidInputError

KINDS = ("line_with_outliers", "repeated_pattern", "plane_with_outliers")

PLANE_U = np.array([2.0, -1.0, 0.0]) / np.sqrt(5.0)
PLANE_V = np.array([1.0, 2.0, -5.0]) / np.sqrt(30.0)


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    seed: int = 0
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown generator kind {self.kind!r}; expected one of {KINDS}")


@dataclass(frozen=True)
class Generated:
    """Raw (uncentered) points plus the geometry used to make them."""

    values: np.ndarray
    directions: dict[str, np.ndarray]
    is_outlier: np.ndarray
    spec: GeneratorSpec

    @property
    def dataset(self) -> Dataset:
        return center(self.values)

    def metadata(self) -> dict[str, Any]:
        return {
            "kind": self.spec.kind,
            "seed": self.spec.seed,
            "params": dict(self.spec.params),
            "directions": {k: v.tolist() for k, v in self.directions.items()},
            "n": int(self.values.shape[0]),
            "m": int(self.values.shape[1]),
            "outlier_rows": [int(i) for i in np.flatnonzero(self.is_outlier)],
        }


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise InvalidInputError("direction must be nonzero")
    return v / norm


def gen_line_with_outliers(n_inliers: int = 50, n_outliers: int = 2, seed: int = 0, dim: int = 2,
                           direction=None, half_length: float = 1.0, noise: float = 0.01,
                           outlier_factor: float = 3.0) -> Generated:
    """Points spread uniformly along a line, plus outliers off to one side.

    Outliers sit along a fixed unit normal at ``outlier_factor`` times the
    inlier spread (``2 * half_length``), up to +10% jitter.
    """
    if n_inliers < 10:
        raise InvalidInputError(f"need at least 10 inliers, got {n_inliers}")
    if n_outliers < 0 or dim < 2:
        raise InvalidInputError("need n_outliers >= 0 and dim >= 2")
    d = _unit(direction if direction is not None else np.r_[1.0, 0.5, np.zeros(dim - 2)])
    if d.size != dim:
        raise InvalidInputError(f"direction has length {d.size}, expected {dim}")
    # fixed normal: first basis vector orthogonalized against d
    basis = np.linalg.qr(np.column_stack([d, np.eye(dim)]))[0]
    normal = basis[:, 1]
    others = basis[:, 1:]
    rng = _rng(seed)
    t = rng.uniform(-half_length, half_length, n_inliers)
    inliers = np.outer(t, d) + noise * rng.standard_normal((n_inliers, dim - 1)) @ others.T
    spread = 2.0 * half_length
    reach = outlier_factor * spread * (1.0 + 0.1 * rng.uniform(size=n_outliers))
    along = rng.uniform(-half_length, half_length, n_outliers)
    outliers = np.outer(along, d) + np.outer(reach, normal)
    X = np.vstack([inliers, outliers])
    flags = np.r_[np.zeros(n_inliers, bool), np.ones(n_outliers, bool)]
    spec = GeneratorSpec("line_with_outliers", seed, dict(
        n_inliers=n_inliers, n_outliers=n_outliers, dim=dim, half_length=half_length,
        noise=noise, outlier_factor=outlier_factor))
    return Generated(X, {"direction": d, "normal": normal}, flags, spec)


def gen_repeated_pattern(seed: int = 0, ratios=(1.0, 0.18, 0.01), n_top: int = 3, n_mid: int = 3,
                         points_per_segment: int = 12, width: float = 1000.0, noise: float = 0.0,
                         directions=None) -> Generated:
    """Three-level hierarchy in the plane.

    ``n_top`` groups are spread along d1 over ``ratios[0] * width``; each
    holds ``n_mid`` copies spread along d2 over ``ratios[1] * width``; each
    copy is a short segment along d3 of length ``ratios[2] * width`` with
    points placed uniformly at random.
    """
    r = tuple(float(x) for x in ratios)
    if len(r) != 3 or min(r) <= 0:
        raise InvalidInputError(f"need three positive level ratios, got {ratios}")
    if not r[0] >= r[1] >= r[2]:
        raise InvalidInputError(f"level ratios must be descending, got {ratios}")
    if n_top < 2 or n_mid < 2 or points_per_segment < 2:
        raise InvalidInputError("need n_top, n_mid and points_per_segment all >= 2")
    if directions is None:
        d1, d2, d3 = np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([1.0, 1.0]) / np.sqrt(2.0)
    else:
        d1, d2, d3 = (_unit(v) for v in directions)
    rng = _rng(seed)
    top = np.linspace(0.0, r[0] * width, n_top)
    mid = np.linspace(0.0, r[1] * width, n_mid)
    half = 0.5 * r[2] * width
    rows = []
    for a in top:
        for b in mid:
            s = rng.uniform(-half, half, points_per_segment)
            rows.append(a * d1 + b * d2 + np.outer(s, d3))
    X = np.vstack(rows)
    if noise > 0:
        X = X + noise * rng.standard_normal(X.shape)
    spec = GeneratorSpec("repeated_pattern", seed, dict(
        ratios=list(r), n_top=n_top, n_mid=n_mid, points_per_segment=points_per_segment,
        width=width, noise=noise))
    return Generated(X, {"d1": d1, "d2": d2, "d3": d3}, np.zeros(X.shape[0], bool), spec)


def gen_plane_with_outliers(n_inliers: int = 200, n_outliers: int = 5, seed: int = 0,
                            spread_u: float = 1.0, spread_v: float = 0.3, noise: float = 0.01,
                            outlier_factor: float = 3.0) -> Generated:
    """Uniform points on span(u, v) in R^3 with outliers along the plane normal.

    u = (2, -1, 0)/sqrt(5) carries the larger spread. Outliers keep random
    in-plane coordinates and are pushed to one side of the plane by
    ``outlier_factor`` times the inlier diameter (up to +10% jitter).
    """
    if n_inliers < 50:
        raise InvalidInputError(f"need at least 50 inliers, got {n_inliers}")
    if n_outliers < 0:
        raise InvalidInputError("n_outliers must be >= 0")
    u, v = PLANE_U, PLANE_V
    normal = np.cross(u, v)
    rng = _rng(seed)
    a = rng.uniform(-spread_u, spread_u, n_inliers)
    b = rng.uniform(-spread_v, spread_v, n_inliers)
    inliers = np.outer(a, u) + np.outer(b, v) + np.outer(noise * rng.standard_normal(n_inliers), normal)
    diameter = 2.0 * np.hypot(spread_u, spread_v)
    oa = rng.uniform(-spread_u, spread_u, n_outliers)
    ob = rng.uniform(-spread_v, spread_v, n_outliers)
    reach = outlier_factor * diameter * (1.0 + 0.1 * rng.uniform(size=n_outliers))
    outliers = np.outer(oa, u) + np.outer(ob, v) + np.outer(reach, normal)
    X = np.vstack([inliers, outliers])
    flags = np.r_[np.zeros(n_inliers, bool), np.ones(n_outliers, bool)]
    spec = GeneratorSpec("plane_with_outliers", seed, dict(
        n_inliers=n_inliers, n_outliers=n_outliers, spread_u=spread_u, spread_v=spread_v,
        noise=noise, outlier_factor=outlier_factor))
    return Generated(X, {"u": u.copy(), "v": v.copy(), "normal": normal}, flags, spec)


_GENERATORS = {
    "line_with_outliers": gen_line_with_outliers,
    "repeated_pattern": gen_repeated_pattern,
    "plane_with_outliers": gen_plane_with_outliers,
}


def generate(spec: GeneratorSpec) -> Generated:
    try:
        return _GENERATORS[spec.kind](seed=spec.seed, **spec.params)
    except TypeError as exc:
        raise InvalidInputError(f"bad parameters for {spec.kind}: {exc}") from exc
