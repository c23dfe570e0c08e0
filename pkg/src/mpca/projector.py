"""Projector representation of PCA structures.

A rank-k structure is stored as ``rho = E E^T`` with the k principal axes as
columns of ``E``. The representation does not depend on eigenvector signs or
on the basis chosen inside the subspace, and the Frobenius norm of a
difference of projectors is a metric on subspaces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from mpca.core import Dataset, EigenDecomposition
from mpca.errors import InvalidInputError

ORTHONORMAL_TOL = 1e-8


@dataclass(frozen=True)
class Projector:
    entries: np.ndarray
    rank: int

    @property
    def m(self) -> int:
        return self.entries.shape[0]


def _as_columns(vectors) -> np.ndarray:
    E = np.asarray(vectors, dtype=np.float64)
    if E.ndim == 1:
        return E[:, None]
    # list of vectors -> vectors as columns
    if not isinstance(vectors, np.ndarray):
        return E.T
    return E


def projector_from_vectors(vectors, tol: float = ORTHONORMAL_TOL) -> Projector:
    """Build ``sum_i e_i e_i^T`` from k orthonormal vectors.

    ``vectors`` is either a sequence of m-vectors or an m x k array whose
    columns are the vectors.
    """
    E = _as_columns(vectors)
    m, k = E.shape
    if k < 1 or k > m:
        raise InvalidInputError(f"need between 1 and {m} vectors, got {k}")
    G = E.T @ E
    err = np.abs(G - np.eye(k))
    worst = float(err.max())
    if worst > tol:
        a, b = np.unravel_index(int(np.argmax(err)), err.shape)
        raise InvalidInputError(
            f"vectors are not orthonormal: <e_{a}, e_{b}> = {G[a, b]!r} (deviation {worst:.3g})"
        )
    if k == m:
        P = np.eye(m)
    else:
        P = E @ E.T
        P = 0.5 * (P + P.T)
    P.setflags(write=False)
    return Projector(P, k)


def projector_from_decomposition(dec: EigenDecomposition, k: int) -> Projector:
    return projector_from_vectors(dec.top(k))


def cortege(dec: EigenDecomposition) -> list[Projector]:
    """Nested projectors rho_1, ..., rho_{m-1}; rho_m = I is implied."""
    m = dec.eigenvectors.shape[0]
    return [projector_from_decomposition(dec, k) for k in range(1, m)]


def projector_distance(a: Projector, b: Projector) -> float:
    if a.entries.shape != b.entries.shape:
        raise InvalidInputError(f"dimension mismatch: {a.entries.shape} vs {b.entries.shape}")
    return float(np.linalg.norm(a.entries - b.entries, "fro"))


def apply_projector(p: Projector, data: Dataset | np.ndarray) -> np.ndarray:
    """Orthogonal projection of every row onto the subspace of ``p``."""
    X = data.values if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != p.m:
        raise InvalidInputError(f"data has shape {X.shape}, projector acts on R^{p.m}")
    return X @ p.entries


def subspace_basis(p: Projector) -> np.ndarray:
    """Orthonormal basis (m x rank) of the range of ``p``."""
    vals, vecs = np.linalg.eigh(p.entries)
    return vecs[:, np.argsort(-vals)[: p.rank]]


def max_principal_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Largest principal angle in degrees between two column spans."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    qa, _ = np.linalg.qr(a[:, None] if a.ndim == 1 else a)
    qb, _ = np.linalg.qr(b[:, None] if b.ndim == 1 else b)
    s = np.linalg.svd(qa.T @ qb, compute_uv=False)
    return float(np.degrees(np.arccos(np.clip(s.min(), -1.0, 1.0))))


def mean_projector(projectors: Sequence[Projector]) -> np.ndarray:
    return np.mean([p.entries for p in projectors], axis=0)
