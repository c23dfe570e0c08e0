"""Multiscale principal component analysis."""

from mpca._backend import BACKEND
from mpca.core import (
    FULL_SCALE,
    Dataset,
    DistanceMatrix,
    EigenDecomposition,
    ScaleInterval,
    WeightMask,
    binary_weights,
    center,
    covariance_pca,
    eigendecompose,
    laplacian,
    mpca,
    normalize,
    pairwise_distances,
    scatter_matrix,
)
from mpca.errors import EmptyScaleError, InsufficientPointsError, InvalidInputError, MPCAError
from mpca.projector import Projector, apply_projector, projector_distance, projector_from_vectors

__all__ = [
    "BACKEND",
    "FULL_SCALE",
    "Dataset",
    "DistanceMatrix",
    "EigenDecomposition",
    "EmptyScaleError",
    "InsufficientPointsError",
    "InvalidInputError",
    "MPCAError",
    "Projector",
    "ScaleInterval",
    "WeightMask",
    "apply_projector",
    "binary_weights",
    "center",
    "covariance_pca",
    "eigendecompose",
    "laplacian",
    "mpca",
    "normalize",
    "pairwise_distances",
    "projector_distance",
    "projector_from_vectors",
    "scatter_matrix",
]
