"""Isotropic Gaussian kernel, gram matrix assembly, bandwidth heuristic."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .data_io import SampleMatrix
from .errors import DegenerateDataError, ValidationError

# Relative spread below this treats the pairwise-distance multiset as constant.
_DEGENERATE_REL_STD = 1e-12


@dataclass(frozen=True)
class KernelSpec:
    """Gaussian kernel exp(-||x - t||^2 / (2 bandwidth^2))."""

    bandwidth: float

    def __post_init__(self):
        if not np.isfinite(self.bandwidth) or self.bandwidth <= 0:
            raise ValidationError(f"bandwidth must be a positive real, got {self.bandwidth}")


@dataclass(frozen=True)
class GramMatrix:
    """Kernel values on all sample pairs, plus the bandwidth that produced them."""

    values: np.ndarray
    bandwidth: float


def eval_kernel(x, t, spec: KernelSpec) -> float:
    """Kernel value at a single pair of points."""
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if x.shape != t.shape:
        raise ValidationError(f"point shapes differ: {x.shape} vs {t.shape}")
    diff = x - t
    return float(np.exp(-np.dot(diff, diff) / (2.0 * spec.bandwidth**2)))


def pairwise_sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between rows of a and rows of b."""
    aa = np.sum(a * a, axis=1)
    bb = np.sum(b * b, axis=1)
    sq = aa[:, None] + bb[None, :] - 2.0 * (a @ b.T)
    np.maximum(sq, 0.0, out=sq)
    return sq


def pairwise_kernel(a: np.ndarray, b: np.ndarray, bandwidth: float) -> np.ndarray:
    """Kernel matrix between rows of a and rows of b."""
    return np.exp(-pairwise_sq_dists(a, b) / (2.0 * bandwidth**2))


def gram(data: SampleMatrix, spec: KernelSpec) -> GramMatrix:
    """Symmetric kernel gram matrix with unit diagonal."""
    values = pairwise_kernel(data.data, data.data, spec.bandwidth)
    # symmetrize away dot-product rounding; the diagonal is exactly 1
    values = 0.5 * (values + values.T)
    np.fill_diagonal(values, 1.0)
    return GramMatrix(values=values, bandwidth=spec.bandwidth)


def default_bandwidth(data: SampleMatrix) -> float:
    """Population variance of the pairwise-distance multiset {||x_i - x_j||, i<j}.

    Raises DegenerateDataError when all pairwise distances coincide (identical
    rows included): the heuristic then carries no scale information.
    """
    dists = pdist(data.data)
    mean = float(np.mean(dists))
    var = float(np.var(dists))
    if var <= (_DEGENERATE_REL_STD * mean) ** 2:
        raise DegenerateDataError(
            "pairwise distances have zero variance; supply an explicit bandwidth"
        )
    return var
