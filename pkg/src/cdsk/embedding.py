"""Spectral embedding from the normalized Laplacian of a similarity graph."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ValidationError
from .similarity import DiscSimilarityGraph
from .spectral import smallest_eigenpairs


@dataclass(frozen=True)
class Embedding:
    """Rows of y are the embedded samples; y is degree-orthonormal."""

    y: np.ndarray
    c: int


def solve_embedding(graph: DiscSimilarityGraph, c: int) -> Embedding:
    """Trace-minimizing embedding under the degree constraint Y^T D Y = I.

    Takes the c smallest eigenvectors U of the normalized Laplacian and
    returns Y = D^{-1/2} U.
    """
    n = graph.s.shape[0]
    if not 1 <= c <= n:
        raise ValidationError(f"need 1 <= c <= n, got c={c}, n={n}")
    _, u = smallest_eigenpairs(graph.normalized_laplacian, c)
    y = u / np.sqrt(graph.degree)[:, None]
    feas = y.T @ (graph.degree[:, None] * y)
    if float(np.max(np.abs(feas - np.eye(c)))) > 1e-6:
        raise NumericError("embedding violates the degree-orthonormality constraint")
    return Embedding(y=y, c=c)
