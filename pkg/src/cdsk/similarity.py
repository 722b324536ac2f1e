"""Discriminative similarity graph, clustering objective, kernel classifier scores.

The similarity couples per-point simplex weights alpha with the kernel gram
matrix: s_ij = 2 (alpha_i + alpha_j - lam * alpha_i * alpha_j) k_ij, which is
entrywise nonnegative whenever lam <= 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_io import SampleMatrix
from .errors import ConfigError, DegenerateDataError, NumericError, ValidationError
from .kernel import GramMatrix, KernelSpec, pairwise_kernel
from .spectral import PsdSplit

_SIMPLEX_TOL = 1e-10
# A graph row whose degree falls below this fraction of the largest degree is
# effectively disconnected and breaks the normalized Laplacian.
_DEGREE_REL_FLOOR = 1e-12


def check_simplex(alpha, n: int | None = None, tol: float = _SIMPLEX_TOL) -> np.ndarray:
    """Validate that alpha lies on the probability simplex; returns float64 copy."""
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.ndim != 1:
        raise ValidationError(f"alpha must be a vector, got shape {alpha.shape}")
    if n is not None and alpha.shape[0] != n:
        raise ValidationError(f"alpha has length {alpha.shape[0]}, expected {n}")
    if not np.all(np.isfinite(alpha)):
        raise ValidationError("alpha contains non-finite entries")
    if np.min(alpha) < -tol:
        raise ValidationError(f"alpha has a negative entry: {np.min(alpha)}")
    total = float(np.sum(alpha))
    if abs(total - 1.0) > tol:
        raise ValidationError(f"alpha sums to {total}, expected 1")
    return alpha


@dataclass(frozen=True)
class DiscSimilarityGraph:
    """Weighted graph induced by the discriminative similarity."""

    s: np.ndarray
    degree: np.ndarray
    laplacian: np.ndarray
    normalized_laplacian: np.ndarray
    lam: float


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not np.isfinite(lam) or lam < 0 or lam > 2:
        raise ConfigError(f"lambda must satisfy 0 <= lambda <= 2, got {lam}")
    return lam


def disc_similarity(gram: GramMatrix, alpha, lam: float) -> DiscSimilarityGraph:
    """Build the discriminative similarity graph for given weights and lambda."""
    lam = _check_lambda(lam)
    k = gram.values
    alpha = check_simplex(alpha, n=k.shape[0])
    pair_sum = alpha[:, None] + alpha[None, :]
    pair_prod = np.outer(alpha, alpha)
    s = 2.0 * (pair_sum - lam * pair_prod) * k
    degree = s.sum(axis=1)
    floor = _DEGREE_REL_FLOOR * max(float(degree.max()), 0.0)
    if float(degree.min()) <= floor:
        raise DegenerateDataError(
            "a graph row has (near-)zero degree; similarity graph is disconnected"
        )
    laplacian = np.diag(degree) - s
    inv_sqrt = 1.0 / np.sqrt(degree)
    normalized = laplacian * np.outer(inv_sqrt, inv_sqrt)
    normalized = 0.5 * (normalized + normalized.T)
    return DiscSimilarityGraph(
        s=s, degree=degree, laplacian=laplacian, normalized_laplacian=normalized, lam=lam
    )


def general_disc_similarity(s_raw: np.ndarray, split: PsdSplit, alpha, lam: float) -> np.ndarray:
    """Discriminative similarity for a possibly indefinite base similarity.

    Entry-wise 2 (alpha_i + alpha_j) s_ij - 2 lam alpha_i alpha_j s_plus_ij
    - 2 lam alpha_i alpha_j s_minus_ij, where s_plus - s_minus must
    reconstruct s_raw.
    """
    lam = float(lam)
    if not np.isfinite(lam) or lam < 0:
        raise ConfigError(f"lambda must be >= 0, got {lam}")
    s_raw = np.asarray(s_raw, dtype=np.float64)
    gap = float(np.linalg.norm(s_raw - (split.s_plus - split.s_minus)))
    if gap > 1e-8 * max(1.0, float(np.linalg.norm(s_raw))):
        raise ValidationError(f"split does not reconstruct the similarity (gap {gap:.2e})")
    alpha = check_simplex(alpha, n=s_raw.shape[0])
    pair_sum = alpha[:, None] + alpha[None, :]
    pair_prod = np.outer(alpha, alpha)
    return 2.0 * pair_sum * s_raw - 2.0 * lam * pair_prod * split.s_plus \
        - 2.0 * lam * pair_prod * split.s_minus


def laplacian_quadratic(y: np.ndarray, graph: DiscSimilarityGraph) -> float:
    """tr(Y^T L Y), cross-checked against (1/2) sum_ij s_ij ||Y_i - Y_j||^2."""
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 2 or y.shape[0] != graph.s.shape[0]:
        raise ValidationError(f"embedding shape {y.shape} does not match graph")
    direct = float(np.sum(y * (graph.laplacian @ y)))
    sq = np.sum(y * y, axis=1)
    pair_form = 0.5 * float(np.sum(graph.s * (sq[:, None] + sq[None, :] - 2.0 * (y @ y.T))))
    scale = max(1.0, abs(direct))
    if abs(direct - pair_form) > 1e-8 * scale:
        raise NumericError(
            f"Laplacian quadratic forms disagree: {direct} vs {pair_form}"
        )
    return direct


def alpha_objective_terms(gram: GramMatrix, alpha, lam: float) -> float:
    """The alpha-only objective terms: -alpha^T K 1 + lam alpha^T K alpha."""
    k = gram.values
    alpha = check_simplex(alpha, n=k.shape[0])
    ksum = k @ alpha
    return float(-np.sum(ksum) + lam * float(alpha @ ksum))


def cdsk_objective(
    y: np.ndarray, graph: DiscSimilarityGraph, gram: GramMatrix, alpha, lam: float
) -> float:
    """Relaxed clustering objective: (1/2) tr(Y^T L Y) + alpha terms."""
    return 0.5 * laplacian_quadratic(y, graph) + alpha_objective_terms(gram, alpha, lam)


def class_scores(x, train: SampleMatrix, alpha, spec: KernelSpec) -> np.ndarray:
    if train.labels is None:
        raise ValidationError("training data carries no labels")
    alpha = check_simplex(alpha, n=train.n)
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != train.d:
        raise ValidationError(f"point has {x.shape[1]} features, expected {train.d}")
    krow = pairwise_kernel(x, train.data, spec.bandwidth)[0]
    c = int(train.labels.max())
    scores = np.zeros(c)
    for label in range(1, c + 1):
        mask = train.labels == label
        scores[label - 1] = float(np.sum(alpha[mask] * krow[mask]))
    return scores


def hypothesis_score(x, y: int, train: SampleMatrix, alpha, spec: KernelSpec) -> float:
    """Weighted kernel vote for class y: sum_{i: y_i = y} alpha_i k(x, x_i)."""
    scores = class_scores(x, train, alpha, spec)
    if not 1 <= y <= scores.shape[0]:
        raise ValidationError(f"class {y} outside {{1..{scores.shape[0]}}}")
    return float(scores[y - 1])


def classify(x, train: SampleMatrix, alpha, spec: KernelSpec) -> int:
    """Highest-scoring class; ties resolve to the smallest class id."""
    scores = class_scores(x, train, alpha, spec)
    return int(np.argmax(scores)) + 1
