"""Margin loss, its similarity-weighted surrogate, and generalization bounds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_io import SampleMatrix
from .errors import ValidationError
from .kernel import KernelSpec, gram
from .similarity import check_simplex, class_scores
from .spectral import PsdSplit, check_symmetric, eigh


@dataclass(frozen=True)
class BoundInputs:
    """Quantities entering the error bounds.

    b_plus / b_minus bound the weighted quadratic forms of the PSD parts of
    the similarity; r bounds sqrt(sup_x S_plusminus(x, x)).
    """

    n: int
    c: int
    gamma: float
    delta: float
    b_plus: float
    b_minus: float
    r: float

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("n must be >= 1")
        if self.c < 2:
            raise ValidationError("c must be >= 2")
        if not self.gamma > 0:
            raise ValidationError("gamma must be > 0")
        if not 0.0 < self.delta < 1.0:
            raise ValidationError("delta must lie in (0, 1)")
        if self.b_plus < 0 or self.b_minus < 0:
            raise ValidationError("b_plus and b_minus must be >= 0")
        if not self.r > 0:
            raise ValidationError("r must be > 0")


def phi(x: float) -> float:
    """Ramp loss: 1 for x <= 0, 1 - x on [0, 1], 0 for x >= 1."""
    return float(min(1.0, max(0.0, 1.0 - x)))


def _score_table(train: SampleMatrix, alpha, spec: KernelSpec) -> np.ndarray:
    """scores[i, y-1] = sum_{j: y_j = y} alpha_j k(x_i, x_j) for all samples."""
    if train.labels is None:
        raise ValidationError("training data carries no labels")
    alpha = check_simplex(alpha, n=train.n)
    k = gram(train, spec).values
    c = int(train.labels.max())
    table = np.empty((train.n, c))
    for label in range(1, c + 1):
        mask = train.labels == label
        table[:, label - 1] = k[:, mask] @ alpha[mask]
    return table


def margin(x, y: int, train: SampleMatrix, alpha, spec: KernelSpec) -> float:
    """Own-class score minus the best competing class score."""
    scores = class_scores(x, train, alpha, spec)
    if scores.shape[0] < 2:
        raise ValidationError("margins need at least 2 classes")
    if not 1 <= y <= scores.shape[0]:
        raise ValidationError(f"class {y} outside {{1..{scores.shape[0]}}}")
    own = scores[y - 1]
    rest = np.delete(scores, y - 1)
    return float(own - rest.max())


def empirical_loss(train: SampleMatrix, alpha, spec: KernelSpec, gamma: float) -> float:
    """Mean ramp loss of the margins scaled by gamma over the training sample."""
    if not gamma > 0:
        raise ValidationError("gamma must be > 0")
    table = _score_table(train, alpha, spec)
    if table.shape[1] < 2:
        raise ValidationError("margins need at least 2 classes")
    n = train.n
    own = table[np.arange(n), train.labels - 1]
    masked = table.copy()
    masked[np.arange(n), train.labels - 1] = -np.inf
    margins = own - masked.max(axis=1)
    return float(np.mean(np.clip(1.0 - margins / gamma, 0.0, 1.0)))


def empirical_loss_upper_bound(
    train: SampleMatrix, alpha, spec: KernelSpec, gamma: float, similarity: np.ndarray
) -> float:
    """Similarity-weighted upper bound on the mean ramp loss (gamma >= 1 only).

    1 - (1/(n gamma)) sum_{i,j} ((a_i + a_j)/2) s_ij
      + (1/(n gamma)) sum_{i<j} 2 (a_i + a_j) s_ij [y_i != y_j]
    """
    if train.labels is None:
        raise ValidationError("training data carries no labels")
    if not gamma >= 1.0:
        raise ValidationError(f"the surrogate bound requires gamma >= 1, got {gamma}")
    del spec
    s = check_symmetric(np.asarray(similarity, dtype=np.float64))
    if s.shape[0] != train.n:
        raise ValidationError("similarity matrix does not match the sample")
    if float(s.min()) < 0.0 or float(s.max()) > 1.0 + 1e-12:
        raise ValidationError("similarity entries must lie in [0, 1]")
    alpha = check_simplex(alpha, n=train.n)
    pair_sum = alpha[:, None] + alpha[None, :]
    diff = train.labels[:, None] != train.labels[None, :]
    total = 0.5 * float(np.sum(pair_sum * s))
    cross = float(np.sum(pair_sum * s * diff))  # = sum_{i<j} 2 (a_i+a_j) s_ij [diff]
    n = train.n
    return 1.0 - total / (n * gamma) + cross / (n * gamma)


def omega_terms(split: PsdSplit, alpha, labels) -> tuple[float, float]:
    """Within-class quadratic forms (omega_plus, omega_minus) of the PSD parts."""
    labels = np.asarray(labels, dtype=np.int64)
    alpha = check_simplex(alpha, n=split.s_plus.shape[0])
    if labels.shape != alpha.shape:
        raise ValidationError("labels must match alpha")
    plus = minus = 0.0
    for label in np.unique(labels):
        mask = labels == label
        part = alpha[mask]
        plus += float(part @ split.s_plus[np.ix_(mask, mask)] @ part)
        minus += float(part @ split.s_minus[np.ix_(mask, mask)] @ part)
    return plus, minus


def generalization_bound(inputs: BoundInputs, empirical: float) -> float:
    """High-probability bound on the generalization error of the margin rule."""
    if empirical < 0:
        raise ValidationError("empirical loss must be >= 0")
    n, c = inputs.n, inputs.c
    b_total = inputs.b_plus + inputs.b_minus
    complexity = 8.0 * inputs.r * (2 * c - 1) * c * b_total / (inputs.gamma * np.sqrt(n))
    deviation = (
        16.0 * c * (2 * c - 1) * b_total * inputs.r**2 / inputs.gamma + 1.0
    ) * np.sqrt(np.log(4.0 / inputs.delta) / (2.0 * n))
    return float(empirical + complexity + deviation)


def rademacher_bound(inputs: BoundInputs, delta: float) -> float:
    """High-probability bound on the Rademacher complexity of the score class."""
    if not 0.0 < delta < 1.0:
        raise ValidationError("delta must lie in (0, 1)")
    n, c = inputs.n, inputs.c
    b_total = inputs.b_plus + inputs.b_minus
    lead = inputs.r * (2 * c - 1) * c * b_total / np.sqrt(n)
    tail = 2.0 * c * (2 * c - 1) * b_total * inputs.r**2 * np.sqrt(
        np.log(2.0 / delta) / (2.0 * n)
    )
    return float(lead + tail)


def lemma_b1_check(s: np.ndarray, alpha, labels, c: int) -> tuple[float, float, bool]:
    """Whole-sample vs class-blocked quadratic form for a PSD similarity.

    Returns (lhs, rhs, holds) with lhs = a^T S a and
    rhs = c sum_y a^(y)T S a^(y); PSD-ness of S gives lhs <= rhs.
    """
    s = check_symmetric(np.asarray(s, dtype=np.float64))
    labels = np.asarray(labels, dtype=np.int64)
    alpha = check_simplex(alpha, n=s.shape[0])
    if labels.shape != alpha.shape:
        raise ValidationError("labels must match alpha")
    if c < 1 or int(labels.max(initial=1)) > c:
        raise ValidationError("labels exceed the declared class count")
    w = eigh(s).eigenvalues
    if float(w.min()) < -1e-8 * max(1.0, float(np.abs(w).max())):
        raise ValidationError("similarity must be positive semidefinite")
    lhs = float(alpha @ s @ alpha)
    rhs = 0.0
    for label in range(1, c + 1):
        mask = labels == label
        if np.any(mask):
            part = alpha[mask]
            rhs += float(part @ s[np.ix_(mask, mask)] @ part)
    rhs *= c
    return lhs, rhs, lhs <= rhs + 1e-10
