"""Weighted kernel density classification and its integrated-squared-error terms.

For a binary-labeled sample with simplex weights alpha and Gaussian kernel
bandwidth h, the class densities are p_hat(x, y) = tau0 sum_{i: y_i = y}
alpha_i K_h(x - x_i) with tau0 = (2 pi)^{-d/2} h^{-d}; products of two such
kernels integrate against the wider kernel at bandwidth sqrt(2) h, whose
normalizer is tau1 = (2 pi)^{-d/2} (sqrt(2) h)^{-d}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .errors import ValidationError
from .kernel import pairwise_kernel
from .similarity import check_simplex


@dataclass(frozen=True)
class KdeModel:
    """Weighted two-class sample with a kernel bandwidth."""

    points: np.ndarray
    alpha: np.ndarray
    labels: np.ndarray
    h: float

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.float64)
        if points.ndim != 2 or points.shape[0] < 1:
            raise ValidationError("points must be a 2-D array with n >= 1 rows")
        if not np.all(np.isfinite(points)):
            raise ValidationError("points contain non-finite entries")
        alpha = check_simplex(self.alpha, n=points.shape[0])
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.shape != (points.shape[0],):
            raise ValidationError("labels must have one entry per point")
        if not np.all((labels == 1) | (labels == 2)):
            raise ValidationError("labels must take values in {1, 2}")
        if not self.h > 0:
            raise ValidationError(f"bandwidth must be > 0, got {self.h}")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def tau0(self) -> float:
        return float((2.0 * np.pi) ** (-self.d / 2.0) * self.h ** (-self.d))

    @property
    def tau1(self) -> float:
        return float((2.0 * np.pi) ** (-self.d / 2.0) * (np.sqrt(2.0) * self.h) ** (-self.d))


def _kernel_row(model: KdeModel, x) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape != (1, model.d):
        raise ValidationError(f"query point must have {model.d} features")
    return pairwise_kernel(x, model.points, model.h)[0]


def kde(x, model: KdeModel) -> float:
    """Weighted kernel density estimate at x (all points, both classes)."""
    return model.tau0 * float(np.sum(model.alpha * _kernel_row(model, x)))


def class_kde(x, y: int, model: KdeModel) -> float:
    """Class-restricted weighted density estimate at x."""
    if y not in (1, 2):
        raise ValidationError(f"class must be 1 or 2, got {y}")
    mask = model.labels == y
    return model.tau0 * float(np.sum(model.alpha[mask] * _kernel_row(model, x)[mask]))


def decide(x, model: KdeModel) -> int:
    """Density rule: class 1 iff p_hat(x, 1) - p_hat(x, 2) >= 0."""
    return 1 if class_kde(x, 1, model) - class_kde(x, 2, model) >= 0.0 else 2


def empirical_ise_terms(model: KdeModel, lambda1: float) -> tuple[float, float, np.ndarray]:
    """Sample statistics of the misclassification ISE surrogate.

    Returns (hat_ise, k_alpha, s_ise):
    hat_ise = 4 sum_{i<j} (a_i + a_j) K_h(x_i - x_j) [y_i != y_j]
              - sum_{i,j} (a_i + a_j) K_h(x_i - x_j);
    k_alpha = a^T Kt a - 4 sum_{i<j} a_i a_j Kt_ij [y_i != y_j]  (Kt at sqrt(2) h);
    s_ise_ij = 4 (a_i + a_j - lambda1 a_i a_j) K_h(x_i - x_j),
    which is twice the discriminative similarity built at lambda = lambda1.
    """
    lambda1 = float(lambda1)
    if not np.isfinite(lambda1):
        raise ValidationError("lambda1 must be finite")
    a = model.alpha
    kh = pairwise_kernel(model.points, model.points, model.h)
    kh = 0.5 * (kh + kh.T)
    np.fill_diagonal(kh, 1.0)
    kt = pairwise_kernel(model.points, model.points, np.sqrt(2.0) * model.h)
    kt = 0.5 * (kt + kt.T)
    np.fill_diagonal(kt, 1.0)
    pair_sum = a[:, None] + a[None, :]
    pair_prod = np.outer(a, a)
    diff = model.labels[:, None] != model.labels[None, :]

    hat_ise = 2.0 * float(np.sum(pair_sum * kh * diff)) - float(np.sum(pair_sum * kh))
    k_alpha = float(a @ (kt @ a)) - 2.0 * float(np.sum(pair_prod * kt * diff))
    s_ise = 4.0 * (pair_sum - lambda1 * pair_prod) * kh
    return hat_ise, k_alpha, s_ise


def decision_squared_integral(model: KdeModel) -> float:
    """Exact integral of (p_hat(x,1) - p_hat(x,2))^2 over R^d.

    Gaussian products integrate in closed form, giving
    tau1 (sum_y a^(y)T Kt a^(y) - 2 sum_{i<j, y_i != y_j} a_i a_j Kt_ij).
    """
    a = model.alpha
    kt = pairwise_kernel(model.points, model.points, np.sqrt(2.0) * model.h)
    sign = np.where(model.labels == 1, 1.0, -1.0)
    signed = a * sign
    return model.tau1 * float(signed @ (kt @ signed))


def ise_residual_slack(model: KdeModel, eps: float) -> float:
    """Additive slack 2 tau0 (1/(n-1) + eps) of the ISE surrogate."""
    if model.n < 2:
        raise ValidationError("residual slack needs n >= 2")
    if eps < 0:
        raise ValidationError("eps must be >= 0")
    return 2.0 * model.tau0 * (1.0 / (model.n - 1) + eps)


def gaussian_convolution_check(a: float, b: float, h: float) -> tuple[float, float]:
    """Integral of K_h(x - a) K_h(x - b) over the line: quadrature vs closed form.

    The closed form is sqrt(pi) h exp(-(a - b)^2 / (4 h^2)); the numeric value
    comes from a composite trapezoid on [min - 10h, max + 10h] with 20001
    nodes.
    """
    if not h > 0:
        raise ValidationError(f"bandwidth must be > 0, got {h}")
    a, b = float(a), float(b)
    grid = np.linspace(min(a, b) - 10.0 * h, max(a, b) + 10.0 * h, 20001)
    values = np.exp(-((grid - a) ** 2) / (2.0 * h * h)) * np.exp(
        -((grid - b) ** 2) / (2.0 * h * h)
    )
    numeric = float(trapezoid(values, grid))
    closed = float(np.sqrt(np.pi) * h * np.exp(-((a - b) ** 2) / (4.0 * h * h)))
    return numeric, closed
