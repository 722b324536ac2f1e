"""Symmetric eigensolves and the signed split of an indefinite similarity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg

from .errors import NumericError, ValidationError

# Eigenvalues within this relative band of zero count as nonnegative.
_ZERO_EIG_REL = 1e-10
# Dense solves below this size; above it a truncated Lanczos solve is tried first.
_DENSE_LIMIT = 800


def check_symmetric(a: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix contains non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a))))
    if float(np.max(np.abs(a - a.T))) > tol * scale:
        raise ValidationError("matrix is not symmetric")
    return a


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Deterministic sign convention: first nonzero component of each column > 0."""
    fixed = vectors.copy()
    for k in range(fixed.shape[1]):
        col = fixed[:, k]
        nz = np.nonzero(np.abs(col) > 1e-12)[0]
        if nz.size and col[nz[0]] < 0:
            fixed[:, k] = -col
    return fixed


@dataclass(frozen=True)
class EigenSystem:
    """Full symmetric eigendecomposition, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def eigh(a: np.ndarray) -> EigenSystem:
    """Eigendecomposition of a symmetric matrix with a fixed sign convention."""
    a = check_symmetric(a)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition failed: {exc}") from exc
    return EigenSystem(eigenvalues=w, eigenvectors=_fix_signs(v))


def smallest_eigenpairs(a: np.ndarray, c: int) -> tuple[np.ndarray, np.ndarray]:
    """The c algebraically smallest eigenpairs of a symmetric matrix.

    Dense at desk scale; large matrices go through ARPACK with a fixed start
    vector so repeated calls stay bit-identical, falling back to the dense
    path if the iteration stalls.
    """
    a = check_symmetric(a)
    n = a.shape[0]
    if not 1 <= c <= n:
        raise ValidationError(f"need 1 <= c <= n, got c={c}, n={n}")
    if n > _DENSE_LIMIT and c < n // 4:
        v0 = np.full(n, 1.0 / np.sqrt(n))
        try:
            w, v = scipy.sparse.linalg.eigsh(a, k=c, which="SA", v0=v0)
            order = np.argsort(w)
            return w[order], _fix_signs(v[:, order])
        except scipy.sparse.linalg.ArpackError:
            pass
    system = eigh(a)
    return system.eigenvalues[:c], system.eigenvectors[:, :c]


@dataclass(frozen=True)
class PsdSplit:
    """Difference-of-PSD decomposition s = s_plus - s_minus."""

    s_plus: np.ndarray
    s_minus: np.ndarray


def psd_split(s: np.ndarray) -> PsdSplit:
    """Split a symmetric matrix into PSD parts by eigenvalue sign.

    Eigenvalues within 1e-10 of the spectral norm's scale are treated as
    nonnegative and kept on the plus side, so PSD inputs come back with an
    exactly zero minus part.
    """
    s = check_symmetric(s)
    system = eigh(s)
    w, v = system.eigenvalues, system.eigenvectors
    cut = _ZERO_EIG_REL * max(float(np.max(np.abs(w))), 0.0)
    neg = w < -cut
    pos = ~neg
    s_plus = (v[:, pos] * w[pos]) @ v[:, pos].T
    s_minus = (v[:, neg] * (-w[neg])) @ v[:, neg].T
    s_plus = 0.5 * (s_plus + s_plus.T)
    s_minus = 0.5 * (s_minus + s_minus.T)
    return PsdSplit(s_plus=s_plus, s_minus=s_minus)
