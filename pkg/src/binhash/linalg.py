"""Dense linear-algebra kernels: truncated SVD, seeded Gaussian matrices,
QR orthogonalization with the Haar sign convention.

Everything here works in float64 and is deterministic for fixed inputs.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "truncated_svd",
    "gaussian_matrix",
    "qr_orthogonal",
    "SvdResult",
    "DegenerateMatrixError",
]


class DegenerateMatrixError(ValueError):
    """Raised when an input matrix is numerically rank-deficient."""


class SvdResult:
    """Rank-k factorization X ~ U @ diag(S) @ V.T.

    U is n x k, S holds k non-increasing singular values, V is d x k with
    orthonormal columns.
    """

    __slots__ = ("U", "S", "V")

    def __init__(self, U: np.ndarray, S: np.ndarray, V: np.ndarray):
        self.U = U
        self.S = S
        self.V = V


def _check_finite(X: np.ndarray, name: str = "matrix") -> None:
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")


def truncated_svd(X: np.ndarray, k: int) -> SvdResult:
    """Best rank-k approximation of X in Frobenius norm.

    Deterministic: backed by a full dense SVD (LAPACK), then truncated.
    Raises ValueError for k outside [1, min(n, d)] or non-finite input.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    n, d = X.shape
    if not 1 <= k <= min(n, d):
        raise ValueError(f"k={k} out of range [1, {min(n, d)}]")
    _check_finite(X, "input matrix")

    U, S, Vt = np.linalg.svd(X, full_matrices=False)
    return SvdResult(
        U=np.ascontiguousarray(U[:, :k]),
        S=np.ascontiguousarray(S[:k]),
        V=np.ascontiguousarray(Vt[:k].T),
    )


def gaussian_matrix(k: int, seed: int) -> np.ndarray:
    """k x k matrix of i.i.d. standard normals from a seeded PCG64 stream.

    Same (k, seed) always yields the same matrix.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = np.random.default_rng(np.uint64(seed))
    return rng.standard_normal((k, k))


def qr_orthogonal(A: np.ndarray) -> np.ndarray:
    """Q factor of A = QR, with columns flipped so that diag(R) > 0.

    The sign correction makes Gaussian input map to a Haar-distributed
    orthogonal matrix. Raises DegenerateMatrixError when any |R_jj| falls
    below 1e-12 * ||A||.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    _check_finite(A, "input matrix")

    Q, R = np.linalg.qr(A)
    diag = np.diagonal(R)
    scale = np.linalg.norm(A)
    if np.any(np.abs(diag) < 1e-12 * max(scale, 1e-300)):
        raise DegenerateMatrixError("matrix is numerically rank-deficient")
    signs = np.sign(diag)
    return Q * signs[np.newaxis, :]
