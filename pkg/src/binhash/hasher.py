"""Hash model fitting and encoding.

Pipeline: (optional) L2 normalization -> (optional) mean centering ->
projection onto the top-k PCA basis -> random orthogonal rotation ->
entry-wise sigmoid -> threshold at 0.5.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .index import CodeDatabase
from .linalg import gaussian_matrix, qr_orthogonal, truncated_svd

__all__ = [
    "HashModel",
    "fit",
    "project",
    "project_batch",
    "reduce_batch",
    "binarize",
    "encode_batch",
    "sigmoid",
    "explained_variance_ratio",
]


@dataclass(frozen=True)
class HashModel:
    """Fitted hashing artifact. Immutable after fit.

    mean is the training mean of the (possibly L2-normalized) data; zeros
    when centering is disabled. V is d x k with orthonormal columns, R is
    a k x k orthogonal rotation.
    """

    d: int
    k: int
    mean: np.ndarray
    V: np.ndarray
    R: np.ndarray
    seed: int
    l2_normalize: bool = True
    mean_center: bool = True

    def __post_init__(self):
        if self.k > self.d:
            raise ValueError(f"k={self.k} exceeds input dimension d={self.d}")
        if self.mean.shape != (self.d,):
            raise ValueError("mean must be a d-vector")
        if self.V.shape != (self.d, self.k):
            raise ValueError("V must be d x k")
        if self.R.shape != (self.k, self.k):
            raise ValueError("R must be k x k")


def sigmoid(u: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function; saturates cleanly to {0, 1}."""
    u = np.asarray(u, dtype=np.float64)
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    expu = np.exp(u[~pos])
    out[~pos] = expu / (1.0 + expu)
    return out


def _preprocess(X: np.ndarray, l2_normalize: bool, mean: np.ndarray | None) -> np.ndarray:
    """Apply L2 normalization and mean subtraction to rows of X."""
    X = np.asarray(X, dtype=np.float64)
    if l2_normalize:
        norms = np.linalg.norm(X, axis=-1, keepdims=True)
        if np.any(norms == 0):
            raise ValueError("cannot L2-normalize a zero vector")
        X = X / norms
    if mean is not None:
        X = X - mean
    return X


def fit(
    X_train: np.ndarray,
    k: int,
    seed: int,
    *,
    l2_normalize: bool = True,
    mean_center: bool = True,
) -> HashModel:
    """Fit normalization, PCA basis and random orthogonal rotation.

    V holds the top-k right singular vectors of the preprocessed training
    matrix; R is the Q factor (Haar sign convention) of a seeded Gaussian
    k x k matrix.
    """
    X = np.asarray(X_train, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("training data must be a 2-D matrix")
    n, d = X.shape
    if n < 2:
        raise ValueError("need at least 2 training rows")
    if not 1 <= k <= min(n, d):
        raise ValueError(f"k={k} out of range [1, {min(n, d)}]")
    if not np.all(np.isfinite(X)):
        raise ValueError("training embeddings contain non-finite values")

    Xn = _preprocess(X, l2_normalize, None)
    mean = Xn.mean(axis=0) if mean_center else np.zeros(d)
    Xc = Xn - mean if mean_center else Xn

    V = truncated_svd(Xc, k).V
    R = qr_orthogonal(gaussian_matrix(k, seed))
    return HashModel(
        d=d, k=k, mean=mean, V=V, R=R, seed=int(seed),
        l2_normalize=l2_normalize, mean_center=mean_center,
    )


def reduce_batch(model: HashModel, X: np.ndarray) -> np.ndarray:
    """PCA-reduced vectors z = V^T pre(x), one row per input row.

    This is the float representation the cosine baseline ranks in.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.d:
        raise ValueError(f"expected dimension {model.d}, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise ValueError("embeddings contain non-finite values")
    Xc = _preprocess(X, model.l2_normalize, model.mean if model.mean_center else None)
    return Xc @ model.V


def project_batch(model: HashModel, X: np.ndarray) -> np.ndarray:
    """Bit probabilities sigma(R V^T pre(x)) for each row of X."""
    Z = reduce_batch(model, X)
    return sigmoid(Z @ model.R.T)


def project(model: HashModel, x: np.ndarray) -> np.ndarray:
    """Bit probabilities for a single d-vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("expected a single vector; use project_batch for matrices")
    return project_batch(model, x[np.newaxis, :])[0]


def binarize(p: np.ndarray) -> np.ndarray:
    """Threshold probabilities at 0.5 (strict: p = 0.5 maps to bit 0)."""
    p = np.asarray(p, dtype=np.float64)
    if np.any((p < 0) | (p > 1)) or not np.all(np.isfinite(p)):
        raise ValueError("probabilities must lie in [0, 1]")
    return p > 0.5


def encode_batch(model: HashModel, X: np.ndarray) -> CodeDatabase:
    """Binary codes for every row of X, order preserved."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    if X.shape[0] == 0:
        return CodeDatabase.from_bits(np.zeros((0, model.k), dtype=bool))
    return CodeDatabase.from_bits(binarize(project_batch(model, X)))


def explained_variance_ratio(model: HashModel, X_train: np.ndarray) -> float:
    """Fraction of total (preprocessed, centered) variance captured by V."""
    Xc = _preprocess(
        np.asarray(X_train, dtype=np.float64),
        model.l2_normalize,
        model.mean if model.mean_center else None,
    )
    total = float(np.sum(Xc * Xc))
    if total == 0.0:
        return 1.0
    Z = Xc @ model.V
    return float(np.sum(Z * Z)) / total
