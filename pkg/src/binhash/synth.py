"""Deterministic synthetic embedding generators.

Clustered, anisotropic data that mimics the redundancy of strong encoder
embeddings: class centroids on a sphere, noise confined to a random
low-dimensional subspace with a geometrically decaying variance spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metrics import LabelSet

__all__ = ["ClusterSpec", "generate", "split", "split_indices", "random_multilabels"]

# Residue noise keeps items off the exact subspace without perturbing the
# zero-spread limit; it scales with intra_spread.
_RESIDUE_FACTOR = 1e-3


@dataclass(frozen=True)
class ClusterSpec:
    n_classes: int
    per_class: int
    d: int
    intra_spread: float
    inter_scale: float
    intrinsic_dim: int
    seed: int

    def __post_init__(self):
        if min(self.n_classes, self.per_class, self.d, self.intrinsic_dim) < 1:
            raise ValueError("all counts must be >= 1")
        if self.intrinsic_dim > self.d:
            raise ValueError("intrinsic_dim must not exceed d")
        if self.intra_spread < 0 or self.inter_scale <= 0:
            raise ValueError("spreads must be positive")

    @property
    def n(self) -> int:
        return self.n_classes * self.per_class


def generate(spec: ClusterSpec) -> tuple[np.ndarray, LabelSet]:
    """Clustered embeddings plus single-class labels, deterministic per seed.

    Noise variance inside the intrinsic subspace decays geometrically by a
    factor 0.5 per dimension.
    """
    rng = np.random.default_rng(np.uint64(spec.seed))
    centroids = rng.standard_normal((spec.n_classes, spec.d))
    centroids /= np.linalg.norm(centroids, axis=1, keepdims=True)
    centroids *= spec.inter_scale

    basis, _ = np.linalg.qr(rng.standard_normal((spec.d, spec.intrinsic_dim)))
    stds = spec.intra_spread * 0.5 ** (np.arange(spec.intrinsic_dim) / 2.0)

    n = spec.n
    coeffs = rng.standard_normal((n, spec.intrinsic_dim)) * stds
    residue = rng.standard_normal((n, spec.d)) * (_RESIDUE_FACTOR * spec.intra_spread)
    X = np.repeat(centroids, spec.per_class, axis=0) + coeffs @ basis.T + residue

    ids = np.repeat(np.arange(spec.n_classes), spec.per_class)
    return X, LabelSet.from_ids(ids, spec.n_classes)


def random_multilabels(n: int, n_classes: int, seed: int, max_labels: int = 3) -> LabelSet:
    """1..max_labels labels per item, uniform; exercises multi-label relevance."""
    rng = np.random.default_rng(np.uint64(seed))
    m = np.zeros((n, n_classes), dtype=bool)
    for i in range(n):
        count = rng.integers(1, min(max_labels, n_classes) + 1)
        m[i, rng.choice(n_classes, size=count, replace=False)] = True
    return LabelSet(m)


def split_indices(
    labels: LabelSet, query_fraction: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Stratified (database, query) index partition, deterministic per seed.

    Multi-label items are stratified by their lowest class id.
    """
    if not 0 < query_fraction < 1:
        raise ValueError("query_fraction must lie in (0, 1)")
    primary = np.argmax(labels.multihot, axis=1)
    rng = np.random.default_rng(np.uint64(seed))
    db_parts, q_parts = [], []
    for cls in np.unique(primary):
        members = np.flatnonzero(primary == cls)
        if members.size < 2:
            raise ValueError(f"class {cls} has fewer than 2 items")
        n_q = int(round(members.size * query_fraction))
        n_q = min(max(n_q, 1), members.size - 1)
        perm = rng.permutation(members)
        q_parts.append(np.sort(perm[:n_q]))
        db_parts.append(np.sort(perm[n_q:]))
    return np.sort(np.concatenate(db_parts)), np.sort(np.concatenate(q_parts))


def split(
    X: np.ndarray, labels: LabelSet, query_fraction: float, seed: int
) -> tuple[tuple[np.ndarray, LabelSet], tuple[np.ndarray, LabelSet]]:
    """Split into ((X_db, labels_db), (X_q, labels_q))."""
    X = np.asarray(X)
    if X.shape[0] != labels.n:
        raise ValueError("row count mismatch between X and labels")
    db_idx, q_idx = split_indices(labels, query_fraction, seed)
    return (
        (X[db_idx], LabelSet(labels.multihot[db_idx])),
        (X[q_idx], LabelSet(labels.multihot[q_idx])),
    )
