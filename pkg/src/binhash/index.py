"""Packed binary code storage and exhaustive top-k retrieval.

Codes are stored as 64-bit words, least-significant-bit first: bit j of a
code lives at bit (j mod 64) of word (j // 64). Padding bits past k are
always zero. Both symmetric (Hamming) and asymmetric
(probability-to-code) search are exact exhaustive scans with ties broken
by ascending database id.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "BinaryCode",
    "CodeDatabase",
    "RetrievalResult",
    "hamming",
    "asym_score",
    "search_asymmetric",
    "search_symmetric",
    "pack_bits",
    "unpack_bits",
]


def _n_words(k: int) -> int:
    return (k + 63) // 64


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack an (n, k) boolean matrix into (n, ceil(k/64)) uint64 words."""
    bits = np.asarray(bits, dtype=bool)
    if bits.ndim != 2:
        raise ValueError("expected an (n, k) bit matrix")
    n, k = bits.shape
    W = _n_words(k)
    padded = np.zeros((n, W * 64), dtype=np.uint8)
    padded[:, :k] = bits
    packed = np.packbits(padded, axis=1, bitorder="little")
    return packed.view("<u8").reshape(n, W).astype(np.uint64)

def unpack_bits(words: np.ndarray, k: int) -> np.ndarray:
    """Inverse of pack_bits: (n, W) uint64 words -> (n, k) booleans."""
    words = np.ascontiguousarray(words, dtype="<u8")
    n = words.shape[0]
    as_bytes = words.reshape(n, -1).view(np.uint8)
    bits = np.unpackbits(as_bytes, axis=1, bitorder="little")
    return bits[:, :k].astype(bool)


@dataclass(frozen=True)
class BinaryCode:
    """A single packed k-bit code."""

    words: np.ndarray
    k: int

    @classmethod
    def from_bits(cls, bits: np.ndarray) -> "BinaryCode":
        bits = np.asarray(bits, dtype=bool).ravel()
        return cls(words=pack_bits(bits[np.newaxis, :])[0], k=bits.size)

    @property
    def bits(self) -> np.ndarray:
        return unpack_bits(self.words[np.newaxis, :], self.k)[0]


class CodeDatabase:
    """Immutable store of n packed k-bit codes with implicit ids 0..n-1."""

    def __init__(self, words: np.ndarray, k: int):
        words = np.ascontiguousarray(words, dtype=np.uint64)
        if words.ndim != 2:
            raise ValueError("expected an (n, words) array")
        if words.shape[1] != _n_words(k):
            raise ValueError(
                f"expected {_n_words(k)} words per code for k={k}, got {words.shape[1]}"
            )
        pad = _n_words(k) * 64 - k
        if pad and words.shape[0] and np.any(words[:, -1] >> np.uint64(64 - pad)):
            raise ValueError("nonzero padding bits past position k")
        self._words = words
        self._k = int(k)
        self._bits_f64 = None

    @classmethod
    def from_bits(cls, bits: np.ndarray) -> "CodeDatabase":
        bits = np.asarray(bits, dtype=bool)
        return cls(pack_bits(bits), bits.shape[1])

    @property
    def n(self) -> int:
        return self._words.shape[0]

    @property
    def k(self) -> int:
        return self._k

    @property
    def words(self) -> np.ndarray:
        return self._words

    @property
    def bits(self) -> np.ndarray:
        return unpack_bits(self._words, self._k)

    def _bits_float(self) -> np.ndarray:
        # Cached float view used by the asymmetric scan.
        if self._bits_f64 is None:
            self._bits_f64 = self.bits.astype(np.float64)
        return self._bits_f64

    def code(self, i: int) -> BinaryCode:
        return BinaryCode(words=self._words[i].copy(), k=self._k)

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class RetrievalResult:
    """Ranked database ids with non-increasing scores."""

    ids: np.ndarray
    scores: np.ndarray

    def __len__(self) -> int:
        return self.ids.size


def hamming(a: BinaryCode, b: BinaryCode) -> int:
    """Number of differing bits, via word XOR + popcount."""
    if a.k != b.k:
        raise ValueError(f"code length mismatch: {a.k} vs {b.k}")
    return int(np.bitwise_count(a.words ^ b.words).sum())


def _check_probs(p: np.ndarray, k: int) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64).ravel()
    if p.size != k:
        raise ValueError(f"probability vector length {p.size} != code length {k}")
    if np.any((p < 0) | (p > 1)) or not np.all(np.isfinite(p)):
        raise ValueError("probabilities must lie in [0, 1]")
    return p


def asym_score(p_q: np.ndarray, b: BinaryCode) -> float:
    """Asymmetric similarity -sum_j |b_j - p_j|; 0 is a perfect match."""
    p = _check_probs(p_q, b.k)
    return float(-np.abs(b.bits.astype(np.float64) - p).sum())


def _rank(scores: np.ndarray, topk: int) -> tuple[np.ndarray, np.ndarray]:
    # Stable sort on descending score; equal scores keep ascending id.
    n = scores.size
    order = np.lexsort((np.arange(n), -scores))[: min(topk, n)]
    return order, scores[order]


def search_asymmetric(db: CodeDatabase, p_q: np.ndarray, topk: int) -> RetrievalResult:
    """Exact top-k ids by asymmetric score, ties by ascending id."""
    if topk < 1:
        raise ValueError("topk must be >= 1")
    p = _check_probs(p_q, db.k)
    if db.n == 0:
        return RetrievalResult(ids=np.empty(0, dtype=np.int64), scores=np.empty(0))
    scores = -np.abs(db._bits_float() - p).sum(axis=1)
    ids, sc = _rank(scores, topk)
    return RetrievalResult(ids=ids, scores=sc)


def search_symmetric(db: CodeDatabase, q: BinaryCode, topk: int) -> RetrievalResult:
    """Exact top-k ids by negative Hamming distance, ties by ascending id."""
    if topk < 1:
        raise ValueError("topk must be >= 1")
    if q.k != db.k:
        raise ValueError(f"code length mismatch: {q.k} vs {db.k}")
    if db.n == 0:
        return RetrievalResult(ids=np.empty(0, dtype=np.int64), scores=np.empty(0))
    dist = np.bitwise_count(db.words ^ q.words[np.newaxis, :]).sum(axis=1)
    ids, sc = _rank(-dist.astype(np.float64), topk)
    return RetrievalResult(ids=ids, scores=sc)
