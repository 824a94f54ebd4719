"""Retrieval metrics: average precision, mAP@k, precision@k, and
multi-seed aggregation.

Relevance is label-set intersection, which covers single-label data as a
special case. Two AP denominator conventions are supported:

* "retrieved" (default): divide by the number of relevant items inside
  the cutoff; queries with no relevant item in the cutoff score 0.
* "min": divide by min(total relevant in database, cutoff).
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .index import BinaryCode, CodeDatabase, search_asymmetric, search_symmetric

__all__ = [
    "LabelSet",
    "MetricReport",
    "relevant",
    "average_precision",
    "precision_at_k",
    "mean_ap",
    "multi_seed",
]

AP_DENOMINATORS = ("retrieved", "min")
MODES = ("asym", "sym", "float")


class LabelSet:
    """Per-item class memberships as an (n, c) multi-hot boolean matrix."""

    def __init__(self, multihot: np.ndarray):
        m = np.asarray(multihot, dtype=bool)
        if m.ndim != 2:
            raise ValueError("expected an (n, c) multi-hot matrix")
        if m.shape[0] and not np.all(m.any(axis=1)):
            raise ValueError("every item needs at least one label")
        self.multihot = m

    @classmethod
    def from_ids(cls, ids: Sequence[int], n_classes: int) -> "LabelSet":
        ids = np.asarray(ids, dtype=np.int64)
        if ids.size and (ids.min() < 0 or ids.max() >= n_classes):
            raise ValueError("class id out of range")
        m = np.zeros((ids.size, n_classes), dtype=bool)
        m[np.arange(ids.size), ids] = True
        return cls(m)

    @classmethod
    def from_sets(cls, sets: Iterable[Iterable[int]], n_classes: int) -> "LabelSet":
        rows = [sorted(set(int(i) for i in s)) for s in sets]
        m = np.zeros((len(rows), n_classes), dtype=bool)
        for r, ids in enumerate(rows):
            if not ids:
                raise ValueError("every item needs at least one label")
            if ids[0] < 0 or ids[-1] >= n_classes:
                raise ValueError("class id out of range")
            m[r, ids] = True
        return cls(m)

    @property
    def n(self) -> int:
        return self.multihot.shape[0]

    @property
    def c(self) -> int:
        return self.multihot.shape[1]

    def row(self, i: int) -> np.ndarray:
        return self.multihot[i]

    def __len__(self) -> int:
        return self.n


def relevant(q_row: np.ndarray, d_row: np.ndarray) -> bool:
    """True iff the two label sets share at least one class."""
    return bool(np.any(np.asarray(q_row, bool) & np.asarray(d_row, bool)))


def average_precision(
    rel: Sequence[bool], denominator: int | None = None
) -> float:
    """AP of a ranked relevance list.

    denominator overrides the default (count of relevant items in the
    list); used for the min(R, k) convention. Returns 0 when nothing
    relevant appears.
    """
    rel = np.asarray(rel, dtype=bool)
    if rel.size == 0:
        raise ValueError("relevance list must be non-empty")
    positions = np.flatnonzero(rel)
    prec_at_hits = np.arange(1, positions.size + 1) / (positions + 1.0)
    denom = positions.size if denominator is None else int(denominator)
    if denom <= 0:
        return 0.0
    # sequential accumulation in rank order, for bit-exact agreement with
    # the textbook loop definition
    total = 0.0
    for value in prec_at_hits:
        total += value
    return float(total / denom)


def precision_at_k(rel: Sequence[bool], k: int) -> float:
    """Fraction of relevant items among the top k (debugging aid)."""
    rel = np.asarray(rel, dtype=bool)
    if k < 1:
        raise ValueError("k must be >= 1")
    top = rel[:k]
    return float(top.sum() / top.size) if top.size else 0.0


@dataclass
class MetricReport:
    """mAP over a query set, with optional multi-seed aggregation."""

    map: float
    per_query_ap: np.ndarray
    k_eval: int
    seeds: list = field(default_factory=list)
    mean: float = 0.0
    std: float = 0.0

    def __post_init__(self):
        if not self.seeds:
            self.mean = self.map
            self.std = 0.0


def _rankings_float_cosine(z_db: np.ndarray, z_q: np.ndarray, k_eval: int):
    db_norm = np.linalg.norm(z_db, axis=1)
    q_norm = np.linalg.norm(z_q, axis=1)
    db_norm[db_norm == 0] = 1.0
    q_norm[q_norm == 0] = 1.0
    sims = (z_q / q_norm[:, None]) @ (z_db / db_norm[:, None]).T
    n = z_db.shape[0]
    ids_col = np.arange(n)
    for row in sims:
        yield np.lexsort((ids_col, -row))[:k_eval]


def mean_ap(
    db,
    queries,
    q_labels: LabelSet,
    db_labels: LabelSet,
    k_eval: int,
    mode: str = "asym",
    ap_denominator: str = "retrieved",
) -> MetricReport:
    """mAP@k_eval over all queries.

    mode "asym": db is a CodeDatabase, queries an (n_q, k) matrix of bit
    probabilities. mode "sym": same inputs, queries binarized at 0.5
    before searching. mode "float": db and queries are real matrices
    ranked by cosine similarity.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if ap_denominator not in AP_DENOMINATORS:
        raise ValueError(f"unknown AP denominator {ap_denominator!r}")
    if k_eval < 1:
        raise ValueError("k_eval must be >= 1")

    if mode == "float":
        db_arr = np.asarray(db, dtype=np.float64)
        q_arr = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        n = db_arr.shape[0]
    else:
        if not isinstance(db, CodeDatabase):
            raise ValueError("binary modes need a CodeDatabase")
        q_arr = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        if q_arr.shape[1] != db.k:
            raise ValueError("query width does not match code length")
        n = db.n

    n_q = q_arr.shape[0]
    if q_labels.n != n_q:
        raise ValueError("query label count mismatch")
    if db_labels.n != n:
        raise ValueError("database label count mismatch")
    cutoff = min(k_eval, n)

    if mode == "float":
        rankings = _rankings_float_cosine(db_arr, q_arr, cutoff)
    elif mode == "asym":
        rankings = (
            search_asymmetric(db, q_arr[i], cutoff).ids for i in range(n_q)
        )
    else:
        rankings = (
            search_symmetric(db, BinaryCode.from_bits(q_arr[i] > 0.5), cutoff).ids
            for i in range(n_q)
        )

    # n_rel per query against the whole database, for the "min" convention.
    qm = q_labels.multihot
    dm = db_labels.multihot
    aps = np.empty(n_q)
    for i, ranked in enumerate(rankings):
        rel = (dm[ranked] & qm[i]).any(axis=1)
        if ap_denominator == "min":
            total_rel = int((dm & qm[i]).any(axis=1).sum())
            denom = min(total_rel, cutoff)
        else:
            denom = None
        aps[i] = average_precision(rel, denominator=denom) if rel.size else 0.0
    total = 0.0
    for value in aps:
        total += value
    return MetricReport(map=float(total / n_q), per_query_ap=aps, k_eval=cutoff)


def multi_seed(run: Callable[[int], float], seeds: Sequence[int]) -> tuple[float, float]:
    """Mean and population std of a per-seed mAP procedure.

    Uses exact rational arithmetic for the aggregation so a constant
    sequence reports std exactly 0.
    """
    if len(seeds) < 1:
        raise ValueError("need at least one seed")
    values = [float(run(int(s))) for s in seeds]
    return float(statistics.mean(values)), float(statistics.pstdev(values))
