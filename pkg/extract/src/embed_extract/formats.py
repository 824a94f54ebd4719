"""Writers for the HBEM (embeddings) and HBLB (labels) binary formats.

Kept independent of the retrieval library on purpose: the two packages
talk only through the on-disk formats. Little-endian throughout, reals
as IEEE-754 binary32.
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

VERSION = 1

_HBEM = struct.Struct("<4sIQIB3s")
_HBLB = struct.Struct("<4sIQIB3s")


def _atomic_write(path: str, payload: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_embeddings(X: np.ndarray, path: str) -> None:
    """Write an n x d float matrix as an HBEM file."""
    X = np.ascontiguousarray(X, dtype="<f4")
    if X.ndim != 2 or X.shape[1] < 1:
        raise ValueError("expected an (n, d) matrix with d >= 1")
    if not np.all(np.isfinite(X)):
        raise ValueError("embeddings contain non-finite values")
    header = _HBEM.pack(b"HBEM", VERSION, X.shape[0], X.shape[1], 0, b"\x00" * 3)
    _atomic_write(path, header + X.tobytes())


def write_labels(label_sets: list[set[int]], n_classes: int, path: str) -> None:
    """Write per-item label sets as a multi-hot HBLB file."""
    n = len(label_sets)
    multihot = np.zeros((n, n_classes), dtype=np.uint8)
    for row, ids in enumerate(label_sets):
        if not ids:
            raise ValueError(f"item {row} has no label")
        for cid in ids:
            if not 0 <= cid < n_classes:
                raise ValueError(f"item {row}: class id {cid} out of range")
            multihot[row, cid] = 1
    payload = np.packbits(multihot, axis=1, bitorder="little").tobytes()
    header = _HBLB.pack(b"HBLB", VERSION, n, n_classes, 0, b"\x00" * 3)
    _atomic_write(path, header + payload)
