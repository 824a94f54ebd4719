"""Bit-exact binary file formats for embeddings (HBEM), labels (HBLB),
models (HBMD) and packed codes (HBCD).

All integers are little-endian; all reals are IEEE-754 binary32
little-endian. Every format starts with a 24-byte header whose reserved
bytes must be zero. Readers validate the header before touching the
payload and never crash on corrupt input; writers are atomic
(temp file + rename in the destination directory).
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

from .hasher import HashModel
from .index import CodeDatabase
from .metrics import LabelSet

__all__ = [
    "FormatError",
    "read_hbem", "write_hbem",
    "read_hblb", "write_hblb",
    "read_hbmd", "write_hbmd",
    "read_hbcd", "write_hbcd",
]

VERSION = 1

_HBEM = struct.Struct("<4sIQIB3s")   # magic, version, n, d, dtype, reserved
_HBLB = struct.Struct("<4sIQIB3s")   # magic, version, n, c, encoding, reserved
_HBMD = struct.Struct("<4sIIIB7s")   # magic, version, d, k, flags, reserved
_HBCD = struct.Struct("<4sIQI4s")    # magic, version, n, k, reserved

_FLAG_L2 = 0x01
_FLAG_CENTER = 0x02


class FormatError(ValueError):
    """Structured error for any malformed or inconsistent file."""


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


def _read_file(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc


def _parse_header(blob: bytes, fmt: struct.Struct, magic: bytes, path: str):
    if len(blob) < fmt.size:
        raise FormatError(f"{path}: file shorter than {fmt.size}-byte header")
    fields = fmt.unpack_from(blob, 0)
    if fields[0] != magic:
        raise FormatError(f"{path}: bad magic {fields[0]!r}, expected {magic!r}")
    if fields[1] != VERSION:
        raise FormatError(f"{path}: unsupported version {fields[1]}")
    if fields[-1] != b"\x00" * len(fields[-1]):
        raise FormatError(f"{path}: reserved header bytes must be zero")
    return fields


def _expect_payload(blob: bytes, header_size: int, expected: int, path: str) -> bytes:
    actual = len(blob) - header_size
    if actual != expected:
        raise FormatError(
            f"{path}: payload size mismatch, expected {expected} bytes, got {actual}"
        )
    return blob[header_size:]


# ---------------------------------------------------------------- HBEM

def write_hbem(X: np.ndarray, path: str) -> None:
    """Write an n x d embedding matrix as binary32, row-major."""
    X = np.ascontiguousarray(X, dtype="<f4")
    if X.ndim != 2:
        raise ValueError("expected an (n, d) matrix")
    if not np.all(np.isfinite(X)):
        raise ValueError("embeddings contain non-finite values")
    n, d = X.shape
    if d < 1:
        raise ValueError("d must be >= 1")
    header = _HBEM.pack(b"HBEM", VERSION, n, d, 0, b"\x00" * 3)
    _atomic_write(path, header + X.tobytes())


def read_hbem(path: str) -> np.ndarray:
    """Read an HBEM file into an (n, d) float32 matrix."""
    blob = _read_file(path)
    _, _, n, d, dtype, _ = _parse_header(blob, _HBEM, b"HBEM", path)
    if dtype != 0:
        raise FormatError(f"{path}: unknown dtype code {dtype}")
    if d < 1:
        raise FormatError(f"{path}: d must be >= 1")
    payload = _expect_payload(blob, _HBEM.size, n * d * 4, path)
    X = np.frombuffer(payload, dtype="<f4").reshape(n, d)
    bad = ~np.isfinite(X)
    if bad.any():
        row = int(np.argwhere(bad)[0][0])
        raise FormatError(f"{path}: non-finite value at row {row}")
    return X.copy()


# ---------------------------------------------------------------- HBLB

def write_hblb(labels: LabelSet, path: str, encoding: int = 0) -> None:
    """Write labels; encoding 0 = multi-hot rows, 1 = one class id per item."""
    m = labels.multihot
    n, c = m.shape
    if encoding == 0:
        payload = np.packbits(m, axis=1, bitorder="little").tobytes()
    elif encoding == 1:
        counts = m.sum(axis=1)
        if n and np.any(counts != 1):
            raise ValueError("encoding 1 requires exactly one label per item")
        ids = np.argmax(m, axis=1).astype("<u4")
        payload = ids.tobytes()
    else:
        raise ValueError(f"unknown encoding {encoding}")
    header = _HBLB.pack(b"HBLB", VERSION, n, c, encoding, b"\x00" * 3)
    _atomic_write(path, header + payload)


def read_hblb(path: str) -> LabelSet:
    """Read an HBLB file into a LabelSet."""
    blob = _read_file(path)
    _, _, n, c, encoding, _ = _parse_header(blob, _HBLB, b"HBLB", path)
    if c < 1:
        raise FormatError(f"{path}: class count must be >= 1")
    if encoding == 0:
        row_bytes = (c + 7) // 8
        payload = _expect_payload(blob, _HBLB.size, n * row_bytes, path)
        raw = np.frombuffer(payload, dtype=np.uint8).reshape(n, row_bytes)
        bits = np.unpackbits(raw, axis=1, bitorder="little")
        if n and np.any(bits[:, c:]):
            raise FormatError(f"{path}: label bit set at position >= c={c}")
        m = bits[:, :c].astype(bool)
    elif encoding == 1:
        payload = _expect_payload(blob, _HBLB.size, n * 4, path)
        ids = np.frombuffer(payload, dtype="<u4")
        if n and ids.max(initial=0) >= c:
            raise FormatError(f"{path}: class id >= c={c}")
        m = np.zeros((n, c), dtype=bool)
        m[np.arange(n), ids] = True
    else:
        raise FormatError(f"{path}: unknown encoding {encoding}")
    if n and not np.all(m.any(axis=1)):
        raise FormatError(f"{path}: item with no label")
    return LabelSet(m)


# ---------------------------------------------------------------- HBMD

def write_hbmd(model: HashModel, path: str) -> None:
    """Persist a fitted hash model (binary32 matrices)."""
    flags = (_FLAG_L2 if model.l2_normalize else 0) | (
        _FLAG_CENTER if model.mean_center else 0
    )
    header = _HBMD.pack(b"HBMD", VERSION, model.d, model.k, flags, b"\x00" * 7)
    seed = struct.pack("<Q", model.seed)
    body = (
        np.ascontiguousarray(model.mean, dtype="<f4").tobytes()
        + np.ascontiguousarray(model.V, dtype="<f4").tobytes()
        + np.ascontiguousarray(model.R, dtype="<f4").tobytes()
    )
    _atomic_write(path, header + seed + body)


def read_hbmd(path: str) -> HashModel:
    """Load a hash model, re-validating orthogonality at 32-bit tolerance."""
    blob = _read_file(path)
    _, _, d, k, flags, _ = _parse_header(blob, _HBMD, b"HBMD", path)
    if d < 1 or k < 1:
        raise FormatError(f"{path}: d and k must be >= 1")
    if k > d:
        raise FormatError(f"{path}: k={k} exceeds d={d}")
    if flags & ~(_FLAG_L2 | _FLAG_CENTER):
        raise FormatError(f"{path}: unknown flag bits 0x{flags:02x}")
    expected = 8 + 4 * (d + d * k + k * k)
    payload = _expect_payload(blob, _HBMD.size, expected, path)
    (seed,) = struct.unpack_from("<Q", payload, 0)
    reals = np.frombuffer(payload, dtype="<f4", offset=8)
    mean = reals[:d].astype(np.float64)
    V = reals[d : d + d * k].astype(np.float64).reshape(d, k)
    R = reals[d + d * k :].astype(np.float64).reshape(k, k)
    if not np.all(np.isfinite(reals)):
        raise FormatError(f"{path}: non-finite model parameter")
    if np.abs(V.T @ V - np.eye(k)).max() > 1e-5:
        raise FormatError(f"{path}: PCA basis V is not orthonormal")
    if np.abs(R.T @ R - np.eye(k)).max() > 1e-5:
        raise FormatError(f"{path}: rotation R is not orthogonal")
    return HashModel(
        d=int(d), k=int(k), mean=mean, V=V, R=R, seed=int(seed),
        l2_normalize=bool(flags & _FLAG_L2),
        mean_center=bool(flags & _FLAG_CENTER),
    )


# ---------------------------------------------------------------- HBCD

def write_hbcd(db: CodeDatabase, path: str) -> None:
    """Persist packed binary codes."""
    header = _HBCD.pack(b"HBCD", VERSION, db.n, db.k, b"\x00" * 4)
    words = np.ascontiguousarray(db.words, dtype="<u8")
    _atomic_write(path, header + words.tobytes())


def read_hbcd(path: str) -> CodeDatabase:
    """Load packed binary codes, rejecting nonzero padding bits."""
    blob = _read_file(path)
    _, _, n, k, _ = _parse_header(blob, _HBCD, b"HBCD", path)
    if k < 1:
        raise FormatError(f"{path}: k must be >= 1")
    words_per = (k + 63) // 64
    payload = _expect_payload(blob, _HBCD.size, n * words_per * 8, path)
    words = np.frombuffer(payload, dtype="<u8").reshape(n, words_per)
    try:
        return CodeDatabase(words.copy(), k)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
