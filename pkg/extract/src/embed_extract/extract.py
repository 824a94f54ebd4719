"""Run an encoder over a manifest and emit HBEM/HBLB files plus a text
sidecar recording model id, pooling choice and a payload checksum.
"""

from __future__ import annotations

import hashlib
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from .encoders import Encoder, get_encoder
from .formats import write_embeddings, write_labels
from .manifest import ManifestRow, parse_manifest

log = logging.getLogger(__name__)


class ExtractError(RuntimeError):
    pass


@dataclass
class ExtractJob:
    model_id: str
    manifest_path: str
    n_classes: int
    out_embeddings: str
    out_labels: str
    batch_size: int = 16
    device: str = "cpu"
    skip_unreadable: bool = False
    sidecar_path: str | None = None

    def resolved_sidecar(self) -> str:
        return self.sidecar_path or self.out_embeddings + ".meta.txt"


def _filter_readable(rows: list[ManifestRow], skip: bool) -> list[ManifestRow]:
    kept = []
    for i, row in enumerate(rows):
        if os.path.isfile(row.path) and os.access(row.path, os.R_OK):
            kept.append(row)
        elif skip:
            log.warning("skipping unreadable manifest row %d: %s", i, row.path)
        else:
            raise ExtractError(f"manifest row {i}: unreadable file {row.path}")
    if not kept:
        raise ExtractError("no readable files in manifest")
    return kept


def extract(job: ExtractJob, encoder: Encoder | None = None) -> tuple[str, str]:
    """Embed every manifest row (order preserved) and write outputs.

    An Encoder instance may be injected, otherwise the registry entry for
    job.model_id is used. Returns the (hbem, hblb) paths.
    """
    rows = parse_manifest(job.manifest_path, job.n_classes)
    rows = _filter_readable(rows, job.skip_unreadable)
    if encoder is None:
        encoder = get_encoder(job.model_id, job.device, job.batch_size)

    X = np.asarray(encoder.embed_files([r.path for r in rows]), dtype=np.float32)
    if X.ndim != 2 or X.shape[0] != len(rows):
        raise ExtractError(
            f"encoder returned shape {X.shape} for {len(rows)} inputs"
        )

    write_embeddings(X, job.out_embeddings)
    write_labels([set(r.labels) for r in rows], job.n_classes, job.out_labels)

    digest = hashlib.sha256(X.tobytes()).hexdigest()
    sidecar = job.resolved_sidecar()
    with open(sidecar, "w", encoding="utf-8") as fh:
        fh.write(f"model_id: {encoder.model_id}\n")
        fh.write(f"pooling: {encoder.pooling}\n")
        fh.write(f"items: {X.shape[0]}\n")
        fh.write(f"dim: {X.shape[1]}\n")
        fh.write(f"embedding_sha256: {digest}\n")
    return job.out_embeddings, job.out_labels


def convert_array_dump(path: str, out_path: str, npz_key: str | None = None) -> str:
    """Convert an (n, d) array dump (.npy, .npz or .csv) into HBEM.

    Values are stored as binary32; float32 sources round-trip bitwise.
    """
    ext = os.path.splitext(path)[1].lower()
    if ext == ".npy":
        arr = np.load(path)
    elif ext == ".npz":
        data = np.load(path)
        key = npz_key or (data.files[0] if len(data.files) == 1 else None)
        if key is None:
            raise ExtractError(
                f"{path}: multiple arrays {data.files}, pick one with npz_key"
            )
        arr = data[key]
    elif ext == ".csv":
        arr = np.loadtxt(path, delimiter=",", ndmin=2)
    else:
        raise ExtractError(f"{path}: unsupported dump format {ext!r}")

    if arr.ndim != 2:
        raise ExtractError(f"{path}: expected a 2-D array, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.floating) and not np.issubdtype(
        arr.dtype, np.integer
    ):
        raise ExtractError(f"{path}: unsupported dtype {arr.dtype}")
    write_embeddings(arr.astype(np.float32), out_path)
    return out_path
