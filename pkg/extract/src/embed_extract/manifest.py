"""Tab-separated extraction manifests.

One media file per line: `path<TAB>label_ids` where label_ids is a
comma-separated list of integer class ids (one or more). Lines starting
with '#' and blank lines are ignored.
"""

from __future__ import annotations

import os
from dataclasses import dataclass


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class ManifestRow:
    path: str
    labels: frozenset[int]


def parse_manifest(path: str, n_classes: int) -> list[ManifestRow]:
    """Read and validate a manifest; label ids must be < n_classes."""
    rows: list[ManifestRow] = []
    base = os.path.dirname(os.path.abspath(path))
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ManifestError(
                    f"{path}:{lineno}: expected 'path<TAB>labels', got {line!r}"
                )
            media, label_text = parts
            try:
                labels = frozenset(int(t) for t in label_text.split(",") if t.strip())
            except ValueError:
                raise ManifestError(f"{path}:{lineno}: bad label list {label_text!r}")
            if not labels:
                raise ManifestError(f"{path}:{lineno}: no labels")
            bad = [c for c in labels if not 0 <= c < n_classes]
            if bad:
                raise ManifestError(
                    f"{path}:{lineno}: class id {bad[0]} outside [0, {n_classes})"
                )
            if not os.path.isabs(media):
                media = os.path.join(base, media)
            rows.append(ManifestRow(path=media, labels=labels))
    if not rows:
        raise ManifestError(f"{path}: manifest is empty")
    return rows
