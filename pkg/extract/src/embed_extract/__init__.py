"""embed-extract: turn media folders + manifests into HBEM/HBLB files
for the binary hashing pipeline."""

from .extract import ExtractJob, convert_array_dump, extract
from .manifest import ManifestRow, parse_manifest

__all__ = ["ExtractJob", "extract", "convert_array_dump", "ManifestRow",
           "parse_manifest"]

__version__ = "0.1.0"
