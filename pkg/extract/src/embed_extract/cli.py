"""Command-line front end for embedding extraction and dump conversion."""

from __future__ import annotations

import argparse
import logging
import sys

from .extract import ExtractError, ExtractJob, convert_array_dump, extract
from .manifest import ManifestError


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="embed-extract",
        description="Run pre-trained encoders over media manifests and emit "
                    "HBEM/HBLB files.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("extract", help="embed a manifest of media files")
    e.add_argument("manifest", help="TSV manifest: path<TAB>label_ids")
    e.add_argument("--model", required=True,
                   help="encoder id (dfn, dinov2, simdinov2, clap, dasheng, ced)")
    e.add_argument("--classes", type=int, required=True)
    e.add_argument("--out-embeddings", required=True)
    e.add_argument("--out-labels", required=True)
    e.add_argument("--batch-size", type=int, default=16)
    e.add_argument("--device", default="cpu")
    e.add_argument("--skip-unreadable", action="store_true",
                   help="log and drop unreadable files instead of failing")
    e.set_defaults(func=cmd_extract)

    c = sub.add_parser("convert", help="convert an array dump to HBEM")
    c.add_argument("dump", help=".npy, .npz or .csv file of shape (n, d)")
    c.add_argument("--out", required=True)
    c.add_argument("--npz-key", default=None)
    c.set_defaults(func=cmd_convert)
    return p


def cmd_extract(args) -> int:
    job = ExtractJob(
        model_id=args.model, manifest_path=args.manifest,
        n_classes=args.classes, out_embeddings=args.out_embeddings,
        out_labels=args.out_labels, batch_size=args.batch_size,
        device=args.device, skip_unreadable=args.skip_unreadable,
    )
    hbem, hblb = extract(job)
    print(f"wrote {hbem} and {hblb}")
    return 0


def cmd_convert(args) -> int:
    out = convert_array_dump(args.dump, args.out, args.npz_key)
    print(f"wrote {out}")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ExtractError, ManifestError, ValueError, OSError) as exc:
        print(f"embed-extract: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
