"""Command-line front end: synth, fit, encode, query, eval, ablate.

Outputs are atomic (temp file + rename). Every failure path prints a
single diagnostic line to stderr and exits nonzero. Reports are emitted
as a human-readable table on stdout and, with --report, as a
machine-readable line-oriented document with fields
metric, mode, bits, seed, value, dataset (stable order).
"""

from __future__ import annotations

import os

# Thread count must be pinned before numpy initializes its BLAS pools.
if "BINHASH_THREADS" in os.environ:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, os.environ["BINHASH_THREADS"])

import argparse
import statistics
import sys

import numpy as np

from . import fileio, hasher, metrics, synth
from .fileio import FormatError
from .index import BinaryCode, search_asymmetric, search_symmetric
from .linalg import gaussian_matrix, qr_orthogonal

MAX_BITS = 4096


class CliError(Exception):
    pass


def _parse_seeds(text: str) -> list[int]:
    try:
        seeds = [int(s) for s in text.split(",") if s.strip() != ""]
    except ValueError:
        raise CliError(f"bad seed list {text!r}")
    if not seeds:
        raise CliError("empty seed list")
    return seeds


def _parse_bits(text: str) -> list[int]:
    bits = [int(s) for s in text.split(",") if s.strip() != ""]
    if not bits:
        raise CliError("empty bits list")
    return bits


def _check_bits(k: int) -> int:
    if not 1 <= k <= MAX_BITS:
        raise CliError(f"bits must lie in [1, {MAX_BITS}], got {k}")
    return k


def _report_lines(records, path: str | None) -> None:
    if path is None:
        return
    lines = [
        "metric={metric} mode={mode} bits={bits} seed={seed} "
        "value={value:.17g} dataset={dataset}\n".format(**r)
        for r in records
    ]
    fileio._atomic_write(path, "".join(lines).encode())


def _load_model_flags(args) -> dict:
    return {"l2_normalize": not args.no_l2, "mean_center": not args.no_center}


# ---------------------------------------------------------------- synth

def cmd_synth(args) -> int:
    spec = synth.ClusterSpec(
        n_classes=args.classes, per_class=args.per_class, d=args.dim,
        intra_spread=args.intra_spread, inter_scale=args.inter_scale,
        intrinsic_dim=args.intrinsic_dim, seed=args.seed,
    )
    X, labels = synth.generate(spec)
    if args.multilabel:
        labels = synth.random_multilabels(spec.n, spec.n_classes, args.seed)
    if args.query_fraction is not None:
        (Xd, Ld), (Xq, Lq) = synth.split(X, labels, args.query_fraction, args.seed)
        fileio.write_hbem(Xd, f"{args.out}.db.hbem")
        fileio.write_hblb(Ld, f"{args.out}.db.hblb")
        fileio.write_hbem(Xq, f"{args.out}.query.hbem")
        fileio.write_hblb(Lq, f"{args.out}.query.hblb")
        print(f"wrote {Xd.shape[0]} database + {Xq.shape[0]} query items (d={spec.d})")
    else:
        fileio.write_hbem(X, f"{args.out}.hbem")
        fileio.write_hblb(labels, f"{args.out}.hblb")
        print(f"wrote {X.shape[0]} items (d={spec.d}, classes={spec.n_classes})")
    return 0


# ---------------------------------------------------------------- fit

def cmd_fit(args) -> int:
    _check_bits(args.bits)
    X = fileio.read_hbem(args.train)
    model = hasher.fit(X, args.bits, args.seed, **_load_model_flags(args))
    ratio = hasher.explained_variance_ratio(model, X)
    fileio.write_hbmd(model, args.out)
    print(
        f"fitted k={args.bits} on {X.shape[0]}x{X.shape[1]} "
        f"(explained variance {ratio:.4f}) -> {args.out}"
    )
    return 0


# ---------------------------------------------------------------- encode

def cmd_encode(args) -> int:
    model = fileio.read_hbmd(args.model)
    X = fileio.read_hbem(args.data)
    if X.shape[1] != model.d:
        raise CliError(f"data dimension {X.shape[1]} != model dimension {model.d}")
    codes = hasher.encode_batch(model, X)
    fileio.write_hbcd(codes, args.out)
    print(f"encoded {codes.n} items at {codes.k} bits -> {args.out}")
    return 0


# ---------------------------------------------------------------- query

def cmd_query(args) -> int:
    model = fileio.read_hbmd(args.model)
    db = fileio.read_hbcd(args.codes)
    if db.k != model.k:
        raise CliError(f"code length {db.k} != model bits {model.k}")
    Q = fileio.read_hbem(args.queries)
    probs = hasher.project_batch(model, Q)
    for qi in range(Q.shape[0]):
        if args.mode == "asym":
            res = search_asymmetric(db, probs[qi], args.topk)
        else:
            code = BinaryCode.from_bits(hasher.binarize(probs[qi]))
            res = search_symmetric(db, code, args.topk)
        ranked = " ".join(
            f"{int(i)}:{s:.4f}" for i, s in zip(res.ids, res.scores)
        )
        print(f"query {qi}: {ranked}")
    return 0


# ---------------------------------------------------------------- eval

def _sniff_db(path: str):
    """Return ('hbem', X) or ('hbcd', codes) based on the file magic."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == b"HBEM":
        return "hbem", fileio.read_hbem(path)
    if magic == b"HBCD":
        return "hbcd", fileio.read_hbcd(path)
    raise CliError(f"{path}: expected an HBEM or HBCD file")


def _eval_once(model, db_X, db_labels, Q, q_labels, k_eval, mode, ap_denominator):
    if mode == "float":
        z_db = hasher.reduce_batch(model, db_X)
        z_q = hasher.reduce_batch(model, Q)
        return metrics.mean_ap(
            z_db, z_q, q_labels, db_labels, k_eval, "float", ap_denominator
        )
    codes = hasher.encode_batch(model, db_X)
    probs = hasher.project_batch(model, Q)
    return metrics.mean_ap(
        codes, probs, q_labels, db_labels, k_eval, mode, ap_denominator
    )


def _reseeded(model: hasher.HashModel, seed: int, refit: str, db_X) -> hasher.HashModel:
    if refit == "full":
        return hasher.fit(
            db_X, model.k, seed,
            l2_normalize=model.l2_normalize, mean_center=model.mean_center,
        )
    R = qr_orthogonal(gaussian_matrix(model.k, seed))
    return hasher.HashModel(
        d=model.d, k=model.k, mean=model.mean, V=model.V, R=R, seed=seed,
        l2_normalize=model.l2_normalize, mean_center=model.mean_center,
    )


def cmd_eval(args) -> int:
    model = fileio.read_hbmd(args.model)
    kind, db = _sniff_db(args.db)
    db_labels = fileio.read_hblb(args.db_labels)
    Q = fileio.read_hbem(args.queries)
    q_labels = fileio.read_hblb(args.query_labels)
    seeds = _parse_seeds(args.seeds) if args.seeds else [model.seed]

    n = db.shape[0] if kind == "hbem" else db.n
    if db_labels.n != n:
        raise CliError(f"database has {n} items but {db_labels.n} label rows")
    if q_labels.n != Q.shape[0]:
        raise CliError(f"{Q.shape[0]} queries but {q_labels.n} label rows")
    k_eval = args.k_eval
    if k_eval > n:
        print(f"warning: k-eval {k_eval} exceeds database size, clamping to {n}",
              file=sys.stderr)
        k_eval = n

    dataset = os.path.basename(args.db)
    records = []
    if args.mode == "float":
        if kind != "hbem":
            raise CliError("float mode needs database embeddings, not codes")
        report = _eval_once(model, db, db_labels, Q, q_labels, k_eval,
                            "float", args.ap_denominator)
        values = [report.map]
        seeds_used = ["-"]
        mean, std = report.map, 0.0
    elif kind == "hbcd":
        if args.seeds:
            raise CliError("multi-seed evaluation needs database embeddings")
        probs = hasher.project_batch(model, Q)
        report = metrics.mean_ap(db, probs, q_labels, db_labels, k_eval,
                                 args.mode, args.ap_denominator)
        values = [report.map]
        seeds_used = [model.seed]
        mean, std = report.map, 0.0
    else:
        values = []
        for seed in seeds:
            m = _reseeded(model, seed, args.refit, db)
            rep = _eval_once(m, db, db_labels, Q, q_labels, k_eval,
                             args.mode, args.ap_denominator)
            values.append(rep.map)
        seeds_used = seeds
        mean = float(statistics.mean(values))
        std = float(statistics.pstdev(values)) if len(values) > 1 else 0.0

    for seed, value in zip(seeds_used, values):
        records.append(dict(metric="map", mode=args.mode, bits=model.k,
                            seed=seed, value=value, dataset=dataset))
    records.append(dict(metric="map_mean", mode=args.mode, bits=model.k,
                        seed="all", value=mean, dataset=dataset))
    records.append(dict(metric="map_std", mode=args.mode, bits=model.k,
                        seed="all", value=std, dataset=dataset))
    _report_lines(records, args.report)
    print(f"mAP@{k_eval} [{args.mode}, {model.k} bits, {len(values)} run(s)]: "
          f"{100 * mean:.1f} +/- {100 * std:.1f}")
    return 0


# ---------------------------------------------------------------- ablate

def _variant_model(variant, X_train, X_global, k, seed, flags):
    if variant == "full":
        return hasher.fit(X_train, k, seed, **flags)
    if variant == "no-rotation":
        m = hasher.fit(X_train, k, seed, **flags)
        return hasher.HashModel(d=m.d, k=k, mean=m.mean, V=m.V,
                                R=np.eye(k), seed=seed, **flags)
    if variant == "no-pca":
        # k orthonormal rows in d-space applied to preprocessed raw data:
        # stored as V = Q (d x k, orthonormal columns), R = identity.
        m = hasher.fit(X_train, k, seed, **flags)
        Q = qr_orthogonal_tall(X_train.shape[1], k, seed)
        return hasher.HashModel(d=m.d, k=k, mean=m.mean, V=Q,
                                R=np.eye(k), seed=seed, **flags)
    if variant == "global-pca":
        base = hasher.fit(X_global, k, seed, **flags)
        R = qr_orthogonal(gaussian_matrix(k, seed))
        return hasher.HashModel(d=base.d, k=k, mean=base.mean, V=base.V,
                                R=R, seed=seed, **flags)
    raise CliError(f"unknown variant {variant}")


def qr_orthogonal_tall(d: int, k: int, seed: int) -> np.ndarray:
    """d x k matrix with orthonormal columns from a seeded Gaussian draw."""
    rng = np.random.default_rng(np.uint64(seed))
    A = rng.standard_normal((d, k))
    Q, R = np.linalg.qr(A)
    return Q * np.sign(np.diagonal(R))[np.newaxis, :]


def cmd_ablate(args) -> int:
    X_train = fileio.read_hbem(args.train)
    db_labels = fileio.read_hblb(args.db_labels)
    Q = fileio.read_hbem(args.queries)
    q_labels = fileio.read_hblb(args.query_labels)
    bits = [_check_bits(b) for b in _parse_bits(args.bits)]
    seeds = _parse_seeds(args.seeds)
    flags = _load_model_flags(args)
    X_global = fileio.read_hbem(args.global_train) if args.global_train else None

    if db_labels.n != X_train.shape[0]:
        raise CliError("database/label row count mismatch")
    k_eval = min(args.k_eval, X_train.shape[0])

    variants = ["full", "no-rotation", "no-pca"]
    if X_global is not None:
        variants.append("global-pca")

    dataset = os.path.basename(args.train)
    records = []
    print(f"{'variant':<12} {'bits':>5}  mAP@{k_eval} (mean +/- std, %)")
    for variant in variants:
        for k in bits:
            values = []
            for seed in seeds:
                m = _variant_model(variant, X_train, X_global, k, seed, flags)
                rep = _eval_once(m, X_train, db_labels, Q, q_labels, k_eval,
                                 args.mode, args.ap_denominator)
                values.append(rep.map)
            mean = float(statistics.mean(values))
            std = float(statistics.pstdev(values)) if len(values) > 1 else 0.0
            for seed, value in zip(seeds, values):
                records.append(dict(metric="map", mode=f"{args.mode}/{variant}",
                                    bits=k, seed=seed, value=value,
                                    dataset=dataset))
            records.append(dict(metric="map_mean", mode=f"{args.mode}/{variant}",
                                bits=k, seed="all", value=mean, dataset=dataset))
            records.append(dict(metric="map_std", mode=f"{args.mode}/{variant}",
                                bits=k, seed="all", value=std, dataset=dataset))
            print(f"{variant:<12} {k:>5}  {100 * mean:.1f} +/- {100 * std:.1f}")
    _report_lines(records, args.report)
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="binhash",
        description="Training-free binary hashing of embedding matrices.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate synthetic clustered embeddings")
    s.add_argument("--out", required=True, help="output path prefix")
    s.add_argument("--classes", type=int, default=10)
    s.add_argument("--per-class", type=int, default=250)
    s.add_argument("--dim", type=int, default=512)
    s.add_argument("--intrinsic-dim", type=int, default=40)
    s.add_argument("--intra-spread", type=float, default=0.15)
    s.add_argument("--inter-scale", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--query-fraction", type=float, default=None)
    s.add_argument("--multilabel", action="store_true")
    s.set_defaults(func=cmd_synth)

    f = sub.add_parser("fit", help="fit a hash model on training embeddings")
    f.add_argument("train", help="HBEM file")
    f.add_argument("--out", required=True, help="output HBMD path")
    f.add_argument("--bits", type=int, required=True)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--no-l2", action="store_true")
    f.add_argument("--no-center", action="store_true")
    f.set_defaults(func=cmd_fit)

    e = sub.add_parser("encode", help="encode embeddings to packed codes")
    e.add_argument("model", help="HBMD file")
    e.add_argument("data", help="HBEM file")
    e.add_argument("--out", required=True, help="output HBCD path")
    e.set_defaults(func=cmd_encode)

    q = sub.add_parser("query", help="rank database codes for each query")
    q.add_argument("model")
    q.add_argument("codes", help="HBCD file")
    q.add_argument("queries", help="HBEM file")
    q.add_argument("--topk", type=int, default=10)
    q.add_argument("--mode", choices=["asym", "sym"], default="asym")
    q.set_defaults(func=cmd_query)

    v = sub.add_parser("eval", help="evaluate mAP@k over a query set")
    v.add_argument("model")
    v.add_argument("db", help="HBEM or HBCD file")
    v.add_argument("db_labels", help="HBLB file")
    v.add_argument("queries", help="HBEM file")
    v.add_argument("query_labels", help="HBLB file")
    v.add_argument("--k-eval", type=int, required=True)
    v.add_argument("--mode", choices=["asym", "sym", "float"], default="asym")
    v.add_argument("--seeds", default=None,
                   help="comma-separated; refits the rotation per seed")
    v.add_argument("--refit", choices=["rotation", "full"], default="rotation")
    v.add_argument("--ap-denominator", choices=["retrieved", "min"],
                   default="retrieved")
    v.add_argument("--report", default=None, help="machine-readable output file")
    v.set_defaults(func=cmd_eval)

    a = sub.add_parser("ablate", help="run pipeline ablations over bit widths")
    a.add_argument("train", help="HBEM file (also the database)")
    a.add_argument("db_labels", help="HBLB file")
    a.add_argument("queries", help="HBEM file")
    a.add_argument("query_labels", help="HBLB file")
    a.add_argument("--bits", required=True, help="comma-separated code lengths")
    a.add_argument("--seeds", required=True, help="comma-separated seeds")
    a.add_argument("--k-eval", type=int, required=True)
    a.add_argument("--mode", choices=["asym", "sym"], default="asym")
    a.add_argument("--global-train", default=None,
                   help="second corpus for the global-PCA variant")
    a.add_argument("--no-l2", action="store_true")
    a.add_argument("--no-center", action="store_true")
    a.add_argument("--ap-denominator", choices=["retrieved", "min"],
                   default="retrieved")
    a.add_argument("--report", default=None)
    a.set_defaults(func=cmd_ablate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, FormatError, ValueError, OSError) as exc:
        print(f"binhash: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
