"""The on-disk formats and the CLI that drives them.

Four little-endian binary formats with 24-byte headers tie the tools
together: HBEM (float32 embeddings), HBLB (multi-hot labels), HBMD
(hash model: mean + PCA basis + rotation), HBCD (packed bit codes).

Run with: python3 demos/03_file_formats.py
"""

import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from binhash import ClusterSpec, encode_batch, fit, generate
from binhash.fileio import (
    read_hbcd,
    read_hbem,
    read_hbmd,
    write_hbem,
    write_hbmd,
)

work = Path(tempfile.mkdtemp(prefix="binhash-demo-"))

# --- library round trips ------------------------------------------------
X, labels = generate(ClusterSpec(n_classes=4, per_class=50, d=64,
                                 intra_spread=0.2, inter_scale=1.0,
                                 intrinsic_dim=10, seed=1))
write_hbem(X, str(work / "data.hbem"))
X_back = read_hbem(str(work / "data.hbem"))
print(f"HBEM round trip: shape {X_back.shape}, "
      f"max abs diff {np.abs(X_back - X.astype(np.float32)).max():.1e}")

model = fit(X, k=32, seed=5)
write_hbmd(model, str(work / "model.hbmd"))
model_back = read_hbmd(str(work / "model.hbmd"))
print(f"HBMD round trip: rotation orthogonality error "
      f"{np.abs(model_back.R @ model_back.R.T - np.eye(32)).max():.1e}")

db = encode_batch(model, X)
print(f"codes: {db.n} x {db.k} bits packed into "
      f"{db.words.shape[1]} uint64 word(s) per item")

# --- the same pipeline through the CLI ---------------------------------
def run(*args):
    print("$ binhash", " ".join(args))
    out = subprocess.run([sys.executable, "-m", "binhash.cli", *args],
                         capture_output=True, text=True, check=True)
    for line in out.stdout.strip().splitlines():
        print("  ", line)

run("synth", "--out", str(work / "toy"), "--classes", "4",
    "--per-class", "50", "--dim", "64", "--intrinsic-dim", "10",
    "--seed", "1", "--query-fraction", "0.2")
run("fit", str(work / "toy.db.hbem"), "--bits", "32", "--seed", "5",
    "--out", str(work / "toy.hbmd"))
run("encode", str(work / "toy.hbmd"), str(work / "toy.db.hbem"),
    "--out", str(work / "toy.hbcd"))
run("query", str(work / "toy.hbmd"), str(work / "toy.hbcd"),
    str(work / "toy.query.hbem"), "--topk", "3")
run("eval", str(work / "toy.hbmd"), str(work / "toy.hbcd"),
    str(work / "toy.db.hblb"), str(work / "toy.query.hbem"),
    str(work / "toy.query.hblb"), "--k-eval", "100")

codes = read_hbcd(str(work / "toy.hbcd"))
print(f"CLI-written HBCD parses back: {codes.n} codes of {codes.k} bits")
print(f"artifacts left in {work}")
