"""End-to-end walkthrough: synthesize clustered embeddings, fit a hash
model, encode the database, and retrieve with asymmetric Hamming search.

Run with: python3 demos/01_pipeline.py
"""

import numpy as np

from binhash import (
    ClusterSpec,
    encode_batch,
    fit,
    generate,
    mean_ap,
    project_batch,
    search_asymmetric,
    split,
)

# 1. A small synthetic corpus: 8 classes of 128-dim embeddings whose
#    variance is concentrated in a 20-dim intrinsic subspace.
spec = ClusterSpec(n_classes=8, per_class=120, d=128, intra_spread=0.2,
                   inter_scale=1.0, intrinsic_dim=20, seed=3)
X, labels = generate(spec)
(X_db, labels_db), (X_q, labels_q) = split(X, labels, query_fraction=0.2, seed=3)
print(f"database {X_db.shape}, queries {X_q.shape}")

# 2. Fit: PCA to 32 dims, then a seeded random orthogonal rotation.
#    No gradient training anywhere -- fitting is one SVD plus one QR.
model = fit(X_db, k=32, seed=11)

# 3. Encode the database to packed 32-bit codes (4 bytes per item).
db = encode_batch(model, X_db)
print(f"codes: {db.n} items x {db.k} bits "
      f"({db.words.shape[1] * 8} bytes each)")

# 4. Queries stay continuous: each query is a vector of bit probabilities
#    sigma(Rz), and the score against a database code b is -sum|b - p|.
P_q = project_batch(model, X_q)
result = search_asymmetric(db, P_q[0], topk=5)
print("top-5 for query 0:")
for rank, (i, s) in enumerate(zip(result.ids, result.scores), start=1):
    shared = bool(np.any(labels_db.row(i) & labels_q.row(0)))
    print(f"  {rank}. id={i:4d} score={s:8.3f} relevant={shared}")

# 5. Quality over the whole query set, against the float-cosine ceiling.
report_bin = mean_ap(db, P_q, labels_q, labels_db, k_eval=db.n)
report_float = mean_ap(X_db, X_q, labels_q, labels_db, k_eval=db.n,
                       mode="float")
print(f"binary mAP = {report_bin.map:.4f}   "
      f"float-cosine mAP = {report_float.map:.4f}")
