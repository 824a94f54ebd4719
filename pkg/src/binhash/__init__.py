"""binhash: training-free binary hashing of pre-trained embeddings.

Pipeline: PCA reduction, random orthogonal rotation, sigmoid + threshold
binarization, and exact symmetric/asymmetric Hamming retrieval with mAP
evaluation.
"""

from .hasher import HashModel, binarize, encode_batch, fit, project, project_batch
from .index import (
    BinaryCode,
    CodeDatabase,
    RetrievalResult,
    asym_score,
    hamming,
    search_asymmetric,
    search_symmetric,
)
from .linalg import gaussian_matrix, qr_orthogonal, truncated_svd
from .metrics import LabelSet, MetricReport, average_precision, mean_ap, multi_seed
from .synth import ClusterSpec, generate, split

__all__ = [
    "HashModel", "fit", "project", "project_batch", "binarize", "encode_batch",
    "BinaryCode", "CodeDatabase", "RetrievalResult",
    "hamming", "asym_score", "search_asymmetric", "search_symmetric",
    "truncated_svd", "gaussian_matrix", "qr_orthogonal",
    "LabelSet", "MetricReport", "average_precision", "mean_ap", "multi_seed",
    "ClusterSpec", "generate", "split",
]

__version__ = "0.1.0"
