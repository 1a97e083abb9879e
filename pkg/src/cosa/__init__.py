"""Clustering objects on subsets of attributes (COSA) and the downstream
proximity-analysis pipeline: hierarchical clustering, MDS and attribute
importance."""

__version__ = "0.1.0"

from .distances import (  # noqa: E402
    DataMatrix,
    DissimilarityMatrix,
    ScaleFactors,
    TargetSpec,
    compute_scale_factors,
    fixed_weight_dissimilarity,
    l1_dissimilarity,
    sqeuclid_dissimilarity,
)
from .engine import CosaParams, CosaResult, run_cosa  # noqa: E402
from .hclust import agglomerate, cut, normalize_ss  # noqa: E402
from .importance import attimp  # noqa: E402
from .mds import classical_mds, smacof  # noqa: E402

__all__ = [
    "DataMatrix",
    "DissimilarityMatrix",
    "ScaleFactors",
    "TargetSpec",
    "compute_scale_factors",
    "fixed_weight_dissimilarity",
    "l1_dissimilarity",
    "sqeuclid_dissimilarity",
    "CosaParams",
    "CosaResult",
    "run_cosa",
    "agglomerate",
    "cut",
    "normalize_ss",
    "attimp",
    "classical_mds",
    "smacof",
]
