"""Hierarchical clustering and ultrametric analysis."""
from .agglomerate import CRITERIA, cluster, constrained_cluster, cut, cut_labels
from .baire import (
    BaireHierarchy,
    DigitString,
    baire_cluster,
    baire_distance,
    baire_hierarchy,
    normalize_columns,
    project,
)
from .core import (
    Dendrogram,
    Node,
    cophenetic,
    is_ultrametric_form,
    ultrametric_order,
    verify_ultrametric,
)
from .errors import (
    InputFormatError,
    PreconditionError,
    UltrametricError,
)
from .glattice import BooleanTable, clusters_at_level, set_distance
from .haar import WaveletDecomposition, forward, inverse, regress
from .kernels import BACKEND
from .padic import CharacteristicMatrix, PadicCode, decode, dilate, encode, padic_distance
from .segment import (
    EmbeddingSpec,
    MixtureFit,
    PcoaResult,
    distance_histogram,
    embed,
    gmm_bic,
    pcoa,
    segment_signal,
)
from .umetry import TriangleReport, classify_triangle, generate_cloud, ultrametricity

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CRITERIA", "BaireHierarchy", "BooleanTable", "CharacteristicMatrix",
    "Dendrogram", "DigitString", "EmbeddingSpec", "InputFormatError", "MixtureFit", "Node",
    "PadicCode", "PcoaResult", "PreconditionError", "TriangleReport", "UltrametricError",
    "WaveletDecomposition", "baire_cluster", "baire_distance", "baire_hierarchy",
    "classify_triangle", "cluster", "clusters_at_level", "constrained_cluster", "cophenetic",
    "cut", "cut_labels", "decode", "dilate", "distance_histogram", "embed", "encode",
    "forward", "generate_cloud", "gmm_bic", "inverse", "is_ultrametric_form",
    "normalize_columns", "padic_distance", "pcoa", "project", "regress", "segment_signal",
    "set_distance", "ultrametric_order", "ultrametricity", "verify_ultrametric",
]
