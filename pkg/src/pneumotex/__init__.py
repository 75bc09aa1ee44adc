"""Texture-descriptor pipelines for pneumonia chest X-ray classification.

Flat and hierarchical classification of lung conditions from handcrafted
texture features, with imbalance-aware resampling, early and late fusion,
and a reproducible experiment grid.
"""
from . import classifiers, descriptors
from .dataset import (
    DescriptorConfig,
    FeatureMatrix,
    Sample,
    Taxonomy,
    early_fuse,
    enumerate_fusion_sets,
    extract_features,
    parse_manifest,
    parse_taxonomy,
    stratified_holdout,
)
from .descriptors import DESCRIPTOR_DIMS, FeatureVector
from .errors import PneumotexError
from .evaluation import (
    ConfusionMatrix,
    confusion,
    friedman_ranks,
    hierarchical_report,
    macro_f1,
    prf1,
)
from .fusion import (
    FUSION_RULES,
    Scenario,
    ScenarioResult,
    fuse_node_vectors,
    fused_top_label,
    late_fuse,
    select_scenarios,
)
from .hierarchy import (
    NodeVector,
    PctParams,
    decode_path,
    encode_node_vector,
    fit_pct,
    fit_pct_forest,
)
from .imaging import GrayImage, NeighborhoodSpec, load_gray
from .resampling import METHODS, resample_multiclass

__version__ = "0.1.0"

__all__ = [
    "DESCRIPTOR_DIMS",
    "METHODS",
    "FUSION_RULES",
    "ConfusionMatrix",
    "DescriptorConfig",
    "FeatureMatrix",
    "FeatureVector",
    "GrayImage",
    "NeighborhoodSpec",
    "NodeVector",
    "PctParams",
    "PneumotexError",
    "Sample",
    "Scenario",
    "ScenarioResult",
    "Taxonomy",
    "classifiers",
    "confusion",
    "decode_path",
    "descriptors",
    "early_fuse",
    "encode_node_vector",
    "enumerate_fusion_sets",
    "extract_features",
    "fit_pct",
    "fit_pct_forest",
    "friedman_ranks",
    "fuse_node_vectors",
    "fused_top_label",
    "hierarchical_report",
    "late_fuse",
    "load_gray",
    "macro_f1",
    "parse_manifest",
    "parse_taxonomy",
    "prf1",
    "resample_multiclass",
    "select_scenarios",
    "stratified_holdout",
]
