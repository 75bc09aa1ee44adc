"""Texture descriptors: each maps a GrayImage to an L1-normalized histogram."""
from .base import DESCRIPTOR_DIMS, FeatureVector
from .bsif import bsif, bsif_codes, default_bank, generate_filter_bank, load_filter_bank, save_filter_bank
from .eqp import DEFAULT_PARAMS as EQP_DEFAULTS, EqpParams, eqp, quinary_levels
from .external import load_external_features
from .lbp import DEFAULT_SPEC as LBP_DEFAULT_SPEC, lbp, lbp_codes, uniform_bin_map
from .ldn import KIRSCH_MASKS, ldn, ldn_codes
from .lpq import lpq, lpq_codes
from .obif import ObifParams, obif_states, obifs

__all__ = [
    "DESCRIPTOR_DIMS",
    "FeatureVector",
    "bsif",
    "bsif_codes",
    "default_bank",
    "generate_filter_bank",
    "load_filter_bank",
    "save_filter_bank",
    "EqpParams",
    "EQP_DEFAULTS",
    "eqp",
    "quinary_levels",
    "load_external_features",
    "LBP_DEFAULT_SPEC",
    "lbp",
    "lbp_codes",
    "uniform_bin_map",
    "KIRSCH_MASKS",
    "ldn",
    "ldn_codes",
    "lpq",
    "lpq_codes",
    "ObifParams",
    "obif_states",
    "obifs",
]
