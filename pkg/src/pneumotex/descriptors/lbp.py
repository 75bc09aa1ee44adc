"""Local binary patterns with the uniform-pattern histogram."""
from __future__ import annotations

import numpy as np

from ..imaging import GrayImage, NeighborhoodSpec
from .base import FeatureVector, normalize_hist, sample_neighbor_planes

DEFAULT_SPEC = NeighborhoodSpec.circle(8, 2.0)


def _transitions(code: int, bits: int) -> int:
    rotated = ((code << 1) | (code >> (bits - 1))) & ((1 << bits) - 1)
    return bin(code ^ rotated).count("1")


def uniform_bin_map(bits: int = 8) -> np.ndarray:
    """Map from raw code to histogram bin.

    Uniform codes (at most two circular 0/1 transitions) get bins 0..U-1 in
    ascending code order; everything else shares the last bin.
    """
    codes = np.arange(1 << bits)
    uniform = np.array([_transitions(int(c), bits) <= 2 for c in codes])
    mapping = np.full(1 << bits, int(uniform.sum()), dtype=np.intp)
    mapping[uniform] = np.arange(int(uniform.sum()))
    return mapping

_BIN_MAP_8 = uniform_bin_map(8)


def lbp_codes(img: GrayImage, spec: NeighborhoodSpec = DEFAULT_SPEC) -> np.ndarray:
    """Raw LBP code per pixel: bit i set iff neighbour i >= center."""
    planes = sample_neighbor_planes(img, spec)
    codes = np.zeros(img.pixels.shape, dtype=np.int64)
    for i in range(spec.count):
        codes |= (planes[i] - img.pixels >= 0.0).astype(np.int64) << i
    return codes


def lbp(img: GrayImage, spec: NeighborhoodSpec = DEFAULT_SPEC) -> FeatureVector:
    """Uniform LBP histogram (59 bins for 8 neighbours)."""
    mapping = _BIN_MAP_8 if spec.count == 8 else uniform_bin_map(spec.count)
    n_bins = int(mapping.max()) + 1
    counts = np.bincount(mapping[lbp_codes(img, spec)].ravel(), minlength=n_bins)
    return FeatureVector("LBP", normalize_hist(counts))
