"""Shared descriptor types and sampling helpers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError
from ..imaging import GrayImage, NeighborhoodSpec

# Output dimensionality per descriptor id.
DESCRIPTOR_DIMS = {
    "LBP": 59,
    "EQP": 256,
    "LDN": 56,
    "LETRIST": 413,
    "BSIF": 256,
    "LPQ": 256,
    "OBIF": 484,
    "INCEPTIONV3": 2048,
}


@dataclass(frozen=True)
class FeatureVector:
    """One descriptor output for one image."""

    descriptor_id: str
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise ParameterError("feature values must be a flat vector")
        expected = DESCRIPTOR_DIMS.get(self.descriptor_id)
        if expected is not None and arr.shape[0] != expected:
            raise ParameterError(
                f"{self.descriptor_id} must have {expected} values, got {arr.shape[0]}"
            )
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def dim(self) -> int:
        return self.values.shape[0]


def normalize_hist(counts: np.ndarray) -> np.ndarray:
    """L1-normalize histogram counts (total must be positive)."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise ParameterError("histogram has no mass")
    return counts / total


def clamped_shift(pixels: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """View of pixels displaced by (dy, dx) with replicate-edge handling."""
    h, w = pixels.shape
    ys = np.clip(np.arange(h) + dy, 0, h - 1)
    xs = np.clip(np.arange(w) + dx, 0, w - 1)
    return pixels[np.ix_(ys, xs)]


def sample_neighbor_planes(img: GrayImage, spec: NeighborhoodSpec) -> np.ndarray:
    """Sampled neighbour intensities for every pixel at once.

    Returns shape (spec.count, H, W); plane i holds the bilinear sample at
    spec point i around each pixel, replicate-edge clamped. Arithmetic matches
    imaging.sample_neighbors element for element.
    """
    pixels = img.pixels
    h, w = pixels.shape
    cols = np.arange(w, dtype=np.float64)[None, :].repeat(h, axis=0)
    rows = np.arange(h, dtype=np.float64)[:, None].repeat(w, axis=1)
    out = np.empty((spec.count, h, w), dtype=np.float64)
    for i, (dx, dy) in enumerate(spec.offsets()):
        x = np.clip(cols + dx, 0.0, float(w - 1))
        y = np.clip(rows + dy, 0.0, float(h - 1))
        x0 = np.floor(x).astype(np.intp)
        y0 = np.floor(y).astype(np.intp)
        x1 = np.minimum(x0 + 1, w - 1)
        y1 = np.minimum(y0 + 1, h - 1)
        fx = x - x0
        fy = y - y0
        v00 = pixels[y0, x0]
        v10 = pixels[y0, x1]
        v01 = pixels[y1, x0]
        v11 = pixels[y1, x1]
        out[i] = v00 + fx * (v10 - v00) + fy * (v01 - v00) + fx * fy * (v00 - v10 - v01 + v11)
    return out
