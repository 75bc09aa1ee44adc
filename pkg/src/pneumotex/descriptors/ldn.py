"""Local directional number patterns from Kirsch compass responses."""
from __future__ import annotations

import math

import numpy as np

from ..imaging import GrayImage
from .base import FeatureVector, clamped_shift, normalize_hist

# Eight 3x3 Kirsch masks, rotating counter-clockwise from east. Center weight
# is zero and every mask sums to zero.
KIRSCH_MASKS = np.array(
    [
        [[-3, -3, 5], [-3, 0, 5], [-3, -3, 5]],   # E
        [[-3, 5, 5], [-3, 0, 5], [-3, -3, -3]],   # NE
        [[5, 5, 5], [-3, 0, -3], [-3, -3, -3]],   # N
        [[5, 5, -3], [5, 0, -3], [-3, -3, -3]],   # NW
        [[5, -3, -3], [5, 0, -3], [5, -3, -3]],   # W
        [[-3, -3, -3], [5, 0, -3], [5, 5, -3]],   # SW
        [[-3, -3, -3], [-3, 0, -3], [5, 5, 5]],   # S
        [[-3, -3, -3], [-3, 0, 5], [-3, 5, 5]],   # SE
    ],
    dtype=np.float64,
)


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 2-D Gaussian sampled on a radius-ceil(3*sigma) grid."""
    r = max(1, int(math.ceil(3.0 * sigma)))
    ax = np.arange(-r, r + 1, dtype=np.float64)
    xx, yy = np.meshgrid(ax, ax)
    k = np.exp(-(xx * xx + yy * yy) / (2.0 * sigma * sigma))
    return k / k.sum()


def smooth(pixels: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian blur with replicate-edge handling, fixed raster accumulation."""
    k = gaussian_kernel(sigma)
    r = k.shape[0] // 2
    out = np.zeros_like(pixels)
    for iy in range(k.shape[0]):
        for ix in range(k.shape[1]):
            out += k[iy, ix] * clamped_shift(pixels, iy - r, ix - r)
    return out


def kirsch_responses(blurred: np.ndarray) -> np.ndarray:
    """(8, H, W) compass responses on center-subtracted neighbourhoods.

    The masks sum to zero, so subtracting the center value changes nothing
    mathematically but makes constant regions respond exactly zero.
    """
    diffs = {}
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if (dy, dx) != (0, 0):
                diffs[(dy, dx)] = clamped_shift(blurred, dy, dx) - blurred
    out = np.zeros((8,) + blurred.shape, dtype=np.float64)
    for m in range(8):
        mask = KIRSCH_MASKS[m]
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if (dy, dx) != (0, 0):
                    out[m] += mask[dy + 1, dx + 1] * diffs[(dy, dx)]
    return out


def ldn_codes(img: GrayImage, sigma: float = 0.5) -> np.ndarray:
    """Code per pixel from the (argmax, argmin) compass pair, 56 values.

    Ties resolve to the lowest mask index; the minimum is taken over the
    remaining seven masks so the pair is always distinct.
    """
    resp = kirsch_responses(smooth(img.pixels, sigma))
    top = resp.argmax(axis=0)
    masked = resp.copy()
    np.put_along_axis(masked, top[None, ...], np.inf, axis=0)
    bottom = masked.argmin(axis=0)
    return top * 7 + bottom - (bottom > top)


def ldn(img: GrayImage, sigma: float = 0.5) -> FeatureVector:
    """Directional-number histogram (56 bins), L1-normalized."""
    counts = np.bincount(ldn_codes(img, sigma).ravel(), minlength=56)
    return FeatureVector("LDN", normalize_hist(counts))
