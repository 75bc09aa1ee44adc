"""Local phase quantization via short-term Fourier transform signs."""
from __future__ import annotations

import math

import numpy as np

from ..errors import ParameterError
from ..imaging import GrayImage
from .base import FeatureVector, clamped_shift, normalize_hist

# Lowest nonzero frequency pairs, scaled by 1/win_size at use.
FREQUENCIES = ((1, 0), (0, 1), (1, 1), (1, -1))


def stft_responses(pixels: np.ndarray, win_size: int) -> np.ndarray:
    """(4, 2, H, W) real/imag STFT parts at the four frequencies.

    Computed on center-subtracted windows; since each frequency spans whole
    periods of the window its true response is unchanged, and constant
    regions come out exactly zero.
    """
    if win_size < 3 or win_size % 2 == 0:
        raise ParameterError(f"win_size must be odd and >= 3, got {win_size}")
    r = win_size // 2
    diffs = {}
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            diffs[(dy, dx)] = clamped_shift(pixels, dy, dx) - pixels
    out = np.zeros((4, 2) + pixels.shape, dtype=np.float64)
    for fi, (ux, uy) in enumerate(FREQUENCIES):
        for dy in range(-r, r + 1):
            for dx in range(-r, r + 1):
                angle = 2.0 * math.pi * (ux * dx + uy * dy) / win_size
                out[fi, 0] += math.cos(angle) * diffs[(dy, dx)]
                out[fi, 1] += -math.sin(angle) * diffs[(dy, dx)]
    return out


def lpq_codes(img: GrayImage, win_size: int = 7) -> np.ndarray:
    """8-bit code per pixel: sign bits of 4 real then 4 imaginary parts."""
    resp = stft_responses(img.pixels, win_size)
    codes = np.zeros(img.pixels.shape, dtype=np.int64)
    for fi in range(4):
        codes |= (resp[fi, 0] >= 0.0).astype(np.int64) << fi
        codes |= (resp[fi, 1] >= 0.0).astype(np.int64) << (4 + fi)
    return codes


def lpq(img: GrayImage, win_size: int = 7) -> FeatureVector:
    """Phase-sign histogram (256 bins), L1-normalized, no decorrelation."""
    counts = np.bincount(lpq_codes(img, win_size).ravel(), minlength=256)
    return FeatureVector("LPQ", normalize_hist(counts))
