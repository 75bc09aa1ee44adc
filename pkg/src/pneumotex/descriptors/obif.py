"""Oriented basic image features over two Gaussian-derivative scales."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..errors import ParameterError
from ..imaging import GrayImage
from .base import FeatureVector

# Per-scale state alphabet (flat excluded): slope gets 2n orientations over
# 360 degrees, dark/light line and saddle get n over 180, plus the two
# rotational classes. With n = 4 that is 22 states; the two-scale joint
# histogram has 22 * 22 = 484 bins.
N_ORIENT = 4
STATES_PER_SCALE = 5 * N_ORIENT + 2

CLASS_FLAT = 0
CLASS_SLOPE = 1
CLASS_DARK_ROT = 2
CLASS_LIGHT_ROT = 3
CLASS_DARK_LINE = 4
CLASS_LIGHT_LINE = 5
CLASS_SADDLE = 6


@dataclass(frozen=True)
class ObifParams:
    alphas: tuple[float, float] = (2.0, 4.0)
    eps: float = 0.001

    def __post_init__(self):
        if len(self.alphas) != 2 or min(self.alphas) <= 0:
            raise ParameterError("alphas must be two positive scales")
        if self.eps < 0:
            raise ParameterError("eps must be non-negative")


DEFAULT_PARAMS = ObifParams()


def derivative_kernels(sigma: float) -> dict[str, np.ndarray]:
    """Gaussian and derivative kernels on a radius-ceil(3*sigma) grid.

    Sign convention: correlating with k10 approximates d/dx (x grows
    rightward), k01 approximates d/dy (y grows downward).
    """
    r = max(1, int(math.ceil(3.0 * sigma)))
    ax = np.arange(-r, r + 1, dtype=np.float64)
    xx, yy = np.meshgrid(ax, ax)
    g = np.exp(-(xx * xx + yy * yy) / (2.0 * sigma * sigma))
    g /= g.sum()
    s2 = sigma * sigma
    return {
        "s00": g,
        "s10": (xx / s2) * g,
        "s01": (yy / s2) * g,
        "s20": ((xx * xx - s2) / (s2 * s2)) * g,
        "s11": (xx * yy / (s2 * s2)) * g,
        "s02": ((yy * yy - s2) / (s2 * s2)) * g,
    }


def scale_responses(pixels: np.ndarray, sigma: float) -> dict[str, np.ndarray]:
    """Scale-normalized derivative responses (first order *sigma, second *sigma^2)."""
    kernels = derivative_kernels(sigma)
    resp = {
        name: ndimage.correlate(pixels, k, mode="nearest") for name, k in kernels.items()
    }
    resp["s10"] *= sigma
    resp["s01"] *= sigma
    for name in ("s20", "s11", "s02"):
        resp[name] *= sigma * sigma
    return resp


def classify_scale(pixels: np.ndarray, sigma: float, eps: float):
    """Per-pixel (class, state) at one scale.

    Classes use the largest of the seven symmetry scores; state is the
    orientation-refined index into the 22-state alphabet, or -1 for flat.
    """
    r = scale_responses(pixels, sigma)
    s00, s10, s01 = r["s00"], r["s10"], r["s01"]
    s20, s11, s02 = r["s20"], r["s11"], r["s02"]
    grad = np.sqrt(s10 * s10 + s01 * s01)
    lam = s20 + s02
    gam = np.sqrt((s20 - s02) ** 2 + 4.0 * s11 * s11)
    scores = np.stack(
        [
            eps * s00,
            2.0 * grad,
            lam,
            -lam,
            (gam + lam) / math.sqrt(2.0),
            (gam - lam) / math.sqrt(2.0),
            gam,
        ]
    )
    cls = scores.argmax(axis=0)

    slope_bin = np.floor((np.arctan2(s01, s10) + math.pi) / (2.0 * math.pi) * (2 * N_ORIENT))
    slope_bin = np.clip(slope_bin, 0, 2 * N_ORIENT - 1).astype(np.intp)
    axial = 0.5 * np.arctan2(2.0 * s11, s20 - s02)
    axial_bin = np.floor((axial + math.pi / 2.0) / math.pi * N_ORIENT)
    axial_bin = np.clip(axial_bin, 0, N_ORIENT - 1).astype(np.intp)

    state = np.full(cls.shape, -1, dtype=np.intp)
    state[cls == CLASS_SLOPE] = slope_bin[cls == CLASS_SLOPE]
    state[cls == CLASS_DARK_ROT] = 2 * N_ORIENT
    state[cls == CLASS_LIGHT_ROT] = 2 * N_ORIENT + 1
    for c, base in (
        (CLASS_DARK_LINE, 2 * N_ORIENT + 2),
        (CLASS_LIGHT_LINE, 3 * N_ORIENT + 2),
        (CLASS_SADDLE, 4 * N_ORIENT + 2),
    ):
        state[cls == c] = base + axial_bin[cls == c]
    return cls, state


def obif_states(img: GrayImage, params: ObifParams = DEFAULT_PARAMS):
    """(state_fine, state_coarse) per pixel; -1 marks flat."""
    _, fine = classify_scale(img.pixels, params.alphas[0], params.eps)
    _, coarse = classify_scale(img.pixels, params.alphas[1], params.eps)
    return fine, coarse


def obifs(img: GrayImage, params: ObifParams = DEFAULT_PARAMS) -> FeatureVector:
    """Two-scale joint state histogram (484 bins), L1-normalized.

    Pixels classified flat at either scale carry no orientation state and are
    left out; a fully flat image degenerates to all mass in bin 0.
    """
    fine, coarse = obif_states(img, params)
    valid = (fine >= 0) & (coarse >= 0)
    hist = np.zeros(STATES_PER_SCALE * STATES_PER_SCALE, dtype=np.float64)
    if not valid.any():
        hist[0] = 1.0
        return FeatureVector("OBIF", hist)
    joint = fine[valid] * STATES_PER_SCALE + coarse[valid]
    counts = np.bincount(joint, minlength=hist.size)
    return FeatureVector("OBIF", counts / counts.sum())
