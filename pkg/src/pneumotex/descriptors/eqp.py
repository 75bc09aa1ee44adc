"""Elongated quinary patterns on an elliptical neighbourhood."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError
from ..imaging import GrayImage, NeighborhoodSpec
from .base import FeatureVector, normalize_hist, sample_neighbor_planes


@dataclass(frozen=True)
class EqpParams:
    """Thresholds and ellipse geometry.

    The histogram pools the stated ellipse with its 90-degree rotation.
    """

    tau1: float = 2.0
    tau2: float = 5.0
    a: float = 3.0
    b: float = 1.0
    count: int = 8

    def __post_init__(self):
        if not 0 < self.tau1 < self.tau2:
            raise ParameterError("need 0 < tau1 < tau2")


DEFAULT_PARAMS = EqpParams()


def quinary_levels(u: np.ndarray, x: np.ndarray, tau1: float, tau2: float) -> np.ndarray:
    """Five-level code of neighbour u against center x.

    2 if u >= x+tau2; 1 if x+tau1 <= u < x+tau2; 0 if x-tau1 <= u < x+tau1;
    -1 if x-tau2 <= u < x-tau1; -2 otherwise.
    """
    d = u - x
    out = np.full(d.shape, -2, dtype=np.int64)
    out[d >= -tau2] = -1
    out[d >= -tau1] = 0
    out[d >= tau1] = 1
    out[d >= tau2] = 2
    return out


def _orientation_hist(img: GrayImage, spec: NeighborhoodSpec, tau1: float, tau2: float) -> np.ndarray:
    planes = sample_neighbor_planes(img, spec)
    pos = np.zeros(img.pixels.shape, dtype=np.int64)
    neg = np.zeros(img.pixels.shape, dtype=np.int64)
    for i in range(spec.count):
        d = quinary_levels(planes[i], img.pixels, tau1, tau2)
        pos |= (d >= 1).astype(np.int64) << i
        neg |= (d <= -1).astype(np.int64) << i
    n_bins = 1 << spec.count
    return np.bincount(pos.ravel(), minlength=n_bins) + np.bincount(neg.ravel(), minlength=n_bins)


def eqp(img: GrayImage, params: EqpParams = DEFAULT_PARAMS) -> FeatureVector:
    """Quinary-pattern histogram: positive and negative binary maps summed,
    both ellipse orientations pooled, L1-normalized (256 bins)."""
    first = NeighborhoodSpec.ellipse(params.count, params.a, params.b)
    rotated = NeighborhoodSpec.ellipse(params.count, params.b, params.a)
    counts = _orientation_hist(img, first, params.tau1, params.tau2) + _orientation_hist(
        img, rotated, params.tau1, params.tau2
    )
    return FeatureVector("EQP", normalize_hist(counts))
