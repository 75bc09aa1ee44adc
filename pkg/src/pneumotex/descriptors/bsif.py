"""Binarized statistical image features over a linear filter bank."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import ParameterError, SchemaError
from ..imaging import GrayImage
from .base import FeatureVector, clamped_shift, normalize_hist


def generate_filter_bank(size: int = 11, bits: int = 8, seed: int = 7) -> np.ndarray:
    """Deterministic fallback bank: zero-mean, orthonormal, seeded.

    Stands in for an ICA-trained bank; ICA training itself is out of scope.
    Returns shape (bits, size, size).
    """
    if size < 3 or size % 2 == 0:
        raise ParameterError(f"filter size must be odd and >= 3, got {size}")
    if not 1 <= bits < size * size:
        raise ParameterError(f"bits must be in [1, {size * size - 1}), got {bits}")
    rng = np.random.default_rng(seed)
    basis = []
    while len(basis) < bits:
        v = rng.standard_normal(size * size)
        v -= v.mean()
        for u in basis:
            v -= (v @ u) * u
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            basis.append(v / norm)
    return np.stack(basis).reshape(bits, size, size)


def load_filter_bank(path) -> np.ndarray:
    """Read a bank file: first line `size bits`, then bits size*size blocks."""
    text = Path(path).read_text().split()
    if len(text) < 2:
        raise SchemaError(f"filter bank {path} is empty")
    try:
        size, bits = int(text[0]), int(text[1])
        values = np.array([float(t) for t in text[2:]], dtype=np.float64)
    except ValueError as exc:
        raise SchemaError(f"filter bank {path} is not numeric") from exc
    if size < 3 or size % 2 == 0 or bits < 1:
        raise SchemaError(f"filter bank {path} has invalid size/bits {size}/{bits}")
    if values.size != bits * size * size:
        raise SchemaError(
            f"filter bank {path} holds {values.size} values, expected {bits * size * size}"
        )
    return values.reshape(bits, size, size)


def save_filter_bank(path, bank: np.ndarray) -> None:
    bank = np.asarray(bank, dtype=np.float64)
    lines = [f"{bank.shape[1]} {bank.shape[0]}"]
    for f in bank:
        for row in f:
            lines.append(" ".join(format(v, ".17g") for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def bsif_codes(img: GrayImage, bank: np.ndarray) -> np.ndarray:
    """Code per pixel: bit j set iff filter j responds strictly positively.

    Responses use center-subtracted neighbourhoods, equivalent for zero-mean
    filters and exactly zero on constant regions.
    """
    bank = np.asarray(bank, dtype=np.float64)
    if bank.ndim != 3 or bank.shape[1] != bank.shape[2] or bank.shape[1] % 2 == 0:
        raise ParameterError(f"bank must be (bits, s, s) with odd s, got {bank.shape}")
    r = bank.shape[1] // 2
    diffs = {}
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            diffs[(dy, dx)] = clamped_shift(img.pixels, dy, dx) - img.pixels
    codes = np.zeros(img.pixels.shape, dtype=np.int64)
    for j, f in enumerate(bank):
        resp = np.zeros_like(img.pixels)
        for dy in range(-r, r + 1):
            for dx in range(-r, r + 1):
                resp += f[dy + r, dx + r] * diffs[(dy, dx)]
        codes |= (resp > 0.0).astype(np.int64) << j
    return codes


def bsif(img: GrayImage, bank: np.ndarray | None = None) -> FeatureVector:
    """Binary-code histogram (256 bins for an 8-bit bank), L1-normalized."""
    if bank is None:
        bank = default_bank()
    if bank.shape[0] != 8:
        raise ParameterError(f"BSIF requires an 8-bit bank, got {bank.shape[0]} bits")
    counts = np.bincount(bsif_codes(img, bank).ravel(), minlength=256)
    return FeatureVector("BSIF", normalize_hist(counts))


_DEFAULT_BANK = None


def default_bank() -> np.ndarray:
    """Lazily built 11x11 8-bit fallback bank."""
    global _DEFAULT_BANK
    if _DEFAULT_BANK is None:
        _DEFAULT_BANK = generate_filter_bank(11, 8, seed=7)
    return _DEFAULT_BANK
