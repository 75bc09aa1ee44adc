"""Squared-Euclidean distances and deterministic k-smallest selection."""
from __future__ import annotations

import numpy as np


def sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(len(a), len(b)) squared Euclidean distances, plain difference form."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    out = np.empty((a.shape[0], b.shape[0]), dtype=np.float64)
    for i in range(a.shape[0]):
        diff = b - a[i]
        out[i] = (diff * diff).sum(axis=1)
    return out


def k_smallest(d_row: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k smallest distances, ties to the lower index."""
    n = d_row.shape[0]
    k = min(k, n)
    if k <= 0:
        return np.empty(0, dtype=np.intp)
    if k >= n:
        return np.argsort(d_row, kind="stable")[:k]
    part = np.argpartition(d_row, k - 1)[:k]
    edge = d_row[part].max()
    cand = np.flatnonzero(d_row <= edge)
    return cand[np.argsort(d_row[cand], kind="stable")][:k]
