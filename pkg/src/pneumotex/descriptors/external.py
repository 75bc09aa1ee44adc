"""Ingestion of externally computed feature vectors (e.g. LETRIST, Inception-V3)."""
from __future__ import annotations

from ..errors import CacheIntegrityError
from ..featurefile import read_feature_file
from .base import DESCRIPTOR_DIMS


def load_external_features(path, expected_id: str | None = None, expected_dim: int | None = None):
    """Load a feature file of precomputed vectors keyed by sample id.

    Returns (descriptor_id, dim, rows). The declared dimension is checked
    against expected_dim, or against the registry when the id is known there
    (LETRIST 413, INCEPTIONV3 2048). Duplicate ids fail inside the reader.
    """
    descriptor_id, dim, _digest, rows = read_feature_file(path)
    if expected_id is not None and descriptor_id != expected_id:
        raise CacheIntegrityError(
            f"{path}: holds {descriptor_id!r}, expected {expected_id!r}"
        )
    if expected_dim is None:
        expected_dim = DESCRIPTOR_DIMS.get(descriptor_id)
    if expected_dim is not None and dim != expected_dim:
        raise CacheIntegrityError(
            f"{path}: {descriptor_id} vectors have dim {dim}, expected {expected_dim}"
        )
    return descriptor_id, dim, rows
