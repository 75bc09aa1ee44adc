"""Plain-text feature file format shared by the cache and external imports.

Layout: a header line `descriptor_id dim n_rows param_digest`, then one line
per sample: `sample_id v1 ... v_dim`. Floats are written with 17 significant
digits so a read-back is bit-identical.
"""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .errors import CacheIntegrityError


def format_float(v: float) -> str:
    return format(float(v), ".17g")


def write_feature_file(path, descriptor_id: str, dim: int, digest: str, rows) -> None:
    """Atomically write rows of (sample_id, vector)."""
    rows = list(rows)
    lines = [f"{descriptor_id} {dim} {len(rows)} {digest}"]
    for sid, vec in rows:
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (dim,):
            raise CacheIntegrityError(f"row {sid} has {vec.size} values, expected {dim}")
        lines.append(sid + " " + " ".join(format_float(v) for v in vec))
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("\n".join(lines) + "\n")
    os.replace(tmp, path)


def read_feature_file(path):
    """Parse a feature file.

    Returns (descriptor_id, dim, digest, rows) where rows is an ordered dict
    of sample_id -> float64 vector. Any header/body inconsistency raises
    CacheIntegrityError.
    """
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise CacheIntegrityError(f"{path}: empty feature file")
    header = lines[0].split()
    if len(header) != 4:
        raise CacheIntegrityError(f"{path}: malformed header {lines[0]!r}")
    descriptor_id, digest = header[0], header[3]
    try:
        dim, n_rows = int(header[1]), int(header[2])
    except ValueError as exc:
        raise CacheIntegrityError(f"{path}: non-integer header counts") from exc
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != n_rows:
        raise CacheIntegrityError(f"{path}: header says {n_rows} rows, found {len(body)}")
    rows: dict[str, np.ndarray] = {}
    for ln in body:
        parts = ln.split()
        sid = parts[0]
        if sid in rows:
            raise CacheIntegrityError(f"{path}: duplicate sample id {sid}")
        if len(parts) - 1 != dim:
            raise CacheIntegrityError(
                f"{path}: row {sid} has {len(parts) - 1} values, expected {dim}"
            )
        try:
            rows[sid] = np.array([float(p) for p in parts[1:]], dtype=np.float64)
        except ValueError as exc:
            raise CacheIntegrityError(f"{path}: row {sid} is not numeric") from exc
    return descriptor_id, dim, digest, rows
