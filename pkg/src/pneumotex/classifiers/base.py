"""Score vectors, the classifier interface, and model serialization."""
from __future__ import annotations

import pickle
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ParameterError, SchemaError

MAGIC = b"PTXM1"
SCORE_TOL = 1e-9


@dataclass(frozen=True)
class ScoreVector:
    """Per-label scores that behave like probabilities (sum 1 within 1e-9)."""

    labels: tuple[str, ...]
    scores: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.scores, dtype=np.float64)
        if arr.shape != (len(self.labels),):
            raise ParameterError("scores must align with labels")
        if arr.min() < -SCORE_TOL:
            raise ParameterError("scores must be non-negative")
        if abs(arr.sum() - 1.0) > SCORE_TOL:
            raise ParameterError(f"scores must sum to 1, got {arr.sum()!r}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "scores", arr)

    def top_label(self) -> str:
        """Highest-scoring label; exact ties go to the lexicographic first."""
        best = self.scores.max()
        return min(lab for lab, s in zip(self.labels, self.scores) if s == best)

    def score_of(self, label: str) -> float:
        return float(self.scores[self.labels.index(label)])


class Model:
    """Base classifier: fixed label order, probability-like score rows."""

    labels_: tuple[str, ...]
    dim_: int

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.dim_:
            raise ParameterError(f"expected {self.dim_} features, got {X.shape[1]}")
        return X


def predict_scores(model: Model, x) -> ScoreVector:
    """Score one feature vector; dimensionality is validated."""
    row = model.predict_proba(np.asarray(x, dtype=np.float64)[None, :])[0]
    return ScoreVector(tuple(model.labels_), row)


def sorted_labels(y) -> tuple[str, ...]:
    return tuple(sorted(set(y)))


def save_model(model, path) -> None:
    """Write the model in the PTXM1 binary container."""
    Path(path).write_bytes(MAGIC + pickle.dumps(model, protocol=4))


def load_model(path):
    blob = Path(path).read_bytes()
    if not blob.startswith(MAGIC):
        raise SchemaError(f"{path}: not a {MAGIC.decode()} model container")
    return pickle.loads(blob[len(MAGIC):])
