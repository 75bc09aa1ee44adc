"""k-nearest-neighbour classifier with vote-fraction scores."""
from __future__ import annotations

import numpy as np

from ..errors import ParameterError
from ..neighbors import k_smallest, sq_dists
from .base import Model, sorted_labels


class KnnClassifier(Model):
    """Stores the training rows; scores are neighbour vote fractions.

    Distance ties resolve to the lower training-row index.
    """

    def __init__(self, X: np.ndarray, y, k: int):
        X = np.asarray(X, dtype=np.float64)
        if k < 1:
            raise ParameterError("k must be >= 1")
        if k > X.shape[0]:
            raise ParameterError(f"k={k} exceeds train size {X.shape[0]}")
        self.X_ = X.copy()
        self.y_ = list(y)
        self.k = k
        self.labels_ = sorted_labels(y)
        self.dim_ = X.shape[1]
        self._index = {lab: i for i, lab in enumerate(self.labels_)}

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = self._check(X)
        out = np.zeros((X.shape[0], len(self.labels_)), dtype=np.float64)
        for r in range(X.shape[0]):
            d = sq_dists(X[r : r + 1], self.X_)[0]
            for j in k_smallest(d, self.k):
                out[r, self._index[self.y_[j]]] += 1.0
            out[r] /= self.k
        return out


def fit_knn(X, y, k: int = 3) -> KnnClassifier:
    return KnnClassifier(np.asarray(X, dtype=np.float64), y, k)
