"""Gini decision tree and bootstrap forest with balanced class weights."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError
from .base import Model, sorted_labels


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 10
    min_samples_split: int = 20
    min_samples_leaf: int = 10

    def __post_init__(self):
        if self.max_depth < 1 or self.min_samples_split < 2 or self.min_samples_leaf < 1:
            raise ParameterError("invalid tree parameters")


@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    dist: np.ndarray | None = None

    @property
    def is_leaf(self) -> bool:
        return self.dist is not None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())

    def leaf_count(self) -> int:
        if self.is_leaf:
            return 1
        return self.left.leaf_count() + self.right.leaf_count()


def _gini_best_split(values: np.ndarray, onehot_w: np.ndarray, min_leaf: int):
    """Best (gain, threshold) for one feature column, or None.

    Candidates are midpoints between consecutive distinct sorted values with
    at least min_leaf raw samples on each side; gains are weighted Gini
    decreases. The first position attaining the maximum wins (lower
    threshold on ties).
    """
    n = values.shape[0]
    order = np.argsort(values, kind="stable")
    v = values[order]
    cw = np.cumsum(onehot_w[order], axis=0)
    total_w = cw[-1]
    W = total_w.sum()
    cut = np.arange(min_leaf, n - min_leaf + 1)
    if cut.size == 0:
        return None
    cut = cut[v[cut] > v[cut - 1]]
    if cut.size == 0:
        return None
    lw = cw[cut - 1]
    rw = total_w[None, :] - lw
    WL = lw.sum(axis=1)
    WR = W - WL
    gini_l = 1.0 - ((lw / WL[:, None]) ** 2).sum(axis=1)
    gini_r = 1.0 - ((rw / WR[:, None]) ** 2).sum(axis=1)
    parent = 1.0 - ((total_w / W) ** 2).sum()
    gains = parent - (WL / W) * gini_l - (WR / W) * gini_r
    best = int(np.argmax(gains))
    return float(gains[best]), (v[cut[best] - 1] + v[cut[best]]) / 2.0


def _build(X, onehot_w, params, depth, rng, max_features):
    n = X.shape[0]
    node_w = onehot_w.sum(axis=0)

    def leaf():
        return TreeNode(dist=node_w / node_w.sum())

    if depth >= params.max_depth or n < params.min_samples_split:
        return leaf()
    if np.count_nonzero(node_w) < 2:
        return leaf()

    d = X.shape[1]
    if max_features is None or max_features >= d:
        feats = np.arange(d)
    else:
        feats = np.sort(rng.choice(d, size=max_features, replace=False))
    best = None
    for f in feats:
        found = _gini_best_split(X[:, f], onehot_w, params.min_samples_leaf)
        if found is not None and found[0] > 0.0 and (best is None or found[0] > best[0]):
            best = (found[0], int(f), found[1])
    if best is None:
        return leaf()
    _, f, thr = best
    mask = X[:, f] <= thr
    left = _build(X[mask], onehot_w[mask], params, depth + 1, rng, max_features)
    right = _build(X[~mask], onehot_w[~mask], params, depth + 1, rng, max_features)
    return TreeNode(feature=f, threshold=thr, left=left, right=right)


class TreeClassifier(Model):
    """CART-style tree; leaf scores are (weighted) label frequencies."""

    def __init__(self, root: TreeNode, labels, dim: int, params: TreeParams):
        self.root = root
        self.labels_ = tuple(labels)
        self.dim_ = dim
        self.params = params

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = self._check(X)
        out = np.empty((X.shape[0], len(self.labels_)), dtype=np.float64)
        for i, row in enumerate(X):
            node = self.root
            while not node.is_leaf:
                node = node.left if row[node.feature] <= node.threshold else node.right
            out[i] = node.dist
        return out


def class_weights(y, labels, mode):
    """Per-label weight; 'balanced' gives n / (n_labels * count)."""
    if mode is None:
        return {lab: 1.0 for lab in labels}
    if mode == "balanced":
        counts = {lab: 0 for lab in labels}
        for lab in y:
            counts[lab] += 1
        n = len(y)
        return {lab: n / (len(labels) * counts[lab]) for lab in labels if counts[lab]}
    raise ParameterError(f"unknown class_weight {mode!r}")


def fit_dt(X, y, params: TreeParams = TreeParams(), class_weight=None) -> TreeClassifier:
    """Grow a Gini tree with exhaustive best-split search."""
    X = np.asarray(X, dtype=np.float64)
    labels = sorted_labels(y)
    index = {lab: i for i, lab in enumerate(labels)}
    yi = np.array([index[lab] for lab in y], dtype=np.intp)
    weights = class_weights(y, labels, class_weight)
    w = np.array([weights[lab] for lab in y], dtype=np.float64)
    onehot_w = np.zeros((len(y), len(labels)), dtype=np.float64)
    onehot_w[np.arange(len(y)), yi] = w
    root = _build(X, onehot_w, params, 0, np.random.default_rng(0), None)
    return TreeClassifier(root, labels, X.shape[1], params)


class ForestClassifier(Model):
    """Mean of member-tree leaf distributions."""

    def __init__(self, trees, labels, dim):
        self.trees = list(trees)
        self.labels_ = tuple(labels)
        self.dim_ = dim

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = self._check(X)
        acc = np.zeros((X.shape[0], len(self.labels_)), dtype=np.float64)
        for t in self.trees:
            acc += t.predict_proba(X)
        return acc / len(self.trees)


def fit_rf(
    X,
    y,
    n_trees: int = 10,
    params: TreeParams = TreeParams(),
    class_weight="balanced",
    bootstrap: bool = True,
    max_features="sqrt",
    seed: int = 0,
) -> ForestClassifier:
    """Bootstrap forest; each split considers a fresh sqrt(dim) feature draw.

    Class weights are computed on the full training labels, before any
    bootstrap. n_trees=1 with bootstrap off and max_features=None degenerates
    to fit_dt with the same weighting.
    """
    if n_trees < 1:
        raise ParameterError("n_trees must be >= 1")
    X = np.asarray(X, dtype=np.float64)
    labels = sorted_labels(y)
    index = {lab: i for i, lab in enumerate(labels)}
    yi_all = np.array([index[lab] for lab in y], dtype=np.intp)
    weights = class_weights(y, labels, class_weight)
    w_all = np.array([weights[lab] for lab in y], dtype=np.float64)
    if max_features == "sqrt":
        m = max(1, int(math.sqrt(X.shape[1])))
    elif max_features is None:
        m = None
    else:
        m = int(max_features)
    trees = []
    n = X.shape[0]
    for t in range(n_trees):
        rng = np.random.default_rng([seed, t])
        rows = rng.integers(n, size=n) if bootstrap else np.arange(n)
        yi = yi_all[rows]
        w = w_all[rows]
        onehot_w = np.zeros((n, len(labels)), dtype=np.float64)
        onehot_w[np.arange(n), yi] = w
        root = _build(X[rows], onehot_w, params, 0, rng, m)
        trees.append(TreeClassifier(root, labels, X.shape[1], params))
    return ForestClassifier(trees, labels, X.shape[1])
