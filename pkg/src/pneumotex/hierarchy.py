"""Predictive clustering trees over the class hierarchy and their ensemble."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import f as f_dist

from .dataset import Taxonomy
from .errors import ParameterError
from .evaluation import macro_f1

_EPS = 1e-12
_SELECT_TAG = 101
DEFAULT_F_TEST_LEVELS = (0.001, 0.005, 0.01, 0.05, 0.1, 0.125)


@dataclass(frozen=True)
class PctParams:
    f_test_levels: tuple[float, ...] = DEFAULT_F_TEST_LEVELS
    ensemble_iterations: int = 10
    voting: str = "majority"
    min_leaf: int = 2
    depth_weight: float = 0.75

    def __post_init__(self):
        if not self.f_test_levels or any(not 0.0 < lv < 1.0 for lv in self.f_test_levels):
            raise ParameterError("f_test_levels must be non-empty, each in (0, 1)")
        if self.ensemble_iterations < 1:
            raise ParameterError("ensemble_iterations must be >= 1")
        if self.voting != "majority":
            raise ParameterError(f"unknown voting {self.voting!r}")
        if self.min_leaf < 1:
            raise ParameterError("min_leaf must be >= 1")
        if not 0.0 < self.depth_weight <= 1.0:
            raise ParameterError("depth_weight must be in (0, 1]")


@dataclass(frozen=True)
class NodeVector:
    """Per-node scores in [0, 1]; a child never outscores its parent."""

    taxonomy: Taxonomy
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (len(self.taxonomy),):
            raise ParameterError(
                f"expected {len(self.taxonomy)} node scores, got {values.shape}"
            )
        if values.min() < 0.0 or values.max() > 1.0:
            raise ParameterError("node scores must lie in [0, 1]")
        for node in self.taxonomy.nodes:
            parent = self.taxonomy.parent(node)
            if parent is not None:
                child_v = values[self.taxonomy.index(node)]
                if child_v > values[self.taxonomy.index(parent)] + 1e-9:
                    raise ParameterError(f"node {node!r} outscores its parent")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def score(self, path: str) -> float:
        return float(self.values[self.taxonomy.index(path)])


def encode_node_vector(label: str, taxonomy: Taxonomy) -> NodeVector:
    """Binary vector: 1 on the label's node and every ancestor."""
    values = np.zeros(len(taxonomy))
    for node in taxonomy.ancestors(label):
        values[taxonomy.index(node)] = 1.0
    return NodeVector(taxonomy, values)


def _encode_rows(labels, taxonomy: Taxonomy) -> np.ndarray:
    E = np.zeros((len(labels), len(taxonomy)))
    for i, label in enumerate(labels):
        for node in taxonomy.ancestors(label):
            E[i, taxonomy.index(node)] = 1.0
    return E


def node_weights(taxonomy: Taxonomy, w0: float) -> np.ndarray:
    return np.asarray([w0 ** taxonomy.depth(p) for p in taxonomy.nodes])


def _weighted_ss(E: np.ndarray, w: np.ndarray) -> float:
    """Sum over nodes of w_n * sum_i (E_in - mean_n)^2."""
    n = E.shape[0]
    s1 = E.sum(axis=0)
    s2 = (E * E).sum(axis=0)
    return float((w * (s2 - s1 * s1 / n)).sum())


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    reduction: float


def best_split(X, E, weights, features, min_leaf: int, level: float) -> Split | None:
    """Max weighted-variance-reduction split, gated by a one-way F-test.

    Candidate thresholds are midpoints between consecutive distinct values
    of each candidate feature; both children must keep min_leaf rows. The
    best candidate is chosen first (ties: lowest feature, then lowest
    threshold) and only then tested, so the choice never depends on level.
    """
    X = np.asarray(X, dtype=np.float64)
    E = np.asarray(E, dtype=np.float64)
    n = X.shape[0]
    if n < 2 or n < 2 * min_leaf:
        return None
    ss_total = _weighted_ss(E, weights)
    if ss_total <= _EPS:
        return None
    best = None
    for f in features:
        v = X[:, f]
        order = np.argsort(v, kind="stable")
        sv = v[order]
        Es = E[order]
        c1 = np.cumsum(Es, axis=0)
        c2 = np.cumsum(Es * Es, axis=0)
        cuts = np.arange(min_leaf, n - min_leaf + 1)
        cuts = cuts[sv[cuts] > sv[cuts - 1]]
        if cuts.size == 0:
            continue
        nl = cuts.astype(np.float64)[:, None]
        s1l, s2l = c1[cuts - 1], c2[cuts - 1]
        ss_l = ((s2l - s1l * s1l / nl) * weights).sum(axis=1)
        s1r, s2r = c1[-1] - s1l, c2[-1] - s2l
        ss_r = ((s2r - s1r * s1r / (n - nl)) * weights).sum(axis=1)
        within = ss_l + ss_r
        red = (ss_total - within) / n
        k = int(np.argmax(red))
        if best is None or red[k] > best[0]:
            cut = int(cuts[k])
            thr = (sv[cut - 1] + sv[cut]) / 2.0
            best = (float(red[k]), int(f), thr, float(within[k]))
    if best is None:
        return None
    reduction, feature, threshold, ss_within = best
    ss_between = ss_total - ss_within
    if ss_within <= _EPS:
        accepted = ss_between > _EPS
    elif n - 2 >= 1:
        stat = ss_between * (n - 2) / ss_within
        accepted = stat >= f_dist.ppf(1.0 - level, 1, n - 2)
    else:
        accepted = False
    if not accepted:
        return None
    return Split(feature, threshold, reduction)


@dataclass
class PctNode:
    feature: int | None = None
    threshold: float = 0.0
    left: "PctNode | None" = None
    right: "PctNode | None" = None
    vector: np.ndarray | None = None

    @property
    def is_leaf(self) -> bool:
        return self.vector is not None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())


def _grow(X, E, weights, params, level, subset, rng) -> PctNode:
    d = X.shape[1]
    if subset is None or subset >= d:
        features = range(d)
    else:
        features = np.sort(rng.choice(d, size=subset, replace=False))
    split = best_split(X, E, weights, features, params.min_leaf, level)
    if split is None:
        return PctNode(vector=E.mean(axis=0))
    mask = X[:, split.feature] <= split.threshold
    return PctNode(
        feature=split.feature,
        threshold=split.threshold,
        left=_grow(X[mask], E[mask], weights, params, level, subset, rng),
        right=_grow(X[~mask], E[~mask], weights, params, level, subset, rng),
    )


class PctTree:
    """Single predictive clustering tree; leaves hold mean node vectors."""

    def __init__(self, root: PctNode, taxonomy: Taxonomy, level: float):
        self.root = root
        self.taxonomy = taxonomy
        self.level = level
        self.dim_: int | None = None

    def depth(self) -> int:
        return self.root.depth()

    def predict_node_scores(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        out = np.empty((X.shape[0], len(self.taxonomy)))
        for i, row in enumerate(X):
            node = self.root
            while not node.is_leaf:
                node = node.left if row[node.feature] <= node.threshold else node.right
            out[i] = node.vector
        return out

    def predict_paths(self, X, relative: float = 0.5, absolute: float | None = None):
        scores = self.predict_node_scores(X)
        return [
            _decode_values(row, self.taxonomy, relative, absolute) for row in scores
        ]


class PctForest:
    """Bootstrap ensemble of PCTs with majority voting over decoded paths."""

    def __init__(self, members: list[PctTree], taxonomy: Taxonomy, level: float):
        self.members = members
        self.taxonomy = taxonomy
        self.level = level
        self.dim_: int | None = None

    def predict_node_scores(self, X) -> np.ndarray:
        stacked = np.stack([m.predict_node_scores(X) for m in self.members])
        return stacked.mean(axis=0)

    def predict_paths(self, X, relative: float = 0.5, absolute: float | None = None):
        votes = [m.predict_paths(X, relative, absolute) for m in self.members]
        mean_scores = self.predict_node_scores(X)
        out = []
        for i in range(mean_scores.shape[0]):
            counts = Counter(v[i] for v in votes)
            top = max(counts.values())
            tied = sorted(p for p, c in counts.items() if c == top)
            if len(tied) > 1:
                means = [
                    float(np.mean([mean_scores[i, self.taxonomy.index(node)]
                                   for node in self.taxonomy.ancestors(p)]))
                    for p in tied
                ]
                hi = max(means)
                tied = [p for p, m in zip(tied, means) if m == hi]
            out.append(tied[0])
        return out


def fit_pct(
    X,
    labels,
    taxonomy: Taxonomy,
    params: PctParams = PctParams(),
    level: float | None = None,
    feature_subset_size: int | None = None,
    seed: int = 0,
) -> PctTree:
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] == 0:
        raise ParameterError("training set is empty")
    if level is None:
        level = select_f_test_level(X, labels, taxonomy, params, seed=seed)
    E = _encode_rows(labels, taxonomy)
    weights = node_weights(taxonomy, params.depth_weight)
    rng = np.random.default_rng(seed)
    root = _grow(X, E, weights, params, level, feature_subset_size, rng)
    tree = PctTree(root, taxonomy, level)
    tree.dim_ = X.shape[1]
    return tree


def select_f_test_level(
    X,
    labels,
    taxonomy: Taxonomy,
    params: PctParams = PctParams(),
    seed: int = 0,
) -> float:
    """Pick the significance level with best held-out path macro-F1.

    Internal seeded 80/20 sub-split; single full-feature PCT per level;
    ties keep the earliest listed level.
    """
    levels = params.f_test_levels
    if len(levels) == 1:
        return levels[0]
    X = np.asarray(X, dtype=np.float64)
    labels = list(labels)
    n = len(labels)
    if n < 5:
        return levels[0]
    rng = np.random.default_rng([seed, _SELECT_TAG])
    perm = rng.permutation(n)
    n_val = max(1, n // 5)
    val = np.sort(perm[:n_val])
    sub = np.sort(perm[n_val:])
    y_val = [labels[i] for i in val]
    best_level, best_score = levels[0], -1.0
    for level in levels:
        tree = fit_pct(
            X[sub], [labels[i] for i in sub], taxonomy, params, level=level, seed=seed
        )
        score = macro_f1(y_val, tree.predict_paths(X[val]))
        if score > best_score:
            best_level, best_score = level, score
    return best_level


def fit_pct_forest(
    X,
    labels,
    taxonomy: Taxonomy,
    params: PctParams = PctParams(),
    level: float | None = None,
    seed: int = 0,
    bootstrap: bool = True,
    feature_subset: str | None = "sqrt",
) -> PctForest:
    """ensemble_iterations bootstrap PCTs, sqrt-dim feature subsets per split."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] == 0:
        raise ParameterError("training set is empty")
    labels = list(labels)
    if level is None:
        level = select_f_test_level(X, labels, taxonomy, params, seed=seed)
    E = _encode_rows(labels, taxonomy)
    weights = node_weights(taxonomy, params.depth_weight)
    n, d = X.shape
    if feature_subset is None:
        subset = None
    elif feature_subset == "sqrt":
        subset = max(1, int(np.sqrt(d)))
    else:
        raise ParameterError(f"unknown feature_subset {feature_subset!r}")
    members = []
    for t in range(params.ensemble_iterations):
        rng = np.random.default_rng([seed, t])
        rows = rng.integers(n, size=n) if bootstrap else np.arange(n)
        root = _grow(X[rows], E[rows], weights, params, level, subset, rng)
        member = PctTree(root, taxonomy, level)
        member.dim_ = d
        members.append(member)
    forest = PctForest(members, taxonomy, level)
    forest.dim_ = d
    return forest


def _decode_values(
    values: np.ndarray,
    taxonomy: Taxonomy,
    relative: float = 0.5,
    absolute: float | None = None,
) -> str:
    current: str | None = None
    current_score = 1.0
    while True:
        kids = taxonomy.children(current)
        if not kids:
            return current
        best_kid, best_score = None, -1.0
        for kid in kids:
            s = float(values[taxonomy.index(kid)])
            if s > best_score:
                best_kid, best_score = kid, s
        if current is not None:
            cutoff = absolute if absolute is not None else relative * current_score
            if best_score < cutoff:
                return current
        current, current_score = best_kid, best_score


def decode_path(
    scores: NodeVector, relative: float = 0.5, absolute: float | None = None
) -> str:
    """Greedy root-to-leaf descent over the highest-scoring children.

    Descends while the chosen child's score is at least relative times the
    parent score (or at least absolute when given); always emits at least
    one level. Ties go to the lexicographically first label.
    """
    return _decode_values(scores.values, scores.taxonomy, relative, absolute)
