"""Flat and hierarchical classification metrics plus Friedman mean ranks."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .dataset import Taxonomy
from .errors import SchemaError


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are true labels, columns predicted."""

    labels: tuple
    counts: np.ndarray = field(repr=False)

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        m = len(self.labels)
        if counts.shape != (m, m) or counts.min(initial=0) < 0:
            raise SchemaError("confusion counts must be a square non-negative grid")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def row(self, label) -> np.ndarray:
        return self.counts[self.labels.index(label)]


def confusion(y_true, y_pred, labels=None) -> ConfusionMatrix:
    if len(y_true) != len(y_pred):
        raise SchemaError("prediction and truth lists differ in length")
    if labels is None:
        labels = sorted({*y_true, *y_pred})
    labels = tuple(labels)
    index = {lab: i for i, lab in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        if t not in index or p not in index:
            missing = t if t not in index else p
            raise SchemaError(f"label {missing!r} not in the configured order")
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(labels, counts)


def _prf(tp: float, fp: float, fn: float) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


@dataclass(frozen=True)
class PrfReport:
    per_label: dict
    macro_f1: float


def prf1(matrix: ConfusionMatrix) -> PrfReport:
    """Per-label precision/recall/F1 with 0/0 -> 0; macro-F1 over labels
    present in the ground truth (row sum > 0)."""
    counts = matrix.counts
    per_label = {}
    present_f1 = []
    for i, lab in enumerate(matrix.labels):
        tp = float(counts[i, i])
        fp = float(counts[:, i].sum() - counts[i, i])
        fn = float(counts[i].sum() - counts[i, i])
        triple = _prf(tp, fp, fn)
        per_label[lab] = triple
        if counts[i].sum() > 0:
            present_f1.append(triple[2])
    macro = float(np.mean(present_f1)) if present_f1 else 0.0
    return PrfReport(per_label, macro)


def macro_f1(y_true, y_pred) -> float:
    return prf1(confusion(y_true, y_pred)).macro_f1


@dataclass(frozen=True)
class HierarchicalReport:
    per_node: dict
    macro_f1: float
    confusion: ConfusionMatrix


def hierarchical_report(
    y_true, y_pred, taxonomy: Taxonomy, closure: bool = True
) -> HierarchicalReport:
    """Per-node binary metrics over ancestor closures plus the confusion
    matrix grouped by each path's deepest node.

    With closure off, a node only counts where it is the deepest node of
    the path (exact-path scoring). Macro-F1 averages nodes present in the
    ground truth.
    """
    if len(y_true) != len(y_pred):
        raise SchemaError("prediction and truth lists differ in length")
    nodes = taxonomy.nodes
    tp = dict.fromkeys(nodes, 0)
    fp = dict.fromkeys(nodes, 0)
    fn = dict.fromkeys(nodes, 0)
    for t, p in zip(y_true, y_pred):
        taxonomy.index(t)
        taxonomy.index(p)
        t_set = set(taxonomy.ancestors(t)) if closure else {t}
        p_set = set(taxonomy.ancestors(p)) if closure else {p}
        for node in t_set & p_set:
            tp[node] += 1
        for node in p_set - t_set:
            fp[node] += 1
        for node in t_set - p_set:
            fn[node] += 1
    per_node = {}
    present_f1 = []
    for node in nodes:
        triple = _prf(tp[node], fp[node], fn[node])
        per_node[node] = triple
        if tp[node] + fn[node] > 0:
            present_f1.append(triple[2])
    macro = float(np.mean(present_f1)) if present_f1 else 0.0
    grouped = confusion(y_true, y_pred, labels=nodes)
    return HierarchicalReport(per_node, macro, grouped)


@dataclass(frozen=True)
class RankTable:
    methods: tuple
    contexts: tuple
    ranks: np.ndarray = field(repr=False)  # methods x contexts
    mean_ranks: np.ndarray = field(repr=False)
    chi_square: float = 0.0


def friedman_ranks(scores, methods, contexts) -> RankTable:
    """Rank methods within each context, best score = rank 1, ties averaged.

    Emits the Friedman chi-square statistic over the mean ranks.
    """
    scores = np.asarray(scores, dtype=np.float64)
    methods = tuple(methods)
    contexts = tuple(contexts)
    if scores.shape != (len(methods), len(contexts)):
        raise SchemaError(
            f"score table must be {len(methods)}x{len(contexts)}, got {scores.shape}"
        )
    if not np.isfinite(scores).all():
        raise SchemaError("score table has missing cells")
    ranks = np.column_stack([rankdata(-scores[:, j]) for j in range(len(contexts))])
    mean_ranks = ranks.mean(axis=1)
    m, n = len(methods), len(contexts)
    chi = 12.0 * n / (m * (m + 1)) * float(((mean_ranks - (m + 1) / 2.0) ** 2).sum())
    return RankTable(methods, contexts, ranks, mean_ranks, chi)


@dataclass(frozen=True)
class ExperimentResult:
    scenario: dict
    per_label: dict
    macro_f1: float
    confusion: ConfusionMatrix
    wall_time: float
