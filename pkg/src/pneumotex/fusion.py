"""Late fusion of score vectors and scenario-selection criteria."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .classifiers.base import ScoreVector
from .errors import AlignmentError, ParameterError, SelectionError
from .hierarchy import NodeVector, encode_node_vector

log = logging.getLogger(__name__)

FUSION_RULES = ("SUM", "PROD", "VOTE")
PROD_FLOOR = 1e-12


def _check_rule(rule: str) -> str:
    rule = rule.upper()
    if rule not in FUSION_RULES:
        raise ParameterError(f"unknown fusion rule {rule!r}")
    return rule


def late_fuse(vectors, rule: str) -> ScoreVector:
    """SUM: renormalized elementwise sum. PROD: renormalized elementwise
    product with a 1e-12 floor (an all-zero product falls back to uniform,
    logged). VOTE: fraction of inputs whose top label is each label."""
    rule = _check_rule(rule)
    if len(vectors) < 2:
        raise ParameterError("need at least two score vectors")
    labels = vectors[0].labels
    for v in vectors[1:]:
        if v.labels != labels:
            raise AlignmentError("score vectors disagree on label order")
    arr = np.stack([v.scores for v in vectors])
    if rule == "SUM":
        total = arr.sum(axis=0)
        values = total / total.sum()
    elif rule == "PROD":
        prod = np.maximum(arr, PROD_FLOOR).prod(axis=0)
        mass = prod.sum()
        if mass <= 0.0:
            log.warning("all-zero product over %d labels; falling back to uniform",
                        len(labels))
            values = np.full(len(labels), 1.0 / len(labels))
        else:
            values = prod / mass
    else:
        votes = np.zeros(len(labels))
        for v in vectors:
            votes[labels.index(v.top_label())] += 1.0
        values = votes / len(vectors)
    return ScoreVector(labels, values)


def fused_top_label(vectors, rule: str) -> str:
    """Predicted label of the fused vector.

    VOTE ties cascade: most votes, then highest summed input score, then
    label name."""
    rule = _check_rule(rule)
    fused = late_fuse(vectors, rule)
    if rule != "VOTE":
        return fused.top_label()
    labels = fused.labels
    best = fused.scores.max()
    tied = [lab for lab, s in zip(labels, fused.scores) if s == best]
    if len(tied) == 1:
        return tied[0]
    sums = {lab: sum(v.score_of(lab) for v in vectors) for lab in tied}
    top = max(sums.values())
    return min(lab for lab, s in sums.items() if s == top)


def fuse_node_vectors(vectors, rule: str) -> NodeVector:
    """Per-node late fusion of hierarchical score vectors.

    SUM averages node scores, PROD multiplies floored scores, VOTE averages
    the ancestor closures of each input's decoded path. Consistency is then
    restored by a downward min over each parent-child edge."""
    from .hierarchy import decode_path

    rule = _check_rule(rule)
    if len(vectors) < 2:
        raise ParameterError("need at least two node vectors")
    taxonomy = vectors[0].taxonomy
    for v in vectors[1:]:
        if v.taxonomy.nodes != taxonomy.nodes:
            raise AlignmentError("node vectors disagree on the taxonomy")
    arr = np.stack([v.values for v in vectors])
    if rule == "SUM":
        values = arr.mean(axis=0)
    elif rule == "PROD":
        values = np.maximum(arr, PROD_FLOOR).prod(axis=0)
    else:
        closures = np.stack(
            [encode_node_vector(decode_path(v), taxonomy).values for v in vectors]
        )
        values = closures.mean(axis=0)
    for node in taxonomy.nodes:
        parent = taxonomy.parent(node)
        if parent is not None:
            i, j = taxonomy.index(node), taxonomy.index(parent)
            values[i] = min(values[i], values[j])
    return NodeVector(taxonomy, np.clip(values, 0.0, 1.0))


@dataclass(frozen=True, order=True)
class Scenario:
    """One experiment cell: a feature set, a classifier, a resampler."""

    features: tuple[str, ...]
    classifier: str
    resampling: str

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(sorted(self.features)))

    @property
    def key(self) -> str:
        return "+".join(self.features) + "|" + self.classifier + "|" + self.resampling


@dataclass(frozen=True)
class ScenarioResult:
    scenario: Scenario
    metrics: dict = field(hash=False)


def classifier_family(classifier_id: str) -> str:
    """KNN-3 and KNN-5 belong to the one KNN family."""
    return classifier_id.split("-")[0]


def _metric_value(result: ScenarioResult, metric: str) -> float:
    if metric not in result.metrics:
        raise SelectionError(f"result {result.scenario.key} lacks metric {metric!r}")
    return float(result.metrics[metric])


def _best(results, metric: str) -> ScenarioResult:
    return min(results, key=lambda r: (-_metric_value(r, metric), r.scenario.key))


def select_scenarios(results, criterion: str, size: int, metric: str = "macro_f1"):
    """Scenario sets to fuse, as lists of Scenario tuples.

    top-n: one set holding the size best results. best-per-feature: the
    best result per feature set, then every size-wide combination of those
    bests. best-per-classifier: the same grouped by classifier family.
    Ordering is deterministic: metric descending, then scenario key."""
    results = list(results)
    if not results:
        raise SelectionError("no results to select from")
    if size < 1:
        raise ParameterError("size must be >= 1")
    if criterion == "top-n":
        if size > len(results):
            raise SelectionError(f"top-n wants {size} of {len(results)} results")
        ranked = sorted(results, key=lambda r: (-_metric_value(r, metric), r.scenario.key))
        return [tuple(r.scenario for r in ranked[:size])]
    if criterion == "best-per-feature":
        group_of = lambda r: r.scenario.features
    elif criterion == "best-per-classifier":
        group_of = lambda r: classifier_family(r.scenario.classifier)
    else:
        raise ParameterError(f"unknown selection criterion {criterion!r}")
    groups: dict = {}
    for r in results:
        groups.setdefault(group_of(r), []).append(r)
    if size > len(groups):
        raise SelectionError(f"{criterion} wants sets of {size} from {len(groups)} groups")
    bests = [_best(groups[g], metric) for g in sorted(groups)]
    return [
        tuple(r.scenario for r in combo)
        for combo in itertools.combinations(bests, size)
    ]
