from __future__ import annotations

import numpy as np
import pytest

from corpus import LEAF_PATHS
from pneumotex.classifiers.base import ScoreVector
from pneumotex.dataset import Taxonomy
from pneumotex.errors import AlignmentError, ParameterError, SelectionError
from pneumotex.fusion import (
    FUSION_RULES,
    Scenario,
    ScenarioResult,
    classifier_family,
    fuse_node_vectors,
    fused_top_label,
    late_fuse,
    select_scenarios,
)
from pneumotex.hierarchy import NodeVector, decode_path, encode_node_vector

AB = ("A", "B")


def sv(*scores, labels=AB):
    return ScoreVector(labels, np.array(scores, dtype=np.float64))


def result(features, classifier, resampling, **metrics):
    return ScenarioResult(Scenario(tuple(features), classifier, resampling), metrics)


class TestLateFuse:
    def test_rule_registry(self):
        assert FUSION_RULES == ("SUM", "PROD", "VOTE")

    def test_sum_averages_mass(self):
        fused = late_fuse([sv(0.8, 0.2), sv(0.4, 0.6)], "SUM")
        assert np.allclose(fused.scores, [0.6, 0.4], atol=1e-12)

    def test_vote_counts_top_labels(self):
        fused = late_fuse([sv(0.9, 0.1), sv(0.7, 0.3), sv(0.2, 0.8)], "VOTE")
        assert np.allclose(fused.scores, [2 / 3, 1 / 3], atol=1e-12)

    def test_prod_rescales(self):
        fused = late_fuse([sv(0.8, 0.2), sv(0.5, 0.5)], "PROD")
        assert np.allclose(fused.scores, [0.8, 0.2], atol=1e-12)

    def test_prod_floors_hard_zeros(self):
        fused = late_fuse([sv(1.0, 0.0), sv(0.0, 1.0)], "PROD")
        assert np.allclose(fused.scores, [0.5, 0.5], atol=1e-12)

    def test_lowercase_rule_accepted(self):
        fused = late_fuse([sv(0.8, 0.2), sv(0.4, 0.6)], "sum")
        assert np.allclose(fused.scores, [0.6, 0.4], atol=1e-12)

    def test_label_order_must_agree(self):
        with pytest.raises(AlignmentError):
            late_fuse([sv(0.8, 0.2), sv(0.4, 0.6, labels=("B", "A"))], "SUM")

    def test_needs_two_vectors(self):
        with pytest.raises(ParameterError):
            late_fuse([sv(1.0, 0.0)], "SUM")

    def test_unknown_rule(self):
        with pytest.raises(ParameterError):
            late_fuse([sv(0.5, 0.5), sv(0.5, 0.5)], "MAX")

    def test_input_order_never_matters(self):
        rng = np.random.default_rng(0)
        raw = rng.random((4, 3))
        vecs = [ScoreVector(("a", "b", "c"), r / r.sum()) for r in raw]
        for rule in FUSION_RULES:
            base = late_fuse(vecs, rule)
            flipped = late_fuse(vecs[::-1], rule)
            assert np.allclose(base.scores, flipped.scores, atol=1e-12)

    def test_sum_argmax_tracks_total_mass(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            raw = rng.random((3, 4))
            norm = raw / raw.sum(axis=1, keepdims=True)
            vecs = [ScoreVector(("a", "b", "c", "d"), r) for r in norm]
            fused = late_fuse(vecs, "SUM")
            assert fused.top_label() == ["a", "b", "c", "d"][int(norm.sum(axis=0).argmax())]


class TestFusedTopLabel:
    def test_sum_top(self):
        assert fused_top_label([sv(0.8, 0.2), sv(0.4, 0.6)], "SUM") == "A"

    def test_vote_tie_breaks_on_summed_scores(self):
        assert fused_top_label([sv(0.9, 0.1), sv(0.2, 0.8)], "VOTE") == "A"
        assert fused_top_label([sv(0.6, 0.4), sv(0.1, 0.9)], "VOTE") == "B"

    def test_vote_double_tie_breaks_on_name(self):
        assert fused_top_label([sv(0.9, 0.1), sv(0.1, 0.9)], "VOTE") == "A"


class TestFuseNodeVectors:
    def test_sum_is_nodewise_mean(self, rydls_taxonomy):
        a = encode_node_vector("Normal", rydls_taxonomy)
        b = encode_node_vector("Pneumonia", rydls_taxonomy)
        fused = fuse_node_vectors([a, b], "SUM")
        assert fused.score("Normal") == 0.5
        assert fused.score("Pneumonia") == 0.5
        assert fused.score("Pneumonia/Acellular") == 0.0

    def test_prod_keeps_shared_path(self, rydls_taxonomy):
        covid = "Pneumonia/Acellular/Viral/Coronavirus/COVID-19"
        sars = "Pneumonia/Acellular/Viral/Coronavirus/SARS"
        fused = fuse_node_vectors(
            [encode_node_vector(covid, rydls_taxonomy),
             encode_node_vector(sars, rydls_taxonomy)],
            "PROD",
        )
        assert fused.score("Pneumonia/Acellular/Viral/Coronavirus") == 1.0
        assert fused.score(covid) <= 1e-10
        assert decode_path(fused) == "Pneumonia/Acellular/Viral/Coronavirus"

    def test_vote_averages_decoded_closures(self, rydls_taxonomy):
        a = encode_node_vector("Normal", rydls_taxonomy)
        b = encode_node_vector("Pneumonia/Celullar", rydls_taxonomy)
        fused = fuse_node_vectors([a, b], "VOTE")
        want = (a.values + b.values) / 2.0
        assert np.allclose(fused.values, want, atol=1e-12)

    def test_output_always_consistent(self, rydls_taxonomy):
        rng = np.random.default_rng(2)
        encodes = np.stack(
            [encode_node_vector(p, rydls_taxonomy).values for p in LEAF_PATHS]
        )
        for rule in FUSION_RULES:
            for _ in range(10):
                w = rng.dirichlet(np.ones(len(LEAF_PATHS)), size=2)
                vecs = [NodeVector(rydls_taxonomy, w[i] @ encodes) for i in range(2)]
                fused = fuse_node_vectors(vecs, rule)
                for node in rydls_taxonomy.nodes:
                    parent = rydls_taxonomy.parent(node)
                    if parent is not None:
                        assert fused.score(node) <= fused.score(parent) + 1e-12

    def test_taxonomy_must_agree(self, rydls_taxonomy):
        other = Taxonomy(["X", "Y"])
        vx = NodeVector(other, np.array([1.0, 0.0]))
        va = encode_node_vector("Normal", rydls_taxonomy)
        with pytest.raises(AlignmentError):
            fuse_node_vectors([va, vx], "SUM")

    def test_needs_two_vectors(self, rydls_taxonomy):
        with pytest.raises(ParameterError):
            fuse_node_vectors([encode_node_vector("Normal", rydls_taxonomy)], "SUM")


class TestScenario:
    def test_features_sorted_and_key(self):
        s = Scenario(("LPQ", "BSIF"), "MLP", "RENN")
        assert s.features == ("BSIF", "LPQ")
        assert s.key == "BSIF+LPQ|MLP|RENN"

    def test_classifier_family(self):
        assert classifier_family("KNN-3") == "KNN"
        assert classifier_family("KNN-5") == "KNN"
        assert classifier_family("MLP") == "MLP"


class TestSelectScenarios:
    def seven(self):
        rows = [
            result(["LBP"], "MLP", "NONE", macro_f1=0.90),
            result(["EQP"], "MLP", "NONE", macro_f1=0.80),
            result(["LPQ"], "SVM", "NONE", macro_f1=0.85),
            result(["BSIF"], "KNN-3", "NONE", macro_f1=0.70),
            result(["OBIF"], "KNN-5", "NONE", macro_f1=0.75),
            result(["LDN"], "DT", "NONE", macro_f1=0.65),
            result(["LBP", "EQP"], "RF", "NONE", macro_f1=0.88),
        ]
        return rows

    def test_top_n_takes_the_best_five(self):
        sets = select_scenarios(self.seven(), "top-n", 5)
        assert len(sets) == 1
        chosen = sets[0]
        assert len(chosen) == 5
        assert chosen[0].key == "LBP|MLP|NONE"
        assert {s.key for s in chosen} == {
            "LBP|MLP|NONE", "EQP+LBP|RF|NONE", "LPQ|SVM|NONE",
            "EQP|MLP|NONE", "OBIF|KNN-5|NONE",
        }

    def test_best_per_feature_pairs(self):
        rows = self.seven() + [result(["LBP"], "SVM", "NONE", macro_f1=0.95)]
        sets = select_scenarios(rows, "best-per-feature", 2)
        # 7 distinct feature sets -> C(7, 2) pairs
        assert len(sets) == 21
        lbp_best = [s for combo in sets for s in combo if s.features == ("LBP",)]
        assert all(s.classifier == "SVM" for s in lbp_best)

    def test_eight_groups_give_28_pairs(self):
        rows = [
            result([f], "MLP", "NONE", macro_f1=0.5 + i / 100)
            for i, f in enumerate("ABCDEFGH")
        ]
        assert len(select_scenarios(rows, "best-per-feature", 2)) == 28

    def test_best_per_classifier_merges_knn_variants(self):
        rows = [
            result(["LBP"], "KNN-3", "NONE", macro_f1=0.7),
            result(["EQP"], "KNN-5", "NONE", macro_f1=0.8),
            result(["LPQ"], "MLP", "NONE", macro_f1=0.9),
        ]
        sets = select_scenarios(rows, "best-per-classifier", 2)
        assert len(sets) == 1
        assert {s.classifier for s in sets[0]} == {"KNN-5", "MLP"}

    def test_metric_ties_break_on_key(self):
        rows = [
            result(["LBP"], "MLP", "NONE", macro_f1=0.8),
            result(["EQP"], "MLP", "NONE", macro_f1=0.8),
        ]
        sets = select_scenarios(rows, "top-n", 1)
        assert sets[0][0].key == "EQP|MLP|NONE"

    def test_error_paths(self):
        rows = self.seven()
        with pytest.raises(SelectionError):
            select_scenarios([], "top-n", 1)
        with pytest.raises(ParameterError):
            select_scenarios(rows, "top-n", 0)
        with pytest.raises(SelectionError):
            select_scenarios(rows, "top-n", 8)
        with pytest.raises(ParameterError):
            select_scenarios(rows, "bottom-n", 1)
        with pytest.raises(SelectionError):
            select_scenarios(rows, "best-per-feature", 8)
        with pytest.raises(SelectionError):
            select_scenarios(rows, "top-n", 2, metric="accuracy")
