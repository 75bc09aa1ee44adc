from __future__ import annotations

import csv
import dataclasses
import json
from pathlib import Path

import numpy as np
import pytest
import yaml

from pneumotex.classifiers.base import ScoreVector
from pneumotex.cli import main
from pneumotex.config import (
    DEFAULT_CLASSIFIERS,
    DEFAULT_CRITERIA,
    DEFAULT_DESCRIPTORS,
    ExperimentConfig,
    HierarchyConfig,
    load_config,
)
from pneumotex.dataset import DescriptorConfig
from pneumotex.errors import SchemaError
from pneumotex.fusion import late_fuse
from pneumotex.pipeline import (
    build_rank_table,
    cell_seed,
    cmd_grid,
    feature_sets,
    grid_cells,
    read_results,
    results_path,
    scenario_key,
)
from pneumotex.resampling import METHODS


def minimal_doc(tmp_path, **extra):
    (tmp_path / "manifest.csv").write_text("sample_id,path,label,split\n")
    (tmp_path / "taxonomy.txt").write_text("Normal\n")
    doc = {"seed": 5, "manifest": "manifest.csv", "taxonomy": "taxonomy.txt"}
    doc.update(extra)
    cfg = tmp_path / "exp.yaml"
    cfg.write_text(yaml.safe_dump(doc))
    return cfg


def synthetic_config(descriptors, **overrides):
    kwargs = dict(
        seed=0,
        manifest=Path("m.csv"),
        taxonomy=Path("t.txt"),
        cache_dir=Path("cache"),
        output_dir=Path("out"),
        descriptors=tuple(DescriptorConfig(d) for d in descriptors),
    )
    kwargs.update(overrides)
    return ExperimentConfig(**kwargs)


class TestConfig:
    def test_defaults(self, tmp_path):
        config = load_config(minimal_doc(tmp_path))
        assert config.seed == 5
        assert tuple(dc.descriptor_id for dc in config.descriptors) == DEFAULT_DESCRIPTORS
        assert config.classifiers == DEFAULT_CLASSIFIERS
        assert config.resamplers == METHODS
        assert config.early_fusion == "pairs-and-triples"
        assert config.hierarchy.enabled
        assert config.fusion.criteria == DEFAULT_CRITERIA
        assert config.train_ratio == 0.7
        assert config.focus_label == "COVID-19"

    def test_seed_override_wins(self, tmp_path):
        config = load_config(minimal_doc(tmp_path), seed_override=99)
        assert config.seed == 99

    def test_descriptor_entries(self, tmp_path):
        cfg = minimal_doc(tmp_path, descriptors=[
            "LBP",
            {"id": "BSIF", "params": {"bits": 6}},
            {"id": "LETRIST", "external": "feat.csv"},
        ])
        config = load_config(cfg)
        assert config.descriptors[0].descriptor_id == "LBP"
        assert config.descriptors[1].params == {"bits": 6}
        assert config.descriptors[2].external_path == "feat.csv"

    def test_missing_required_key(self, tmp_path):
        (tmp_path / "manifest.csv").write_text("")
        (tmp_path / "taxonomy.txt").write_text("Normal\n")
        cfg = tmp_path / "exp.yaml"
        cfg.write_text(yaml.safe_dump({"manifest": "manifest.csv", "taxonomy": "taxonomy.txt"}))
        with pytest.raises(SchemaError, match="seed"):
            load_config(cfg)

    def test_missing_referenced_file(self, tmp_path):
        cfg = tmp_path / "exp.yaml"
        cfg.write_text(yaml.safe_dump({"seed": 1, "manifest": "nope.csv", "taxonomy": "t.txt"}))
        with pytest.raises(SchemaError, match="does not exist"):
            load_config(cfg)

    def test_malformed_yaml(self, tmp_path):
        cfg = tmp_path / "exp.yaml"
        cfg.write_text("seed: [unclosed\n")
        with pytest.raises(SchemaError):
            load_config(cfg)

    def test_non_mapping_document(self, tmp_path):
        cfg = tmp_path / "exp.yaml"
        cfg.write_text("- just\n- a list\n")
        with pytest.raises(SchemaError, match="mapping"):
            load_config(cfg)

    def test_unknown_resampler(self, tmp_path):
        with pytest.raises(SchemaError, match="unknown resampling"):
            load_config(minimal_doc(tmp_path, resamplers=["NONE", "ROSE"]))

    def test_bad_select_on(self, tmp_path):
        with pytest.raises(SchemaError, match="select_on"):
            load_config(minimal_doc(tmp_path, fusion={"select_on": "train"}))

    def test_criteria_forms(self, tmp_path):
        cfg = minimal_doc(tmp_path, fusion={"criteria": [
            {"criterion": "top-n", "n": 5},
            {"criterion": "best-per-feature", "sizes": [2, 3]},
        ]})
        config = load_config(cfg)
        assert config.fusion.criteria == (("top-n", (5,)), ("best-per-feature", (2, 3)))

    def test_criteria_validation(self, tmp_path):
        with pytest.raises(SchemaError, match="criterion"):
            load_config(minimal_doc(tmp_path, fusion={"criteria": [{"sizes": [2]}]}))
        with pytest.raises(SchemaError, match="sizes"):
            load_config(minimal_doc(tmp_path, fusion={"criteria": [{"criterion": "top-n"}]}))


class TestGridShape:
    def test_cell_seed_is_stable_and_distinct(self):
        a = cell_seed(7, "LBP|MLP|NONE")
        assert a == cell_seed(7, "LBP|MLP|NONE")
        assert a != cell_seed(8, "LBP|MLP|NONE")
        assert a != cell_seed(7, "LBP|MLP|SMOTE")

    def test_scenario_key_sorts_features(self):
        assert scenario_key(("LPQ", "BSIF"), "MLP", "NONE") == "BSIF+LPQ|MLP|NONE"

    def test_feature_sets_policies(self):
        base = synthetic_config(DEFAULT_DESCRIPTORS, early_fusion="none")
        assert feature_sets(base) == [(d,) for d in DEFAULT_DESCRIPTORS]
        fused = synthetic_config(DEFAULT_DESCRIPTORS)
        sets = feature_sets(fused)
        assert len(sets) == 6 + 15 + 20
        explicit = synthetic_config(("LBP", "EQP"), early_fusion=[("LBP", "EQP")])
        assert feature_sets(explicit) == [("LBP",), ("EQP",), ("EQP", "LBP")]

    def test_small_flat_grid(self):
        config = synthetic_config(
            ("LBP", "EQP"),
            early_fusion="none",
            classifiers=("KNN-3", "MLP"),
            resamplers=("NONE", "SMOTE"),
            hierarchy=HierarchyConfig(enabled=False),
        )
        cells = grid_cells(config)
        assert len(cells) == 8
        assert {c["schema"] for c in cells} == {"individual"}
        assert {c["track"] for c in cells} == {"flat"}

    def test_hier_cells_appended(self):
        config = synthetic_config(
            ("LBP",),
            early_fusion="none",
            classifiers=("KNN-3",),
            resamplers=("NONE",),
        )
        cells = grid_cells(config)
        assert len(cells) == 2
        hier = cells[1]
        assert hier["track"] == "hier"
        assert hier["classifier"] == "PCT"
        assert hier["schema"] == "hier-individual"

    def test_full_study_grid_size(self):
        descriptors = DEFAULT_DESCRIPTORS + ("LETRIST", "INCEPTIONV3")
        config = synthetic_config(descriptors)
        sets = feature_sets(config)
        assert len(sets) == 8 + 28 + 56
        cells = grid_cells(config)
        assert len(cells) == 92 * 6 * 10 + 92 * 10


class TestReadResults:
    def test_last_record_per_key_wins(self, tmp_path):
        path = tmp_path / "results.jsonl"
        rows = [
            {"key": "a", "status": "failed"},
            {"key": "b", "status": "ok"},
            {"key": "a", "status": "ok"},
        ]
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        got = {r["key"]: r for r in read_results(path)}
        assert len(got) == 2
        assert got["a"]["status"] == "ok"

    def test_missing_file_is_empty(self, tmp_path):
        assert read_results(tmp_path / "none.jsonl") == []


class TestRankTable:
    def record(self, features, classifier, resampling, schema, track, macro, focus=0.5):
        return {
            "key": scenario_key(features, classifier, resampling),
            "features": sorted(features),
            "classifier": classifier,
            "resampling": resampling,
            "schema": schema,
            "track": track,
            "status": "ok",
            "metrics": {"macro_f1": macro, "focus_f1": focus},
        }

    def records(self):
        rows = []
        for f, macro in (("LBP", 0.9), ("EQP", 0.7), ("LPQ", 0.8)):
            rows.append(self.record([f], "KNN-3", "NONE", "individual", "flat",
                                    macro, focus=macro))
            rows.append(self.record([f], "DT", "SMOTE", "individual", "flat",
                                    macro - 0.1, focus=macro - 0.1))
        return rows

    def test_feature_ranks(self):
        table = build_rank_table(self.records(), "feature")
        assert table["methods"] == ["EQP", "LBP", "LPQ"]
        assert len(table["contexts"]) == 4
        # only flat-individual sub-rankings exist; best scores 0.9/0.7/0.8
        assert list(table["columns"][:, 0]) == [3.0, 1.0, 2.0]
        assert table["overall"][1] == 1.0

    def test_incomplete_method_skips_subranking(self):
        rows = self.records()
        rows.append(self.record(["BSIF"], "KNN-3", "NONE", "early", "flat", 0.95))
        table = build_rank_table(rows, "feature")
        # BSIF never appears in the individual schema, so no complete
        # sub-ranking contains it and the table drops to None
        assert table is None

    def test_resampler_kind_ignores_none(self):
        table = build_rank_table(self.records(), "resampler")
        assert table["methods"] == ["SMOTE"]

    def test_empty_records(self):
        assert build_rank_table([], "feature") is None


@pytest.fixture(scope="module")
def run_env(small_corpus, tmp_path_factory):
    root = tmp_path_factory.mktemp("pipe")
    doc = {
        "seed": 11,
        "manifest": str(small_corpus["manifest"]),
        "taxonomy": str(small_corpus["taxonomy"]),
        "cache_dir": str(root / "cache"),
        "output_dir": str(root / "out"),
        "descriptors": ["LBP", "EQP"],
        "classifiers": ["KNN-3", "DT"],
        "resamplers": ["NONE", "SMOTE"],
    }
    cfg = root / "exp.yaml"
    cfg.write_text(yaml.safe_dump(doc))
    return {"root": root, "cfg": str(cfg), "config": load_config(cfg)}


@pytest.fixture(scope="module")
def grid_done(run_env):
    assert main(["--config", run_env["cfg"], "extract"]) == 0
    assert main(["--config", run_env["cfg"], "grid"]) == 0
    return read_results(results_path(run_env["config"]))


class TestSmallRun:
    def test_extract_writes_caches_and_reuses_them(self, run_env, capsys):
        assert main(["--config", run_env["cfg"], "extract"]) == 0
        first = capsys.readouterr().out
        caches = list((run_env["root"] / "cache").glob("*.txt"))
        assert len(caches) == 2
        assert main(["--config", run_env["cfg"], "extract"]) == 0
        second = capsys.readouterr().out
        assert "(0 decoded" in second
        assert "26 rows" in first and "26 rows" in second

    def test_split_counts(self, run_env, capsys):
        assert main(["--config", run_env["cfg"], "split"]) == 0
        out = capsys.readouterr().out
        assert "19 train / 7 test" in out
        split_file = run_env["root"] / "out" / "manifest-split.csv"
        assert split_file.exists()
        rows = list(csv.DictReader(split_file.open()))
        assert sum(r["split"] == "test" for r in rows) == 7

    def test_grid_runs_every_cell(self, run_env, grid_done):
        assert len(grid_done) == 3 * 2 * 2 + 3 * 2
        assert all(r["status"] == "ok" for r in grid_done)
        tracks = {r["track"] for r in grid_done}
        assert tracks == {"flat", "hier"}
        for r in grid_done:
            assert 0.0 <= r["metrics"]["macro_f1"] <= 1.0
            assert r["validation"] is not None

    def test_scores_exist_per_cell(self, run_env, grid_done):
        scores_dir = run_env["root"] / "out" / "scores"
        for r in grid_done:
            name = r["key"].replace("|", "_").replace("/", "-") + ".csv"
            path = scores_dir / name
            assert path.exists()
            with path.open() as fh:
                rows = list(csv.reader(fh))
            assert len(rows) == 1 + 7  # header + test rows

    def test_resume_skips_done_cells(self, run_env, grid_done, capsys):
        assert main(["--config", run_env["cfg"], "grid", "--resume"]) == 0
        out = capsys.readouterr().out
        assert "0 run" in out
        assert "18 skipped" in out

    def test_rerun_is_deterministic(self, run_env, grid_done):
        other = run_env["root"] / "out2"
        config2 = dataclasses.replace(run_env["config"], output_dir=other)
        cmd_grid(config2, resume=False)
        first = {r["key"]: r for r in grid_done}
        second = {r["key"]: r for r in read_results(results_path(config2))}
        assert first.keys() == second.keys()
        for key, a in first.items():
            b = dict(second[key])
            a = dict(a)
            a.pop("wall_time"), b.pop("wall_time")
            assert a == b
        for path in sorted((run_env["root"] / "out" / "scores").glob("*.csv")):
            assert path.read_bytes() == (other / "scores" / path.name).read_bytes()

    def test_fuse_appends_late_records(self, run_env, grid_done, capsys):
        assert main(["--config", run_env["cfg"], "fuse"]) == 0
        out = capsys.readouterr().out
        records = read_results(results_path(run_env["config"]))
        late = [r for r in records if r["schema"] in ("late", "hier-late")]
        # flat: top-n-5 (1 set) + best-per-feature 2 and 3 over three feature
        # groups (3 + 1 sets) + best-per-classifier 2 (1 set), all x 3 rules;
        # hier: same minus best-per-classifier (single PCT family)
        assert len([r for r in late if r["schema"] == "late"]) == 18
        assert len([r for r in late if r["schema"] == "hier-late"]) == 15
        assert "fused 33" in out

    def test_fuse_is_idempotent(self, run_env, grid_done, capsys):
        assert main(["--config", run_env["cfg"], "fuse"]) == 0
        out = capsys.readouterr().out
        assert "fused 0" in out

    def test_fused_scores_recompute_from_members(self, run_env, grid_done):
        records = read_results(results_path(run_env["config"]))
        scores_dir = run_env["root"] / "out" / "scores"

        def load(key):
            name = key.replace("|", "_").replace("/", "-") + ".csv"
            with (scores_dir / name).open() as fh:
                rows = list(csv.reader(fh))
            labels = tuple(rows[0][2:])
            data = np.array([[float(v) for v in r[2:]] for r in rows[1:]])
            ids = [r[0] for r in rows[1:]]
            return ids, labels, data

        fused = [r for r in records if r["schema"] == "late" and r["rule"] == "SUM"]
        assert fused
        r = fused[0]
        ids, labels, got = load(r["key"])
        member_data = [load(k) for k in r["constituents"]]
        for mi, (m_ids, m_labels, _) in enumerate(member_data):
            assert m_ids == ids
        for i in range(len(ids)):
            vectors = []
            for _, m_labels, data in member_data:
                row = np.zeros(len(labels))
                for j, lab in enumerate(m_labels):
                    row[labels.index(lab)] = data[i, j]
                vectors.append(ScoreVector(labels, row))
            want = late_fuse(vectors, "SUM").scores
            assert np.allclose(got[i], want, atol=1e-12)

    def test_report_tables(self, run_env, grid_done, capsys):
        assert main(["--config", run_env["cfg"], "report"]) == 0
        report_dir = run_env["root"] / "out" / "report"
        for name in (
            "best_per_schema.csv",
            "rank_features.csv",
            "rank_classifiers.csv",
            "rank_resamplers.csv",
            "per_label_flat.csv",
            "per_label_hier.csv",
        ):
            assert (report_dir / name).exists(), name
        with (report_dir / "rank_features.csv").open() as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["method", "flat-macro_f1", "flat-focus_f1",
                           "hier-macro_f1", "hier-focus_f1", "overall"]
        assert [r[0] for r in rows[1:]] == ["EQP", "LBP"]
        with (report_dir / "per_label_hier.csv").open() as fh:
            hier_rows = list(csv.reader(fh))
        assert len(hier_rows) == 1 + 9  # header + taxonomy nodes

    def test_fuse_before_grid_is_a_usage_error(self, run_env, capsys):
        empty = run_env["root"] / "fresh"
        rc = main(["--config", run_env["cfg"], "--out", str(empty), "fuse"])
        assert rc == 2
        assert "error:" in capsys.readouterr().err

    def test_report_without_results_is_a_usage_error(self, run_env, capsys):
        empty = run_env["root"] / "fresh2"
        rc = main(["--config", run_env["cfg"], "--out", str(empty), "report"])
        assert rc == 2
