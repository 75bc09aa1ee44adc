"""Experiment grid over feature sets, classifiers and resamplers.

Each cell trains one scenario, persists per-sample scores, and records flat
or hierarchical metrics plus an internal validation estimate used for late-
fusion selection. Results append to results.jsonl; a final sorted rewrite
keeps the file canonical so identical runs match byte for byte apart from
wall times.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .classifiers import fit_dt, fit_knn, fit_mlp, fit_rf, fit_svm
from .classifiers.base import ScoreVector
from .config import ExperimentConfig
from .dataset import (
    FeatureMatrix,
    Taxonomy,
    early_fuse,
    enumerate_fusion_sets,
    extract_features,
    parse_manifest,
    parse_taxonomy,
    stratified_holdout,
    write_manifest,
)
from .errors import (
    AlignmentError,
    ParameterError,
    PneumotexError,
    SelectionError,
    UsageError,
)
from .evaluation import confusion, hierarchical_report, friedman_ranks, prf1
from .fusion import (
    Scenario,
    ScenarioResult,
    classifier_family,
    fuse_node_vectors,
    fused_top_label,
    late_fuse,
    select_scenarios,
)
from .hierarchy import NodeVector, PctParams, decode_path, fit_pct_forest
from .resampling import resample_multiclass

log = logging.getLogger(__name__)

HIER_CLASSIFIER = "PCT"
_VAL_TAG = 77
FLAT_SCHEMAS = ("individual", "early", "late")


def cell_seed(global_seed: int, key: str) -> int:
    digest = hashlib.sha256(f"{global_seed}:{key}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def scenario_key(features, classifier: str, resampling: str) -> str:
    return "+".join(sorted(features)) + "|" + classifier + "|" + resampling


def _scores_file(scores_dir: Path, key: str) -> Path:
    return scores_dir / (key.replace("|", "_").replace("/", "-") + ".csv")


def _write_scores(path: Path, sample_ids, truths, labels, scores: np.ndarray) -> None:
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id", "true", *labels])
        for sid, truth, row in zip(sample_ids, truths, scores):
            writer.writerow([sid, truth, *(format(v, ".17g") for v in row)])
    os.replace(tmp, path)


def _read_scores(path: Path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        labels = tuple(header[2:])
        ids, truths, rows = [], [], []
        for rec in reader:
            ids.append(rec[0])
            truths.append(rec[1])
            rows.append([float(v) for v in rec[2:]])
    return ids, truths, labels, np.asarray(rows, dtype=np.float64)


def _fit_flat(classifier_id: str, X, y, seed: int):
    if classifier_id.startswith("KNN-"):
        return fit_knn(X, y, k=int(classifier_id.split("-")[1]))
    if classifier_id == "DT":
        return fit_dt(X, y)
    if classifier_id == "RF":
        return fit_rf(X, y, seed=seed)
    if classifier_id == "SVM":
        return fit_svm(X, y, seed=seed)
    if classifier_id == "MLP":
        return fit_mlp(X, y, seed=seed)
    raise ParameterError(f"unknown classifier {classifier_id!r}")


def _top_labels(labels, scores: np.ndarray) -> list[str]:
    out = []
    for row in scores:
        best = row.max()
        out.append(min(lab for lab, s in zip(labels, row) if s == best))
    return out


def _focus_node(taxonomy: Taxonomy, focus_label: str) -> str | None:
    hits = [p for p in taxonomy.nodes if taxonomy.leaf_name(p) == focus_label]
    return hits[0] if hits else None


def _flat_metrics(y_true, y_pred, focus_label: str) -> dict:
    matrix = confusion(y_true, y_pred)
    report = prf1(matrix)
    focus = report.per_label.get(focus_label, (0.0, 0.0, 0.0))[2]
    return {
        "macro_f1": report.macro_f1,
        "focus_f1": focus,
        "per_label": {lab: list(t) for lab, t in report.per_label.items()},
        "confusion": {"labels": list(matrix.labels), "counts": matrix.counts.tolist()},
    }


def _hier_metrics(y_true, y_pred, taxonomy: Taxonomy, focus_label: str) -> dict:
    report = hierarchical_report(y_true, y_pred, taxonomy)
    node = _focus_node(taxonomy, focus_label)
    focus = report.per_node[node][2] if node else 0.0
    return {
        "macro_f1": report.macro_f1,
        "focus_f1": focus,
        "per_label": {n: list(t) for n, t in report.per_node.items()},
        "confusion": {
            "labels": list(report.confusion.labels),
            "counts": report.confusion.counts.tolist(),
        },
    }


def _pct_params(config: ExperimentConfig) -> PctParams:
    h = config.hierarchy
    return PctParams(
        f_test_levels=tuple(h.f_test_levels),
        ensemble_iterations=h.ensemble_iterations,
        min_leaf=h.min_leaf,
        depth_weight=h.depth_weight,
    )


def _predict_cell(matrix: FeatureMatrix, cell: dict, taxonomy, config, seed: int):
    """Resample, fit, and score the cell's test rows.

    Returns (test sample_ids, truths, score labels, score rows, metrics).
    """
    resampled = resample_multiclass(
        matrix, cell["resampling"], seed=seed, label_mode=config.label_mode
    )
    train_idx = resampled.indices("train")
    test_idx = resampled.indices("test")
    if test_idx.size == 0:
        raise UsageError("cell has no test rows")
    X_train, X_test = resampled.X[train_idx], resampled.X[test_idx]
    test_ids = [resampled.sample_ids[i] for i in test_idx]
    if cell["track"] == "flat":
        flat = resampled.flat_labels()
        y_train = [flat[i] for i in train_idx]
        y_true = [flat[i] for i in test_idx]
        model = _fit_flat(cell["classifier"], X_train, y_train, seed)
        scores = model.predict_proba(X_test)
        y_pred = _top_labels(model.labels_, scores)
        metrics = _flat_metrics(y_true, y_pred, config.focus_label)
        return test_ids, y_true, tuple(model.labels_), scores, metrics
    y_train = [resampled.labels[i] for i in train_idx]
    y_true = [resampled.labels[i] for i in test_idx]
    forest = fit_pct_forest(X_train, y_train, taxonomy, _pct_params(config), seed=seed)
    scores = forest.predict_node_scores(X_test)
    y_pred = forest.predict_paths(X_test)
    metrics = _hier_metrics(y_true, y_pred, taxonomy, config.focus_label)
    return test_ids, y_true, taxonomy.nodes, scores, metrics


def _validation_matrix(matrix: FeatureMatrix, seed: int) -> FeatureMatrix | None:
    """Re-split the train rows 80/20 per label for internal validation."""
    train_idx = matrix.indices("train")
    if train_idx.size < 5:
        return None
    sub = matrix.subset(train_idx)
    flat = sub.flat_labels()
    rng = np.random.default_rng([seed, _VAL_TAG])
    held = []
    for label in sorted(set(flat)):
        rows = [i for i, lab in enumerate(flat) if lab == label]
        n_val = len(rows) // 5
        if n_val:
            picked = rng.permutation(len(rows))[:n_val]
            held.extend(rows[i] for i in picked)
    if not held:
        return None
    for i in held:
        sub.splits[i] = "test"
    remaining = [flat[i] for i in sub.indices("train")]
    if len(set(remaining)) < 2:
        return None
    return sub


def run_cell(
    matrix: FeatureMatrix, cell: dict, taxonomy: Taxonomy, config: ExperimentConfig
) -> dict:
    t0 = time.perf_counter()
    seed = cell_seed(config.seed, cell["key"])
    test_ids, truths, labels, scores, metrics = _predict_cell(
        matrix, cell, taxonomy, config, seed
    )
    validation = None
    val_matrix = _validation_matrix(matrix, seed)
    if val_matrix is not None:
        try:
            _, _, _, _, val_metrics = _predict_cell(
                val_matrix, cell, taxonomy, config, seed
            )
            validation = {
                "macro_f1": val_metrics["macro_f1"],
                "focus_f1": val_metrics["focus_f1"],
            }
        except PneumotexError as exc:
            log.warning("validation pass failed for %s: %s", cell["key"], exc)
    scores_dir = Path(config.output_dir) / "scores"
    scores_dir.mkdir(parents=True, exist_ok=True)
    _write_scores(_scores_file(scores_dir, cell["key"]), test_ids, truths, labels, scores)
    return {
        "key": cell["key"],
        "track": cell["track"],
        "schema": cell["schema"],
        "features": sorted(cell["features"]),
        "classifier": cell["classifier"],
        "resampling": cell["resampling"],
        "metrics": metrics,
        "validation": validation,
        "status": "ok",
        "error": None,
        "wall_time": time.perf_counter() - t0,
    }


def load_samples(config: ExperimentConfig):
    """Manifest rows with deterministic split assignment where missing."""
    taxonomy = parse_taxonomy(config.taxonomy)
    samples = parse_manifest(config.manifest, taxonomy)
    if any(s.split == "unassigned" for s in samples):
        samples = stratified_holdout(samples, ratio=config.train_ratio, seed=config.seed)
    return taxonomy, samples


def feature_sets(config: ExperimentConfig) -> list[tuple[str, ...]]:
    singles = [(dc.descriptor_id,) for dc in config.descriptors]
    policy = config.early_fusion
    if policy == "none":
        return singles
    if policy == "pairs-and-triples":
        if len(singles) < 2:
            return singles
        return singles + enumerate_fusion_sets([dc.descriptor_id for dc in config.descriptors])
    if isinstance(policy, (list, tuple)):
        return singles + [tuple(sorted(fs)) for fs in policy]
    raise ParameterError(f"unknown early_fusion policy {policy!r}")


def grid_cells(config: ExperimentConfig) -> list[dict]:
    cells = []
    for fset in feature_sets(config):
        schema = "individual" if len(fset) == 1 else "early"
        for classifier in config.classifiers:
            for method in config.resamplers:
                cells.append({
                    "key": scenario_key(fset, classifier, method),
                    "features": fset,
                    "classifier": classifier,
                    "resampling": method,
                    "track": "flat",
                    "schema": schema,
                })
        if config.hierarchy.enabled:
            for method in config.resamplers:
                cells.append({
                    "key": scenario_key(fset, HIER_CLASSIFIER, method),
                    "features": fset,
                    "classifier": HIER_CLASSIFIER,
                    "resampling": method,
                    "track": "hier",
                    "schema": "hier-" + schema,
                })
    return cells


def results_path(config: ExperimentConfig) -> Path:
    return Path(config.output_dir) / "results.jsonl"


def read_results(path) -> list[dict]:
    """Last record per key wins, so retried cells supersede failures."""
    path = Path(path)
    if not path.exists():
        return []
    by_key: dict[str, dict] = {}
    for line in path.read_text().splitlines():
        if line.strip():
            record = json.loads(line)
            by_key[record["key"]] = record
    return list(by_key.values())


def _append_result(path: Path, record: dict) -> None:
    with open(path, "a") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


def _rewrite_sorted(path: Path, records: list[dict]) -> None:
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w") as fh:
        for record in sorted(records, key=lambda r: r["key"]):
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    os.replace(tmp, path)


def _matrices_for(samples, config: ExperimentConfig) -> dict[str, FeatureMatrix]:
    out = {}
    for dc in config.descriptors:
        out[dc.descriptor_id] = extract_features(samples, dc, config.cache_dir)
    return out


def _fused_matrix(singles: dict[str, FeatureMatrix], fset) -> FeatureMatrix:
    if len(fset) == 1:
        return singles[fset[0]]
    return early_fuse([singles[fid] for fid in sorted(fset)])


def cmd_extract(config: ExperimentConfig) -> list[dict]:
    """Warm the descriptor caches; returns per-descriptor summaries."""
    _, samples = load_samples(config)
    summary = []
    for dc in config.descriptors:
        stats: dict = {}
        t0 = time.perf_counter()
        matrix = extract_features(samples, dc, config.cache_dir, stats=stats)
        summary.append({
            "descriptor": dc.descriptor_id,
            "dim": matrix.dim,
            "rows": len(matrix),
            "decoded": stats.get("decoded", 0),
            "cached": len(matrix) - stats.get("decoded", 0),
            "seconds": time.perf_counter() - t0,
        })
    return summary


def cmd_split(config: ExperimentConfig) -> dict:
    """Materialize the stratified split next to the other outputs."""
    _, samples = load_samples(config)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / "manifest-split.csv"
    write_manifest(target, samples)
    counts = {"train": 0, "test": 0}
    for s in samples:
        counts[s.split] = counts.get(s.split, 0) + 1
    counts["path"] = str(target)
    return counts


def cmd_grid(config: ExperimentConfig, resume: bool = True, workers: int | None = None) -> dict:
    """Run every pending grid cell; cells fail individually, the grid continues.

    Returns {"total", "run", "skipped", "failures"}.
    """
    taxonomy, samples = load_samples(config)
    singles = _matrices_for(samples, config)
    cells = grid_cells(config)
    out = results_path(config)
    out.parent.mkdir(parents=True, exist_ok=True)
    existing = read_results(out) if resume else []
    if not resume and out.exists():
        out.unlink()
    done = {r["key"] for r in existing if r.get("status") == "ok"}
    pending = [c for c in cells if c["key"] not in done]
    log.info("grid: %d cells, %d already done, %d to run",
             len(cells), len(cells) - len(pending), len(pending))

    lock = threading.Lock()
    failures = 0

    def _run_one(cell, matrix):
        nonlocal failures
        try:
            record = run_cell(matrix, cell, taxonomy, config)
        except Exception as exc:
            log.warning("cell %s failed: %s", cell["key"], exc)
            record = {
                "key": cell["key"],
                "track": cell["track"],
                "schema": cell["schema"],
                "features": sorted(cell["features"]),
                "classifier": cell["classifier"],
                "resampling": cell["resampling"],
                "metrics": None,
                "validation": None,
                "status": "failed",
                "error": f"{type(exc).__name__}: {exc}",
                "wall_time": None,
            }
        with lock:
            if record["status"] == "failed":
                failures += 1
            _append_result(out, record)

    n_workers = workers if workers is not None else config.workers
    by_fset: dict[tuple, list[dict]] = {}
    for cell in pending:
        by_fset.setdefault(tuple(sorted(cell["features"])), []).append(cell)
    for fset in sorted(by_fset):
        matrix = _fused_matrix(singles, fset)
        batch = by_fset[fset]
        if n_workers > 1:
            with ThreadPoolExecutor(max_workers=n_workers) as pool:
                list(pool.map(lambda c: _run_one(c, matrix), batch))
        else:
            for cell in batch:
                _run_one(cell, matrix)
    final = read_results(out)
    _rewrite_sorted(out, final)
    return {
        "total": len(cells),
        "run": len(pending),
        "skipped": len(cells) - len(pending),
        "failures": failures,
    }


def _embed_scores(labels_from, rows: np.ndarray, labels_to) -> np.ndarray:
    if tuple(labels_from) == tuple(labels_to):
        return rows
    out = np.zeros((rows.shape[0], len(labels_to)))
    for j, lab in enumerate(labels_from):
        if lab in labels_to:
            out[:, labels_to.index(lab)] = rows[:, j]
    return out


def _fuse_flat_set(members: list[dict], rule: str, scores_dir: Path, focus: str):
    loaded = [_read_scores(_scores_file(scores_dir, m["key"])) for m in members]
    ids, truths = loaded[0][0], loaded[0][1]
    for other in loaded[1:]:
        if other[0] != ids:
            raise AlignmentError("fusion members score different test samples")
    labels = tuple(sorted({lab for _, _, labs, _ in loaded for lab in labs}))
    aligned = [_embed_scores(labs, rows, list(labels)) for _, _, labs, rows in loaded]
    fused_rows = np.empty((len(ids), len(labels)))
    y_pred = []
    for i in range(len(ids)):
        vectors = [ScoreVector(labels, a[i]) for a in aligned]
        fused_rows[i] = late_fuse(vectors, rule).scores
        y_pred.append(fused_top_label(vectors, rule))
    return ids, truths, labels, fused_rows, _flat_metrics(truths, y_pred, focus)


def _fuse_hier_set(members: list[dict], rule: str, scores_dir: Path,
                   taxonomy: Taxonomy, focus: str):
    loaded = [_read_scores(_scores_file(scores_dir, m["key"])) for m in members]
    ids, truths = loaded[0][0], loaded[0][1]
    for other in loaded[1:]:
        if other[0] != ids:
            raise AlignmentError("fusion members score different test samples")
        if other[2] != taxonomy.nodes:
            raise AlignmentError("fusion members disagree on the taxonomy")
    fused_rows = np.empty((len(ids), len(taxonomy)))
    y_pred = []
    for i in range(len(ids)):
        vectors = [NodeVector(taxonomy, np.clip(rows[i], 0.0, 1.0))
                   for _, _, _, rows in loaded]
        fused = fuse_node_vectors(vectors, rule)
        fused_rows[i] = fused.values
        y_pred.append(decode_path(fused))
    return ids, truths, taxonomy.nodes, fused_rows, _hier_metrics(truths, y_pred, taxonomy, focus)


def _selection_results(records: list[dict], select_on: str) -> list[ScenarioResult]:
    out = []
    for r in records:
        metrics = r["metrics"]
        if select_on == "validation" and r.get("validation"):
            metrics = r["validation"]
        out.append(ScenarioResult(
            Scenario(tuple(r["features"]), r["classifier"], r["resampling"]),
            {"macro_f1": metrics["macro_f1"], "focus_f1": metrics["focus_f1"]},
        ))
    return out


def cmd_fuse(config: ExperimentConfig, select_on: str | None = None,
             focus_label: str | None = None) -> dict:
    """Late-fuse selected scenario sets; appends fused results to the index."""
    taxonomy, _ = load_samples(config)
    focus = focus_label or config.focus_label
    select_on = select_on or config.fusion.select_on
    out = results_path(config)
    records = read_results(out)
    if not records:
        raise UsageError("no grid results to fuse; run the grid first")
    scores_dir = Path(config.output_dir) / "scores"
    fused_count = 0
    all_records = list(records)
    for track in ("flat", "hier"):
        base = [r for r in records
                if r.get("status") == "ok"
                and r["track"] == track
                and r["schema"] in ("individual", "early", "hier-individual", "hier-early")]
        if len(base) < 2:
            continue
        by_key = {r["key"]: r for r in base}
        selectable = _selection_results(base, select_on)
        for criterion, sizes in config.fusion.criteria:
            for size in sizes:
                try:
                    sets = select_scenarios(selectable, criterion, size)
                except SelectionError as exc:
                    log.info("selection %s size %d skipped: %s", criterion, size, exc)
                    continue
                for chosen in sets:
                    members = [by_key[s.key] for s in chosen]
                    for rule in config.fusion.rules:
                        digest = hashlib.sha256(
                            ";".join(m["key"] for m in members).encode()
                        ).hexdigest()[:8]
                        key = f"LATE|{track}|{rule}|{criterion}-{size}|{digest}"
                        if any(r["key"] == key for r in all_records):
                            continue
                        t0 = time.perf_counter()
                        try:
                            if track == "flat":
                                ids, truths, labels, rows, metrics = _fuse_flat_set(
                                    members, rule, scores_dir, focus)
                            else:
                                ids, truths, labels, rows, metrics = _fuse_hier_set(
                                    members, rule, scores_dir, taxonomy, focus)
                        except PneumotexError as exc:
                            log.warning("fusion %s failed: %s", key, exc)
                            continue
                        _write_scores(_scores_file(scores_dir, key),
                                      ids, truths, labels, rows)
                        record = {
                            "key": key,
                            "track": track,
                            "schema": "late" if track == "flat" else "hier-late",
                            "features": sorted({f for m in members for f in m["features"]}),
                            "classifier": "+".join(sorted({m["classifier"] for m in members})),
                            "resampling": "+".join(sorted({m["resampling"] for m in members})),
                            "rule": rule,
                            "criterion": f"{criterion}-{size}",
                            "constituents": [m["key"] for m in members],
                            "metrics": metrics,
                            "validation": None,
                            "status": "ok",
                            "error": None,
                            "wall_time": time.perf_counter() - t0,
                        }
                        all_records.append(record)
                        _append_result(out, record)
                        fused_count += 1
    _rewrite_sorted(out, read_results(out))
    return {"fused": fused_count}


RANK_CONTEXTS = (
    ("flat", "macro_f1"),
    ("flat", "focus_f1"),
    ("hier", "macro_f1"),
    ("hier", "focus_f1"),
)
CLASSIFIER_CONTEXTS = (("flat", "macro_f1"), ("flat", "focus_f1"))


def _membership(record: dict, kind: str) -> set[str]:
    if kind == "feature":
        return set(record["features"])
    if kind == "classifier":
        if record["track"] != "flat":
            return set()
        return {classifier_family(c) for c in record["classifier"].split("+")}
    if kind == "resampler":
        return {m for m in record["resampling"].split("+") if m != "NONE"}
    raise ParameterError(f"unknown rank table kind {kind!r}")


def _schema_base(schema: str) -> str:
    return schema[5:] if schema.startswith("hier-") else schema


def build_rank_table(records: list[dict], kind: str, contexts=RANK_CONTEXTS):
    """Mean Friedman ranks per method, one column per context.

    A context column averages the per-schema (individual/early/late)
    sub-rankings of the methods' best scores; sub-rankings missing any
    method are skipped. Returns None when no sub-ranking is complete.
    """
    ok = [r for r in records if r.get("status") == "ok" and r.get("metrics")]
    methods = sorted({m for r in ok for m in _membership(r, kind)})
    if not methods:
        return None
    sub_scores, sub_names, sub_context_of = [], [], []
    for ci, (track, metric) in enumerate(contexts):
        for schema in FLAT_SCHEMAS:
            pool = [r for r in ok
                    if r["track"] == track and _schema_base(r["schema"]) == schema]
            col = []
            for method in methods:
                hits = [r["metrics"][metric] for r in pool
                        if method in _membership(r, kind)]
                if not hits:
                    break
                col.append(max(hits))
            else:
                sub_scores.append(col)
                sub_names.append(f"{track}-{metric}-{schema}")
                sub_context_of.append(ci)
    if not sub_scores:
        return None
    table = friedman_ranks(np.asarray(sub_scores).T, methods, sub_names)
    context_cols = np.full((len(methods), len(contexts)), np.nan)
    for ci in range(len(contexts)):
        picks = [j for j, c in enumerate(sub_context_of) if c == ci]
        if picks:
            context_cols[:, ci] = table.ranks[:, picks].mean(axis=1)
    with np.errstate(invalid="ignore"):
        overall = np.nanmean(context_cols, axis=1)
    return {
        "methods": methods,
        "contexts": [f"{track}-{metric}" for track, metric in contexts],
        "columns": context_cols,
        "overall": overall,
        "chi_square": table.chi_square,
    }


def _write_rank_csv(path: Path, table: dict) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", *table["contexts"], "overall"])
        for i, method in enumerate(table["methods"]):
            row = [method]
            for v in table["columns"][i]:
                row.append("" if np.isnan(v) else f"{v:.4f}")
            row.append(f"{table['overall'][i]:.4f}")
            writer.writerow(row)


def cmd_report(config: ExperimentConfig, focus_label: str | None = None) -> dict:
    """Emit best-per-schema, rank, and per-label tables under report/."""
    records = [r for r in read_results(results_path(config))
               if r.get("status") == "ok" and r.get("metrics")]
    if not records:
        raise UsageError("no results to report")
    focus = focus_label or config.focus_label
    report_dir = Path(config.output_dir) / "report"
    report_dir.mkdir(parents=True, exist_ok=True)
    written = []

    best_path = report_dir / "best_per_schema.csv"
    with open(best_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["schema", "selected_by", "key", "macro_f1", f"{focus}_f1"])
        schemas = sorted({r["schema"] for r in records})
        for schema in schemas:
            pool = [r for r in records if r["schema"] == schema]
            for metric in ("macro_f1", "focus_f1"):
                best = max(pool, key=lambda r: (r["metrics"][metric], r["key"]))
                writer.writerow([
                    schema,
                    metric if metric == "macro_f1" else f"{focus}_f1",
                    best["key"],
                    f"{best['metrics']['macro_f1']:.4f}",
                    f"{best['metrics']['focus_f1']:.4f}",
                ])
    written.append(best_path)

    for kind, contexts, name in (
        ("feature", RANK_CONTEXTS, "rank_features.csv"),
        ("classifier", CLASSIFIER_CONTEXTS, "rank_classifiers.csv"),
        ("resampler", RANK_CONTEXTS, "rank_resamplers.csv"),
    ):
        table = build_rank_table(records, kind, contexts)
        if table is not None:
            path = report_dir / name
            _write_rank_csv(path, table)
            written.append(path)

    for track, name in (("flat", "per_label_flat.csv"), ("hier", "per_label_hier.csv")):
        pool = [r for r in records if r["track"] == track]
        if not pool:
            continue
        best = max(pool, key=lambda r: (r["metrics"]["macro_f1"], r["key"]))
        path = report_dir / name
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["label", "precision", "recall", "f1", "from"])
            for label, (p, rc, f1) in sorted(best["metrics"]["per_label"].items()):
                writer.writerow([label, f"{p:.4f}", f"{rc:.4f}", f"{f1:.4f}", best["key"]])
        written.append(path)
    return {"written": [str(p) for p in written]}

