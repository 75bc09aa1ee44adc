"""Experiment configuration: YAML document with paper-default parameters."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .dataset import DescriptorConfig
from .errors import SchemaError
from .hierarchy import DEFAULT_F_TEST_LEVELS
from .resampling import METHODS

DEFAULT_CLASSIFIERS = ("KNN-3", "KNN-5", "DT", "RF", "SVM", "MLP")
DEFAULT_DESCRIPTORS = ("LBP", "EQP", "LDN", "LPQ", "BSIF", "OBIF")
DEFAULT_RULES = ("SUM", "PROD", "VOTE")
DEFAULT_CRITERIA = (
    ("top-n", (5,)),
    ("best-per-feature", (2, 3, 4, 5)),
    ("best-per-classifier", (2, 3, 4, 5)),
)


@dataclass(frozen=True)
class HierarchyConfig:
    enabled: bool = True
    f_test_levels: tuple[float, ...] = DEFAULT_F_TEST_LEVELS
    ensemble_iterations: int = 10
    min_leaf: int = 2
    depth_weight: float = 0.75


@dataclass(frozen=True)
class FusionConfig:
    rules: tuple[str, ...] = DEFAULT_RULES
    criteria: tuple[tuple[str, tuple[int, ...]], ...] = DEFAULT_CRITERIA
    select_on: str = "validation"


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    manifest: Path
    taxonomy: Path
    cache_dir: Path
    output_dir: Path
    descriptors: tuple[DescriptorConfig, ...]
    early_fusion: str = "pairs-and-triples"
    classifiers: tuple[str, ...] = DEFAULT_CLASSIFIERS
    resamplers: tuple[str, ...] = METHODS
    hierarchy: HierarchyConfig = field(default_factory=HierarchyConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    train_ratio: float = 0.7
    focus_label: str = "COVID-19"
    label_mode: str = "flat"
    workers: int = 1


def _require(doc: dict, key: str):
    if key not in doc:
        raise SchemaError(f"config is missing required key {key!r}")
    return doc[key]


def _descriptor_entries(raw) -> tuple[DescriptorConfig, ...]:
    out = []
    for entry in raw:
        if isinstance(entry, str):
            entry = {"id": entry}
        if "id" not in entry:
            raise SchemaError(f"descriptor entry without id: {entry!r}")
        out.append(
            DescriptorConfig(
                descriptor_id=entry["id"],
                params=dict(entry.get("params", {})),
                external_path=entry.get("external"),
            )
        )
    return tuple(out)


def _criteria_entries(raw) -> tuple[tuple[str, tuple[int, ...]], ...]:
    out = []
    for entry in raw:
        if "criterion" not in entry:
            raise SchemaError(f"selection entry without criterion: {entry!r}")
        sizes = entry.get("sizes", entry.get("n"))
        if sizes is None:
            raise SchemaError(f"selection entry without sizes: {entry!r}")
        if isinstance(sizes, int):
            sizes = [sizes]
        out.append((entry["criterion"], tuple(int(s) for s in sizes)))
    return tuple(out)


def load_config(path, seed_override: int | None = None) -> ExperimentConfig:
    """Read the YAML config; relative paths resolve against the file."""
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: config must be a mapping")

    base = path.parent
    seed = seed_override if seed_override is not None else _require(doc, "seed")
    manifest = base / _require(doc, "manifest")
    taxonomy = base / _require(doc, "taxonomy")
    for ref in (manifest, taxonomy):
        if not ref.exists():
            raise SchemaError(f"referenced file does not exist: {ref}")

    hier_doc = doc.get("hierarchy", {})
    hierarchy = HierarchyConfig(
        enabled=bool(hier_doc.get("enabled", True)),
        f_test_levels=tuple(hier_doc.get("f_test_levels", DEFAULT_F_TEST_LEVELS)),
        ensemble_iterations=int(hier_doc.get("ensemble_iterations", 10)),
        min_leaf=int(hier_doc.get("min_leaf", 2)),
        depth_weight=float(hier_doc.get("depth_weight", 0.75)),
    )
    fusion_doc = doc.get("fusion", {})
    fusion = FusionConfig(
        rules=tuple(r.upper() for r in fusion_doc.get("rules", DEFAULT_RULES)),
        criteria=(
            _criteria_entries(fusion_doc["criteria"])
            if "criteria" in fusion_doc
            else DEFAULT_CRITERIA
        ),
        select_on=fusion_doc.get("select_on", "validation"),
    )
    if fusion.select_on not in ("validation", "test"):
        raise SchemaError("fusion.select_on must be validation or test")

    resamplers = tuple(doc.get("resamplers", METHODS))
    unknown = [m for m in resamplers if m not in METHODS]
    if unknown:
        raise SchemaError(f"unknown resampling methods: {unknown}")

    return ExperimentConfig(
        seed=int(seed),
        manifest=manifest,
        taxonomy=taxonomy,
        cache_dir=base / doc.get("cache_dir", "cache"),
        output_dir=base / doc.get("output_dir", "out"),
        descriptors=_descriptor_entries(doc.get("descriptors", DEFAULT_DESCRIPTORS)),
        early_fusion=doc.get("early_fusion", "pairs-and-triples"),
        classifiers=tuple(doc.get("classifiers", DEFAULT_CLASSIFIERS)),
        resamplers=resamplers,
        hierarchy=hierarchy,
        fusion=fusion,
        train_ratio=float(doc.get("train_ratio", 0.7)),
        focus_label=str(doc.get("focus_label", "COVID-19")),
        label_mode=str(doc.get("label_mode", "flat")),
        workers=int(doc.get("workers", 1)),
    )
