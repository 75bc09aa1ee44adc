"""Corpus handling: taxonomy, manifest, splits, feature extraction and fusion."""
from __future__ import annotations

import csv
import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import descriptors
from .descriptors import DESCRIPTOR_DIMS, load_external_features
from .errors import (
    AlignmentError,
    CacheIntegrityError,
    ExtractionError,
    ParameterError,
    SchemaError,
    StratificationError,
)
from .featurefile import read_feature_file, write_feature_file
from .imaging import load_gray

SEPARATOR = "/"
SPLIT_VALUES = ("train", "test", "unassigned")


class Taxonomy:
    """Class hierarchy keyed by full node paths (root is implicit).

    Node identity is the whole path, so same-named nodes under different
    parents stay distinct. Paths of every node, ancestors included, are
    exposed sorted so parents always precede their children.
    """

    def __init__(self, paths):
        nodes = set()
        for path in paths:
            segments = path.split(SEPARATOR)
            if not all(segments):
                raise SchemaError(f"malformed label path {path!r}")
            for i in range(1, len(segments) + 1):
                nodes.add(SEPARATOR.join(segments[:i]))
        if not nodes:
            raise SchemaError("taxonomy has no label paths")
        self._nodes = tuple(sorted(nodes))
        self._index = {p: i for i, p in enumerate(self._nodes)}
        self._children: dict[str, list[str]] = {p: [] for p in self._nodes}
        self._roots: list[str] = []
        for p in self._nodes:
            parent = self.parent(p)
            if parent is None:
                self._roots.append(p)
            else:
                self._children[parent].append(p)

    @property
    def nodes(self) -> tuple[str, ...]:
        return self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    def __contains__(self, path: str) -> bool:
        return path in self._index

    def index(self, path: str) -> int:
        try:
            return self._index[path]
        except KeyError:
            raise SchemaError(f"label path {path!r} not in taxonomy") from None

    def parent(self, path: str) -> str | None:
        head, _, _ = path.rpartition(SEPARATOR)
        return head or None

    def children(self, path: str | None) -> tuple[str, ...]:
        if path is None:
            return tuple(self._roots)
        return tuple(self._children[path])

    def ancestors(self, path: str) -> tuple[str, ...]:
        """Path and all its ancestors, shallow to deep."""
        segments = path.split(SEPARATOR)
        return tuple(SEPARATOR.join(segments[: i + 1]) for i in range(len(segments)))

    def depth(self, path: str) -> int:
        """1 for root children."""
        return path.count(SEPARATOR) + 1

    def leaves(self) -> tuple[str, ...]:
        return tuple(p for p in self._nodes if not self._children[p])

    def leaf_name(self, path: str) -> str:
        return path.rpartition(SEPARATOR)[2]


def parse_taxonomy(path) -> Taxonomy:
    """Read one label path per line; blank lines and #-comments are skipped."""
    lines = Path(path).read_text().splitlines()
    paths = [ln.strip() for ln in lines if ln.strip() and not ln.strip().startswith("#")]
    return Taxonomy(paths)


@dataclass(frozen=True)
class Sample:
    sample_id: str
    image_path: str
    label_path: str
    split: str = "unassigned"


def parse_manifest(path, taxonomy: Taxonomy) -> list[Sample]:
    """Read the sample CSV: header sample_id,image_path,label_path,split."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"sample_id", "image_path", "label_path"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise SchemaError(f"{path}: manifest needs columns {sorted(required)}")
        samples = []
        seen = set()
        for i, row in enumerate(reader, start=2):
            sid = (row["sample_id"] or "").strip()
            if not sid:
                raise SchemaError(f"{path}:{i}: empty sample_id")
            if sid in seen:
                raise SchemaError(f"{path}:{i}: duplicate sample_id {sid}")
            seen.add(sid)
            label = (row["label_path"] or "").strip()
            if label not in taxonomy:
                raise SchemaError(f"{path}:{i}: unknown label path {label!r}")
            split = (row.get("split") or "").strip() or "unassigned"
            if split not in SPLIT_VALUES:
                raise SchemaError(f"{path}:{i}: bad split {split!r}")
            samples.append(Sample(sid, (row["image_path"] or "").strip(), label, split))
    return samples


def write_manifest(path, samples) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id", "image_path", "label_path", "split"])
        for s in samples:
            writer.writerow([s.sample_id, s.image_path, s.label_path, s.split])


def stratified_holdout(samples, ratio: float = 0.7, seed: int = 0) -> list[Sample]:
    """Assign train/test per label at the given train ratio, deterministically.

    The test share per label is floor(n * (1 - ratio)); rows that arrive with
    a split keep it and still count toward their label's quota side.
    """
    if not 0.0 < ratio <= 1.0:
        raise ParameterError(f"ratio must be in (0, 1], got {ratio}")
    by_label: dict[str, list[int]] = {}
    for i, s in enumerate(samples):
        by_label.setdefault(s.label_path, []).append(i)
    out = list(samples)
    rng = np.random.default_rng(seed)
    for label in sorted(by_label):
        idx = by_label[label]
        if len(idx) < 2:
            raise StratificationError(f"label {label!r} has {len(idx)} sample(s), need >= 2")
        n_test = int(math.floor(len(idx) * (1.0 - ratio) + 1e-9))
        pre_test = sum(1 for i in idx if samples[i].split == "test")
        open_idx = [i for i in idx if samples[i].split == "unassigned"]
        order = rng.permutation(len(open_idx))
        want_test = max(0, n_test - pre_test)
        test_set = {open_idx[j] for j in order[:want_test]}
        for i in open_idx:
            out[i] = replace(samples[i], split="test" if i in test_set else "train")
    return out


@dataclass(frozen=True)
class DescriptorConfig:
    """How to obtain one descriptor's vectors.

    Computed descriptors carry their parameters; external ones point at a
    feature file produced elsewhere.
    """

    descriptor_id: str
    params: dict = field(default_factory=dict)
    external_path: str | None = None

    def param_digest(self) -> str:
        payload = json.dumps(
            {"id": self.descriptor_id, "params": self.params, "external": self.external_path},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:12]

    @property
    def dim(self) -> int:
        try:
            return DESCRIPTOR_DIMS[self.descriptor_id]
        except KeyError:
            raise ParameterError(f"unknown descriptor id {self.descriptor_id!r}") from None


def compute_descriptor(config: DescriptorConfig, img) -> np.ndarray:
    """Run the configured descriptor on one image."""
    did, p = config.descriptor_id, config.params
    if did == "LBP":
        return descriptors.lbp(img).values
    if did == "EQP":
        return descriptors.eqp(img, descriptors.EqpParams(**p) if p else descriptors.EQP_DEFAULTS).values
    if did == "LDN":
        return descriptors.ldn(img, sigma=p.get("sigma", 0.5)).values
    if did == "LPQ":
        return descriptors.lpq(img, win_size=p.get("win_size", 7)).values
    if did == "BSIF":
        if "bank_path" in p:
            bank = descriptors.load_filter_bank(p["bank_path"])
        elif "seed" in p:
            bank = descriptors.generate_filter_bank(
                p.get("size", 11), p.get("bits", 8), p["seed"]
            )
        else:
            bank = descriptors.default_bank()
        return descriptors.bsif(img, bank).values
    if did == "OBIF":
        params = descriptors.ObifParams(
            alphas=tuple(p.get("alphas", (2.0, 4.0))), eps=p.get("eps", 0.001)
        )
        return descriptors.obifs(img, params).values
    raise ParameterError(f"descriptor {did!r} cannot be computed locally")


@dataclass
class FeatureMatrix:
    """Aligned feature rows for a set of samples."""

    descriptor_ids: tuple[str, ...]
    sample_ids: list[str]
    X: np.ndarray
    labels: list[str]
    splits: list[str]
    origins: list[str]

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        n = len(self.sample_ids)
        if self.X.shape[0] != n or len(self.labels) != n or len(self.splits) != n or len(self.origins) != n:
            raise AlignmentError("matrix rows and metadata lengths disagree")

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return len(self.sample_ids)

    def indices(self, split: str) -> np.ndarray:
        return np.array([i for i, s in enumerate(self.splits) if s == split], dtype=np.intp)

    def subset(self, idx) -> "FeatureMatrix":
        idx = np.asarray(idx, dtype=np.intp)
        return FeatureMatrix(
            self.descriptor_ids,
            [self.sample_ids[i] for i in idx],
            self.X[idx].copy(),
            [self.labels[i] for i in idx],
            [self.splits[i] for i in idx],
            [self.origins[i] for i in idx],
        )

    def flat_labels(self) -> list[str]:
        return [p.rpartition(SEPARATOR)[2] for p in self.labels]


def cache_path(cache_dir, config: DescriptorConfig) -> Path:
    return Path(cache_dir) / f"{config.descriptor_id}-{config.param_digest()}.txt"


def extract_features(samples, config: DescriptorConfig, cache_dir, stats: dict | None = None) -> FeatureMatrix:
    """Feature matrix for the samples, reusing and extending the text cache.

    Rows come back in sample order. Per-sample failures are collected and the
    whole run aborts with ExtractionError listing every failure. stats, if
    given, receives 'decoded': the number of images actually read.
    """
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    expected_dim = config.dim
    digest = config.param_digest()

    if config.external_path is not None:
        _, _, rows = load_external_features(
            config.external_path, expected_id=config.descriptor_id, expected_dim=expected_dim
        )
        if stats is not None:
            stats["decoded"] = 0
        return _assemble(samples, config, rows, source=config.external_path)

    path = cache_path(cache_dir, config)
    rows: dict[str, np.ndarray] = {}
    if path.exists():
        file_id, file_dim, file_digest, rows = read_feature_file(path)
        if file_id != config.descriptor_id or file_digest != digest or file_dim != expected_dim:
            raise CacheIntegrityError(
                f"{path}: header ({file_id}, dim {file_dim}, digest {file_digest}) does not "
                f"match request ({config.descriptor_id}, dim {expected_dim}, digest {digest})"
            )

    missing = [s for s in samples if s.sample_id not in rows]
    failures = []
    decoded = 0
    for s in missing:
        try:
            img = load_gray(s.image_path)
            decoded += 1
            vec = compute_descriptor(config, img)
            if vec.shape != (expected_dim,):
                raise CacheIntegrityError(
                    f"descriptor produced {vec.shape[0]} values, expected {expected_dim}"
                )
            rows[s.sample_id] = vec
        except Exception as exc:  # collected, reported together
            failures.append((s.sample_id, str(exc)))
    if stats is not None:
        stats["decoded"] = decoded
    if failures:
        raise ExtractionError(failures)
    if missing:
        write_feature_file(path, config.descriptor_id, expected_dim, digest, rows.items())
    return _assemble(samples, config, rows, source=str(path))


def _assemble(samples, config: DescriptorConfig, rows, source: str) -> FeatureMatrix:
    X = np.empty((len(samples), config.dim), dtype=np.float64)
    for i, s in enumerate(samples):
        try:
            X[i] = rows[s.sample_id]
        except KeyError:
            raise CacheIntegrityError(
                f"sample {s.sample_id!r} missing from {source}"
            ) from None
    return FeatureMatrix(
        (config.descriptor_id,),
        [s.sample_id for s in samples],
        X,
        [s.label_path for s in samples],
        [s.split for s in samples],
        ["original"] * len(samples),
    )


def early_fuse(matrices) -> FeatureMatrix:
    """Concatenate feature columns of matrices over identical sample rows."""
    matrices = list(matrices)
    if not matrices:
        raise ParameterError("nothing to fuse")
    first = matrices[0]
    for m in matrices[1:]:
        if m.sample_ids != first.sample_ids:
            raise AlignmentError("early fusion requires identical sample ids and order")
        if m.labels != first.labels or m.splits != first.splits:
            raise AlignmentError("early fusion requires identical labels and splits")
    return FeatureMatrix(
        tuple(itertools.chain.from_iterable(m.descriptor_ids for m in matrices)),
        list(first.sample_ids),
        np.hstack([m.X for m in matrices]),
        list(first.labels),
        list(first.splits),
        list(first.origins),
    )


def enumerate_fusion_sets(descriptor_ids) -> list[tuple[str, ...]]:
    """All size-2 then size-3 subsets in lexicographic order."""
    ids = sorted(descriptor_ids)
    if len(set(ids)) != len(ids):
        raise ParameterError("duplicate descriptor ids")
    if len(ids) < 2:
        raise ParameterError("need at least two descriptor ids")
    sets = [tuple(c) for c in itertools.combinations(ids, 2)]
    sets += [tuple(c) for c in itertools.combinations(ids, 3)]
    return sets
