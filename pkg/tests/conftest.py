from __future__ import annotations

import numpy as np
import pytest

from pneumotex.dataset import FeatureMatrix, Taxonomy

from corpus import LEAF_PATHS, write_corpus, write_small_corpus

# train/test counts after a 0.7 stratified holdout of the study-shaped corpus
RYDLS_SPLIT_COUNTS = {
    "Normal": (700, 300),
    "Pneumonia/Acellular/Viral/Coronavirus/COVID-19": (63, 27),
    "Pneumonia/Acellular/Viral/Coronavirus/MERS": (7, 3),
    "Pneumonia/Acellular/Viral/Coronavirus/SARS": (8, 3),
    "Pneumonia/Acellular/Viral/Varicella": (7, 3),
    "Pneumonia/Celullar/Bacterial/Streptococcus": (9, 3),
    "Pneumonia/Celullar/Fungus/Pneumocystis": (8, 3),
}


def cluster_matrix(split_counts: dict, dim: int = 4, seed: int = 0, spread: float = 0.6) -> FeatureMatrix:
    """Feature matrix with one Gaussian cluster per label."""
    rng = np.random.default_rng(seed)
    labels_sorted = sorted(split_counts)
    centers = {lab: rng.uniform(-8.0, 8.0, size=dim) for lab in labels_sorted}
    ids, rows, labels, splits = [], [], [], []
    for lab in labels_sorted:
        n_train, n_test = split_counts[lab]
        leaf = lab.rpartition("/")[2].replace(" ", "_")
        for i in range(n_train + n_test):
            ids.append(f"{leaf}-{i:04d}")
            rows.append(centers[lab] + spread * rng.standard_normal(dim))
            labels.append(lab)
            splits.append("train" if i < n_train else "test")
    return FeatureMatrix(
        ("SYN",), ids, np.array(rows), labels, splits, ["original"] * len(ids)
    )


@pytest.fixture(scope="session")
def rydls_taxonomy() -> Taxonomy:
    return Taxonomy(LEAF_PATHS)


@pytest.fixture
def rydls_matrix() -> FeatureMatrix:
    return cluster_matrix(RYDLS_SPLIT_COUNTS)


@pytest.fixture(scope="session")
def texture_corpus(tmp_path_factory):
    """Full seven-label benchmark corpus; generated once per session."""
    root = tmp_path_factory.mktemp("corpus")
    manifest, taxonomy = write_corpus(root, seed=0)
    return {"root": root, "manifest": manifest, "taxonomy": taxonomy}


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """Three-label miniature corpus for pipeline and CLI tests."""
    root = tmp_path_factory.mktemp("mini-corpus")
    manifest, taxonomy = write_small_corpus(root, seed=3)
    return {"root": root, "manifest": manifest, "taxonomy": taxonomy}
