"""Synthetic texture corpus used by the pipeline and benchmark tests.

Seven labels on the pneumonia taxonomy, each tied to a texture family with a
label-specific frequency so local-pattern histograms separate them cleanly:
sinusoid gratings at three orientations and two periods, checkerboards at two
cell sizes, and smoothed blob noise. Per-image phase, offsets and pixel noise
come from a seeded generator, so a corpus is reproducible byte for byte.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from PIL import Image
from scipy.ndimage import gaussian_filter

LEAF_PATHS = (
    "Normal",
    "Pneumonia/Acellular/Viral/Coronavirus/COVID-19",
    "Pneumonia/Acellular/Viral/Coronavirus/MERS",
    "Pneumonia/Acellular/Viral/Coronavirus/SARS",
    "Pneumonia/Acellular/Viral/Varicella",
    "Pneumonia/Celullar/Bacterial/Streptococcus",
    "Pneumonia/Celullar/Fungus/Pneumocystis",
)

# label -> (texture kind, frequency parameter, sample count, id prefix)
CLASS_SPECS = {
    "Normal": ("h-grating", 8.0, 1000, "n"),
    "Pneumonia/Acellular/Viral/Coronavirus/COVID-19": ("v-grating", 8.0, 90, "cov"),
    "Pneumonia/Acellular/Viral/Coronavirus/MERS": ("checker", 4, 10, "mers"),
    "Pneumonia/Acellular/Viral/Coronavirus/SARS": ("checker", 8, 11, "sars"),
    "Pneumonia/Acellular/Viral/Varicella": ("blobs", 3.0, 10, "var"),
    "Pneumonia/Celullar/Bacterial/Streptococcus": ("h-grating", 16.0, 12, "strep"),
    "Pneumonia/Celullar/Fungus/Pneumocystis": ("d-grating", 8.0, 11, "pcp"),
}


def texture(kind: str, param, size: int, rng: np.random.Generator) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    if kind == "h-grating":
        base = 130.0 + 95.0 * np.sin(2.0 * np.pi * yy / param + rng.uniform(0, 2 * np.pi))
    elif kind == "v-grating":
        base = 130.0 + 95.0 * np.sin(2.0 * np.pi * xx / param + rng.uniform(0, 2 * np.pi))
    elif kind == "d-grating":
        t = (xx + yy) / np.sqrt(2.0)
        base = 130.0 + 95.0 * np.sin(2.0 * np.pi * t / param + rng.uniform(0, 2 * np.pi))
    elif kind == "checker":
        ox, oy = rng.integers(0, param, size=2)
        base = (((xx + ox) // param + (yy + oy) // param) % 2) * 175.0 + 40.0
    elif kind == "blobs":
        field = gaussian_filter(rng.standard_normal((size, size)), param)
        sd = field.std()
        base = 128.0 + 48.0 * field / (sd if sd > 0 else 1.0)
    else:
        raise ValueError(kind)
    noisy = base + rng.normal(0.0, 4.0, size=(size, size))
    return np.clip(np.rint(noisy), 0, 255).astype(np.uint8)


def write_corpus(
    root: Path,
    seed: int = 0,
    specs: dict | None = None,
    size: int = 64,
) -> tuple[Path, Path]:
    """Generate images plus manifest.csv and taxonomy.txt under root.

    Manifest image paths are absolute. Returns (manifest_path, taxonomy_path).
    """
    specs = CLASS_SPECS if specs is None else specs
    root = Path(root)
    img_dir = root / "images"
    img_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    rows = []
    for label in sorted(specs):
        kind, param, count, prefix = specs[label]
        for i in range(count):
            path = img_dir / f"{prefix}-{i:04d}.png"
            Image.fromarray(texture(kind, param, size, rng)).save(path)
            rows.append((f"{prefix}-{i:04d}", str(path), label, "unassigned"))
    manifest = root / "manifest.csv"
    with manifest.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id", "image_path", "label_path", "split"])
        writer.writerows(rows)
    taxonomy = root / "taxonomy.txt"
    taxonomy.write_text("".join(f"{p}\n" for p in sorted(specs)))
    return manifest, taxonomy


SMALL_SPECS = {
    "Normal": ("h-grating", 6.0, 10, "n"),
    "Pneumonia/Acellular/Viral/Coronavirus/COVID-19": ("v-grating", 6.0, 8, "cov"),
    "Pneumonia/Celullar/Bacterial/Streptococcus": ("checker", 4, 8, "strep"),
}


def write_small_corpus(root: Path, seed: int = 0) -> tuple[Path, Path]:
    """Three-label miniature corpus for exercising the pipeline quickly."""
    return write_corpus(root, seed=seed, specs=SMALL_SPECS, size=24)
