"""Resampling of imbalanced training sets.

Binary operations work on a LabeledSet; resample_multiclass lifts them to
many labels one-against-all. Distances are squared Euclidean on raw feature
values; distance ties resolve to the lower row index.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .dataset import FeatureMatrix, SEPARATOR
from .errors import DegenerateDensityError, ParameterError, ResamplingError
from .neighbors import k_smallest, sq_dists

log = logging.getLogger(__name__)

OVERSAMPLERS = ("SMOTE", "SMOTE-B1", "SMOTE-B2", "ADASYN")
UNDERSAMPLERS = ("ENN", "RENN", "ALLKNN", "TL")
HYBRIDS = ("SMOTE-TL",)
METHODS = ("NONE",) + OVERSAMPLERS + HYBRIDS + UNDERSAMPLERS

REST = "__rest__"


@dataclass
class LabeledSet:
    """Feature rows with labels and a per-row origin marker."""

    X: np.ndarray
    y: list
    origin: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        if self.X.ndim != 2 or self.X.shape[0] != len(self.y):
            raise ParameterError("X must be (n, d) aligned with y")
        if not self.origin:
            self.origin = ["original"] * len(self.y)

    def __len__(self) -> int:
        return len(self.y)

    def counts(self) -> dict:
        out: dict = {}
        for lab in self.y:
            out[lab] = out.get(lab, 0) + 1
        return out

    def subset(self, idx) -> "LabeledSet":
        idx = np.asarray(sorted(idx), dtype=np.intp)
        return LabeledSet(self.X[idx].copy(), [self.y[i] for i in idx], [self.origin[i] for i in idx])


def _neighbors(X: np.ndarray, query_idx, pool_idx, k: int) -> list[np.ndarray]:
    """k nearest pool members for each query row, self excluded."""
    pool_idx = np.asarray(pool_idx, dtype=np.intp)
    out = []
    for qi in query_idx:
        d = sq_dists(X[qi : qi + 1], X[pool_idx])[0]
        self_pos = np.flatnonzero(pool_idx == qi)
        if self_pos.size:
            d[self_pos[0]] = np.inf
        take = k_smallest(d, min(k, pool_idx.size - (1 if self_pos.size else 0)))
        out.append(pool_idx[take])
    return out


def smote(
    lset: LabeledSet,
    minority_label,
    target_count: int,
    k: int = 5,
    variant: str = "plain",
    seed: int = 0,
    trace: list | None = None,
) -> LabeledSet:
    """Oversample the minority label to target_count with interpolated points.

    Each synthetic point is p + u * (q - p) for a seed point p and a
    neighbour q. plain/borderline1 draw q among p's k nearest minority
    neighbours; borderline2 draws q among p's k nearest neighbours of any
    label, halving u when q is not minority. Borderline variants restrict
    seed points to the danger zone: more than k/2 but not all of the k
    nearest overall neighbours belong to other labels. trace, if a list,
    receives (p_index, q_index, u) per synthetic point.
    """
    if variant not in ("plain", "borderline1", "borderline2"):
        raise ParameterError(f"unknown SMOTE variant {variant!r}")
    if k < 1:
        raise ParameterError("k must be >= 1")
    minority = [i for i, lab in enumerate(lset.y) if lab == minority_label]
    if len(minority) < 2:
        raise ResamplingError(
            f"label {minority_label!r} has {len(minority)} row(s), need >= 2 to interpolate"
        )
    if target_count < len(minority):
        raise ParameterError(
            f"target {target_count} below current count {len(minority)}"
        )
    m = target_count - len(minority)
    if m == 0:
        return LabeledSet(lset.X.copy(), list(lset.y), list(lset.origin))

    all_idx = np.arange(len(lset), dtype=np.intp)
    if variant in ("borderline1", "borderline2"):
        overall = _neighbors(lset.X, minority, all_idx, k)
        seeds = []
        for i, nb in zip(minority, overall):
            n_other = sum(1 for j in nb if lset.y[j] != minority_label)
            if n_other * 2 > len(nb) and n_other < len(nb):
                seeds.append(i)
        if not seeds:
            log.warning(
                "no danger points for label %r; falling back to all minority seeds",
                minority_label,
            )
            seeds = minority
    else:
        seeds = minority

    if variant == "borderline2":
        pools = {i: nb for i, nb in zip(minority, _neighbors(lset.X, minority, all_idx, k))}
    else:
        pools = {
            i: nb
            for i, nb in zip(
                minority, _neighbors(lset.X, minority, np.asarray(minority, dtype=np.intp), k)
            )
        }

    rng = np.random.default_rng(seed)
    new_rows = []
    for t in range(m):
        p = seeds[t % len(seeds)]
        pool = pools[p]
        q = int(pool[rng.integers(len(pool))])
        u = float(rng.random())
        if variant == "borderline2" and lset.y[q] != minority_label:
            u *= 0.5
        new_rows.append(lset.X[p] + u * (lset.X[q] - lset.X[p]))
        if trace is not None:
            trace.append((int(p), q, u))
    X = np.vstack([lset.X, np.array(new_rows)])
    y = list(lset.y) + [minority_label] * m
    origin = list(lset.origin) + ["synthetic"] * m
    return LabeledSet(X, y, origin)


def _largest_remainder(quotas: np.ndarray, total: int) -> np.ndarray:
    """Integer counts summing to total, proportional to quotas."""
    base = np.floor(quotas).astype(np.int64)
    short = total - int(base.sum())
    if short > 0:
        frac = quotas - base
        order = np.lexsort((np.arange(quotas.size), -frac))
        base[order[:short]] += 1
    return base


def adasyn(
    lset: LabeledSet,
    minority_label,
    target_count: int,
    k: int = 5,
    seed: int = 0,
    fallback_to_smote: bool = False,
    trace: list | None = None,
) -> LabeledSet:
    """Oversample with per-seed counts proportional to local majority density.

    Each minority point's share of the synthetic budget follows the fraction
    of other-label points among its k nearest overall neighbours
    (largest-remainder rounding). When every minority neighbourhood is purely
    minority the density is degenerate: DegenerateDensityError, or a plain
    SMOTE pass when fallback_to_smote is set.
    """
    minority = [i for i, lab in enumerate(lset.y) if lab == minority_label]
    if len(minority) < 2:
        raise ResamplingError(
            f"label {minority_label!r} has {len(minority)} row(s), need >= 2 to interpolate"
        )
    if target_count < len(minority):
        raise ParameterError(f"target {target_count} below current count {len(minority)}")
    m = target_count - len(minority)
    if m == 0:
        return LabeledSet(lset.X.copy(), list(lset.y), list(lset.origin))

    all_idx = np.arange(len(lset), dtype=np.intp)
    overall = _neighbors(lset.X, minority, all_idx, k)
    ratios = np.array(
        [
            sum(1 for j in nb if lset.y[j] != minority_label) / max(len(nb), 1)
            for nb in overall
        ]
    )
    if ratios.sum() == 0.0:
        if fallback_to_smote:
            log.warning(
                "ADASYN density degenerate for label %r; falling back to SMOTE",
                minority_label,
            )
            return smote(lset, minority_label, target_count, k=k, seed=seed, trace=trace)
        raise DegenerateDensityError(
            f"every neighbourhood of label {minority_label!r} is purely minority"
        )
    counts = _largest_remainder(ratios / ratios.sum() * m, m)

    pools = {
        i: nb
        for i, nb in zip(
            minority, _neighbors(lset.X, minority, np.asarray(minority, dtype=np.intp), k)
        )
    }
    rng = np.random.default_rng(seed)
    new_rows = []
    for i, c in zip(minority, counts):
        pool = pools[i]
        for _ in range(int(c)):
            q = int(pool[rng.integers(len(pool))])
            u = float(rng.random())
            new_rows.append(lset.X[i] + u * (lset.X[q] - lset.X[i]))
            if trace is not None:
                trace.append((int(i), q, u))
    X = np.vstack([lset.X, np.array(new_rows)])
    y = list(lset.y) + [minority_label] * m
    origin = list(lset.origin) + ["synthetic"] * m
    return LabeledSet(X, y, origin)


def _enn_pass(X: np.ndarray, y: list, live: list[int], k: int, removable) -> list[int]:
    """One edited-nearest-neighbour sweep over the live rows.

    A row is marked when some other label strictly outnumbers its own among
    its k nearest live neighbours (a tied vote keeps the row). Marks that
    would empty a class are skipped and logged. Returns removed indices.
    """
    if len(live) < 2:
        return []
    live_arr = np.asarray(live, dtype=np.intp)
    neighbors = _neighbors(X, live, live_arr, min(k, len(live) - 1))
    marked = []
    for i, nb in zip(live, neighbors):
        if not removable(i):
            continue
        tally: dict = {}
        for j in nb:
            tally[y[j]] = tally.get(y[j], 0) + 1
        own = tally.get(y[i], 0)
        if any(lab != y[i] and c > own for lab, c in tally.items()):
            marked.append(i)
    counts: dict = {}
    for i in live:
        counts[y[i]] = counts.get(y[i], 0) + 1
    removed = []
    for i in marked:
        if counts[y[i]] <= 1:
            log.warning("skipping removal of row %d: it would empty class %r", i, y[i])
            continue
        counts[y[i]] -= 1
        removed.append(i)
    return removed


def _edited_nn_removals(
    X: np.ndarray, y: list, mode: str, k: int, protected_label=None
) -> set[int]:
    live = list(range(len(y)))
    removed: set[int] = set()
    if mode == "enn":
        removed.update(_enn_pass(X, y, live, k, lambda i: True))
    elif mode == "renn":
        while True:
            gone = _enn_pass(X, y, live, k, lambda i: True)
            if not gone:
                break
            removed.update(gone)
            live = [i for i in live if i not in removed]
    elif mode == "allknn":
        if protected_label is None:
            counts: dict = {}
            for lab in y:
                counts[lab] = counts.get(lab, 0) + 1
            protected_label = min(counts, key=lambda lab: (counts[lab], str(lab)))
        for kk in range(1, k + 1):
            gone = _enn_pass(X, y, live, kk, lambda i: y[i] != protected_label)
            removed.update(gone)
            live = [i for i in live if i not in removed]
    else:
        raise ParameterError(f"unknown edited_nn mode {mode!r}")
    return removed


def edited_nn(lset: LabeledSet, mode: str = "enn", k: int = 3, protected_label=None) -> LabeledSet:
    """Remove rows misclassified by their neighbours.

    mode 'enn' is a single pass; 'renn' repeats to a fixpoint; 'allknn' runs
    passes for k = 1..k with the protected label (smallest class by default)
    immune to removal. A single-label set is returned unchanged.
    """
    if k < 1:
        raise ParameterError("k must be >= 1")
    if mode not in ("enn", "renn", "allknn"):
        raise ParameterError(f"unknown edited_nn mode {mode!r}")
    if len(set(lset.y)) < 2:
        return lset.subset(range(len(lset)))
    removed = _edited_nn_removals(lset.X, lset.y, mode, k, protected_label)
    return lset.subset([i for i in range(len(lset)) if i not in removed])


def _tomek_removals(X: np.ndarray, y: list) -> set[int]:
    """Majority-side members of Tomek links (mutual cross-label 1-NN pairs).

    With equal class counts the member whose label sorts last is treated as
    the majority side.
    """
    n = len(y)
    if n < 2:
        return set()
    all_idx = np.arange(n, dtype=np.intp)
    nn = [int(nb[0]) for nb in _neighbors(X, list(range(n)), all_idx, 1)]
    counts: dict = {}
    for lab in y:
        counts[lab] = counts.get(lab, 0) + 1
    removed: set[int] = set()
    for i in range(n):
        j = nn[i]
        if j > i and nn[j] == i and y[i] != y[j]:
            ci, cj = counts[y[i]], counts[y[j]]
            if ci > cj or (ci == cj and str(y[i]) > str(y[j])):
                removed.add(i)
            else:
                removed.add(j)
    return removed


def tomek_links(lset: LabeledSet) -> LabeledSet:
    """Drop the majority member of every Tomek link.

    A single-label set has no cross-label pairs and comes back unchanged.
    """
    removed = _tomek_removals(lset.X, lset.y)
    return lset.subset([i for i in range(len(lset)) if i not in removed])


def smote_tomek(
    lset: LabeledSet,
    minority_label,
    target_count: int,
    k: int = 5,
    seed: int = 0,
    trace: list | None = None,
) -> LabeledSet:
    """SMOTE to target_count, then Tomek-link cleaning of the result."""
    grown = smote(lset, minority_label, target_count, k=k, seed=seed, trace=trace)
    return tomek_links(grown)


def resample_multiclass(
    matrix: FeatureMatrix,
    method: str,
    seed: int = 0,
    label_mode: str = "flat",
    k: int = 5,
    enn_k: int = 3,
    floor: int = 2,
) -> FeatureMatrix:
    """Lift a binary resampler to many labels one-against-all on train rows.

    Oversamplers raise every non-majority label to the majority count, each
    decomposed as label-vs-rest on the original train rows (labels processed
    by descending count, then name). Undersamplers remove a row if any
    decomposition removes it, never dropping a label below floor. SMOTE-TL
    oversamples first, then applies the Tomek decomposition to the grown set.
    Test rows pass through untouched; synthetic rows get origin 'synthetic'
    and fresh sample ids.
    """
    if method not in METHODS:
        raise ParameterError(f"unknown resampling method {method!r}; use one of {METHODS}")
    if label_mode not in ("flat", "leaf_path"):
        raise ParameterError(f"unknown label_mode {label_mode!r}")
    if method == "NONE":
        return matrix.subset(np.arange(len(matrix)))

    train_idx = matrix.indices("train")
    if train_idx.size == 0:
        raise ResamplingError("matrix has no train rows")
    key = (
        matrix.flat_labels() if label_mode == "flat" else list(matrix.labels)
    )
    y = [key[i] for i in train_idx]
    X = matrix.X[train_idx]
    counts: dict = {}
    for lab in y:
        counts[lab] = counts.get(lab, 0) + 1
    if len(counts) < 2:
        raise ResamplingError("training rows carry a single label")
    order = sorted(counts, key=lambda lab: (-counts[lab], lab))
    majority, majority_count = order[0], counts[order[0]]

    existing_ids = set(matrix.sample_ids)
    if method in OVERSAMPLERS or method in HYBRIDS:
        syn_X, syn_meta = [], []
        for j, lab in enumerate(order):
            if counts[lab] >= majority_count:
                continue
            y_bin = [lab if v == lab else REST for v in y]
            lab_seed = np.random.default_rng([seed, j]).integers(2**31 - 1)
            trace: list = []
            base = LabeledSet(X, y_bin)
            if method == "ADASYN":
                adasyn(base, lab, majority_count, k=k, seed=int(lab_seed), trace=trace)
            elif method in ("SMOTE", "SMOTE-TL"):
                smote(base, lab, majority_count, k=k, seed=int(lab_seed), trace=trace)
            elif method == "SMOTE-B1":
                smote(base, lab, majority_count, k=k, variant="borderline1",
                      seed=int(lab_seed), trace=trace)
            elif method == "SMOTE-B2":
                smote(base, lab, majority_count, k=k, variant="borderline2",
                      seed=int(lab_seed), trace=trace)
            for p, q, u in trace:
                syn_X.append(X[p] + u * (X[q] - X[p]))
                syn_meta.append(matrix.labels[train_idx[p]])
        ids = []
        counters: dict[str, int] = {}
        for path in syn_meta:
            leaf = path.rpartition(SEPARATOR)[2].replace(" ", "_")
            n = counters.get(leaf, 0)
            sid = f"syn-{method.lower()}-{leaf}-{n:05d}"
            while sid in existing_ids:
                n += 1
                sid = f"syn-{method.lower()}-{leaf}-{n:05d}"
            existing_ids.add(sid)
            counters[leaf] = n + 1
            ids.append(sid)
        new_X = np.vstack([matrix.X, np.array(syn_X)]) if syn_X else matrix.X.copy()
        result = FeatureMatrix(
            matrix.descriptor_ids,
            list(matrix.sample_ids) + ids,
            new_X,
            list(matrix.labels) + syn_meta,
            list(matrix.splits) + ["train"] * len(ids),
            list(matrix.origins) + ["synthetic"] * len(ids),
        )
        if method == "SMOTE-TL":
            return _undersample_matrix(result, "TL", label_mode, k, enn_k, floor)
        return result

    return _undersample_matrix(matrix, method, label_mode, k, enn_k, floor)


def _undersample_matrix(
    matrix: FeatureMatrix, method: str, label_mode: str, k: int, enn_k: int, floor: int
) -> FeatureMatrix:
    train_idx = matrix.indices("train")
    key = matrix.flat_labels() if label_mode == "flat" else list(matrix.labels)
    y = [key[i] for i in train_idx]
    X = matrix.X[train_idx]
    counts: dict = {}
    for lab in y:
        counts[lab] = counts.get(lab, 0) + 1
    order = sorted(counts, key=lambda lab: (-counts[lab], lab))

    removed: set[int] = set()
    for lab in order:
        y_bin = [lab if v == lab else REST for v in y]
        if len(set(y_bin)) < 2:
            continue
        if method == "TL":
            removed |= _tomek_removals(X, y_bin)
        else:
            mode = {"ENN": "enn", "RENN": "renn", "ALLKNN": "allknn"}[method]
            protected = None
            if mode == "allknn":
                n_pos = sum(1 for v in y_bin if v == lab)
                protected = lab if n_pos <= len(y_bin) - n_pos else REST
            removed |= _edited_nn_removals(X, y_bin, mode, enn_k, protected)

    for lab in order:
        members = [t for t, v in enumerate(y) if v == lab]
        surviving = [t for t in members if t not in removed]
        if len(surviving) < floor:
            for t in members:
                if t in removed:
                    removed.discard(t)
                    surviving.append(t)
                    if len(surviving) >= floor:
                        break
    drop_global = {int(train_idx[t]) for t in removed}
    keep = [i for i in range(len(matrix)) if i not in drop_global]
    return matrix.subset(keep)
