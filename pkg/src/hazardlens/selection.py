"""Stratified 70/30 splitting and k-fold cross-validated grid search.

Per-class train counts follow round-half-to-even on the exact fraction
(computed with Fraction so 0.7 * 5 really ties at 3.5 and rounds to 4).
Grid points are scored by mean validation F-beta across stratified folds;
ties go to the lexicographically smallest point, where a point's sort key
is its tuple of value indices over alphabetically ordered parameter names.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .boosting import BoostParams, predict_gbt, train_gbt
from .cart import TreeParams
from .dataset import HIGH, LOW, LabeledDataset
from .errors import ClassTooSmall, DegenerateLabels, NoPositives, TooFewSamples
from .forest import predict_forest, train_forest
from .metrics import confusion, f_beta
from .seeds import child_seed

DEFAULT_FOREST_GRID: dict[str, list] = {
    "n_trees": [100, 300],
    "max_depth": [None, 8],
    "min_samples_leaf": [1, 5],
}

DEFAULT_GBT_GRID: dict[str, list] = {
    "n_rounds": [100, 300],
    "max_depth": [3, 6],
    "learning_rate": [0.1, 0.3],
    "l2_reg": [1.0],
}


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.70
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class CvSpec:
    k: int = 10
    grid: dict[str, list] = field(default_factory=dict)
    beta: float = 1.5

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if not self.grid:
            raise ValueError("grid must be non-empty")
        if self.beta <= 0:
            raise ValueError("beta must be positive")


def _train_count(fraction: float, n: int) -> int:
    # Fraction(str(x)) keeps 0.7 exact so the ties-to-even rule sees true ties.
    return round(Fraction(str(fraction)) * n)


def stratified_split(
    data: LabeledDataset, spec: SplitSpec
) -> tuple[LabeledDataset, LabeledDataset]:
    """Partition into (train, test) with per-class proportional allocation.

    Row order inside each part follows the original dataset order, so
    identical seeds reproduce identical partitions byte for byte.
    """
    labels = data.labels
    n_high = int(np.sum(labels == HIGH))
    n_low = data.n - n_high
    if n_high == 0 or n_low == 0:
        raise DegenerateLabels(
            f"single-class dataset ({data.county_id}/{data.hazard_id})"
        )
    if min(n_high, n_low) < 2:
        raise ClassTooSmall("each class needs at least 2 members to split")

    rng = np.random.default_rng(spec.seed)
    train_mask = np.zeros(data.n, dtype=bool)
    if spec.stratified:
        for cls in (LOW, HIGH):
            idx = np.flatnonzero(labels == cls)
            take = _train_count(spec.train_fraction, idx.shape[0])
            chosen = rng.permutation(idx)[:take]
            train_mask[chosen] = True
    else:
        take = _train_count(spec.train_fraction, data.n)
        chosen = rng.permutation(data.n)[:take]
        train_mask[chosen] = True

    train_idx = np.flatnonzero(train_mask)
    test_idx = np.flatnonzero(~train_mask)
    return data.take(train_idx), data.take(test_idx)


def stratified_folds(labels: np.ndarray, k: int, rng: np.random.Generator) -> list[np.ndarray]:
    """k validation index sets; per-class counts differ by at most one."""
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in (LOW, HIGH):
        idx = rng.permutation(np.flatnonzero(labels == cls))
        for f in range(k):
            folds[f].extend(idx[f::k].tolist())
    return [np.array(sorted(f), dtype=np.intp) for f in folds]


def _forest_family(data: LabeledDataset, point: dict, seed: int):
    params = TreeParams(
        max_depth=point.get("max_depth"),
        min_samples_leaf=point.get("min_samples_leaf", 1),
        min_samples_split=max(2, 2 * point.get("min_samples_leaf", 1)),
        features_per_split=point.get("features_per_split"),
    )
    return train_forest(data, params, n_trees=point.get("n_trees", 100), seed=seed)


def _gbt_family(data: LabeledDataset, point: dict, seed: int):
    params = BoostParams(
        n_rounds=point.get("n_rounds", 100),
        learning_rate=point.get("learning_rate", 0.1),
        l2_reg=point.get("l2_reg", 1.0),
        max_depth=point.get("max_depth", 3),
        min_samples_leaf=point.get("min_samples_leaf", 1),
    )
    return train_gbt(data, params, seed=seed)


FAMILIES = {
    "forest": (_forest_family, predict_forest, DEFAULT_FOREST_GRID),
    "gbt": (_gbt_family, predict_gbt, DEFAULT_GBT_GRID),
}


@dataclass
class CvRecord:
    params: dict
    fold: int
    score: float


def _grid_points(grid: dict[str, list]):
    names = sorted(grid)
    for combo in itertools.product(*(range(len(grid[n])) for n in names)):
        point = {name: grid[name][i] for name, i in zip(names, combo)}
        yield combo, point


def cross_validate(
    train: LabeledDataset,
    model_family: str,
    cv: CvSpec,
    seed: int,
) -> tuple[dict, list[CvRecord]]:
    """Grid search by mean validation F-beta over stratified k folds.

    Returns (best_params, cv_table). The fold layout and the per-fold model
    seeds are fixed before the grid loop, so duplicated grid points score
    identically and the tie rule (smallest value-index tuple) is meaningful.
    Folds whose F-beta is undefined (no positives either way) are left out
    of the mean.
    """
    if train.n < cv.k:
        raise TooFewSamples(f"{train.n} rows cannot fill {cv.k} folds")
    if model_family not in FAMILIES:
        raise ValueError(f"unknown model family {model_family!r}")
    train_fn, predict_fn, _ = FAMILIES[model_family]

    fold_rng = np.random.default_rng(child_seed(seed, "folds"))
    folds = stratified_folds(train.labels, cv.k, fold_rng)
    fold_seeds = [child_seed(seed, "fold", f) for f in range(cv.k)]
    all_idx = np.arange(train.n, dtype=np.intp)

    best_key = None
    best_params: dict = {}
    best_score = -np.inf
    table: list[CvRecord] = []
    for key, point in _grid_points(cv.grid):
        scores = []
        for f, valid_idx in enumerate(folds):
            fit_idx = np.setdiff1d(all_idx, valid_idx, assume_unique=True)
            model = train_fn(train.take(fit_idx), point, fold_seeds[f])
            preds = predict_fn(model, train.features[valid_idx])
            try:
                score = f_beta(confusion(train.labels[valid_idx], preds), cv.beta)
            except NoPositives:
                continue
            scores.append(score)
            table.append(CvRecord(params=dict(point), fold=f, score=score))
        if not scores:
            raise NoPositives("every fold had an undefined F-score")
        mean = float(np.mean(scores))
        if mean > best_score or (mean == best_score and key < best_key):
            best_key = key
            best_score = mean
            best_params = dict(point)

    return best_params, table
