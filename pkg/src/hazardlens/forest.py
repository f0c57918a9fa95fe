"""Random forest: bagging plus per-node feature subsampling over CART trees.

Per-tree RNG streams are derived from (seed, tree_index), never from build
order, so parallel and sequential training produce identical forests. Rows
are canonicalized by tract_id before any bootstrap draw, making training
invariant to the row order of the input.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .cart import TreeNode, TreeParams, grow_tree, tree_from_dict, tree_predict_proba, tree_to_dict
from .dataset import HIGH, LOW, LabeledDataset
from .errors import DegenerateLabels, DimensionMismatch

FOREST_FORMAT = "hazardlens.forest"
FOREST_VERSION = 1


@dataclass
class ForestModel:
    trees: list[TreeNode]
    params: TreeParams
    n_trees: int
    bootstrap: bool
    seed: int
    feature_names: tuple[str, ...]

    @property
    def n_features(self) -> int:
        return len(self.feature_names)


def _canonical_order(data: LabeledDataset) -> np.ndarray:
    return np.argsort(np.asarray(data.tract_ids, dtype=object), kind="stable")


def tree_rng(seed: int, index: int) -> np.random.Generator:
    """Index-derived stream for tree `index` of a forest seeded with `seed`."""
    return np.random.default_rng((int(seed), int(index)))


def grow_forest_tree(
    X: np.ndarray,
    y: np.ndarray,
    params: TreeParams,
    seed: int,
    index: int,
    bootstrap: bool,
) -> TreeNode:
    """Grow tree `index`: bootstrap draw then growth, all from one stream."""
    rng = tree_rng(seed, index)
    if bootstrap:
        idx = rng.integers(0, y.shape[0], size=y.shape[0])
        return grow_tree(X[idx], y[idx], params, rng)
    return grow_tree(X, y, params, rng)


def train_forest(
    data: LabeledDataset,
    params: TreeParams,
    n_trees: int,
    seed: int,
    bootstrap: bool = True,
) -> ForestModel:
    """Train a forest of n_trees CART trees on a labeled county dataset.

    Unless params pins features_per_split, each node considers
    ceil(sqrt(F)) candidate features. Requires both classes present.
    """
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    low, high = data.class_counts()
    if low == 0 or high == 0:
        raise DegenerateLabels(
            f"cannot train on single-class data ({data.county_id}/{data.hazard_id})"
        )
    order = _canonical_order(data)
    X = np.ascontiguousarray(data.features[order])
    y = data.labels[order]

    if params.features_per_split is None:
        params = TreeParams(
            max_depth=params.max_depth,
            min_samples_leaf=params.min_samples_leaf,
            min_samples_split=params.min_samples_split,
            features_per_split=math.ceil(math.sqrt(data.schema.feature_count)),
        )
    trees = [
        grow_forest_tree(X, y, params, seed, i, bootstrap) for i in range(n_trees)
    ]
    return ForestModel(
        trees=trees,
        params=params,
        n_trees=n_trees,
        bootstrap=bootstrap,
        seed=seed,
        feature_names=data.schema.feature_names,
    )


def predict_proba_forest(model: ForestModel, X: np.ndarray) -> np.ndarray:
    """Soft vote: mean of per-tree leaf P(high) over all trees."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"expected {model.n_features} feature columns, got "
            f"{X.shape[1] if X.ndim == 2 else X.ndim}"
        )
    acc = np.zeros(X.shape[0], dtype=np.float64)
    for tree in model.trees:
        acc += tree_predict_proba(tree, X)
    return acc / len(model.trees)


def predict_forest(model: ForestModel, X: np.ndarray) -> np.ndarray:
    """Hard labels: high iff mean P(high) exceeds 0.5."""
    return np.where(predict_proba_forest(model, X) > 0.5, HIGH, LOW).astype(np.int64)


def forest_to_json(model: ForestModel) -> str:
    payload = {
        "format": FOREST_FORMAT,
        "version": FOREST_VERSION,
        "seed": int(model.seed),
        "bootstrap": bool(model.bootstrap),
        "n_trees": int(model.n_trees),
        "params": {
            "max_depth": model.params.max_depth,
            "min_samples_leaf": model.params.min_samples_leaf,
            "min_samples_split": model.params.min_samples_split,
            "features_per_split": model.params.features_per_split,
        },
        "feature_names": list(model.feature_names),
        "trees": [tree_to_dict(tree) for tree in model.trees],
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def forest_from_json(text: str) -> ForestModel:
    payload = json.loads(text)
    if payload.get("format") != FOREST_FORMAT:
        raise ValueError(f"not a forest document: {payload.get('format')!r}")
    params = payload["params"]
    return ForestModel(
        trees=[tree_from_dict(t) for t in payload["trees"]],
        params=TreeParams(
            max_depth=params["max_depth"],
            min_samples_leaf=params["min_samples_leaf"],
            min_samples_split=params["min_samples_split"],
            features_per_split=params["features_per_split"],
        ),
        n_trees=payload["n_trees"],
        bootstrap=payload["bootstrap"],
        seed=payload["seed"],
        feature_names=tuple(payload["feature_names"]),
    )
