import numpy as np
import pytest

from conftest import labeled_from_arrays
from hazardlens.cart import Leaf, TreeParams, grow_tree, tree_to_dict
from hazardlens.errors import DegenerateLabels, DimensionMismatch
from hazardlens.forest import (
    ForestModel,
    forest_from_json,
    forest_to_json,
    grow_forest_tree,
    predict_forest,
    predict_proba_forest,
    train_forest,
    tree_rng,
)
from hazardlens.metrics import confusion, f_beta


def separable_data(rng, n=60):
    X = rng.normal(size=(n, 2))
    y = (X[:, 0] > 0.0).astype(np.int64)  # depth-1 separable by construction
    return labeled_from_arrays(X, y)


def test_single_tree_no_bootstrap_reduces_to_cart(rng):
    data = separable_data(rng)
    params = TreeParams(features_per_split=2)
    model = train_forest(data, params, n_trees=1, seed=7, bootstrap=False)
    # replicate: same canonical row order (tract ids ascend), same stream
    direct = grow_tree(data.features, data.labels, params, tree_rng(7, 0))
    assert tree_to_dict(model.trees[0]) == tree_to_dict(direct)
    grid = rng.normal(size=(40, 2))
    from hazardlens.cart import tree_predict_proba

    np.testing.assert_array_equal(
        predict_proba_forest(model, grid), tree_predict_proba(direct, grid)
    )


def test_separable_training_f1_is_one(rng):
    data = separable_data(rng, n=80)
    # a depth-1 oracle confirms separability before asking the forest
    oracle = grow_tree(data.features, data.labels, TreeParams(max_depth=1),
                       np.random.default_rng(0))
    model = train_forest(data, TreeParams(), n_trees=50, seed=3)
    preds = predict_forest(model, data.features)
    score = f_beta(confusion(data.labels, preds), 1.0)
    assert score == 1.0
    assert oracle is not None


def test_training_determinism_byte_identical(rng):
    data = separable_data(rng)
    m1 = train_forest(data, TreeParams(max_depth=4), n_trees=5, seed=11)
    m2 = train_forest(data, TreeParams(max_depth=4), n_trees=5, seed=11)
    assert forest_to_json(m1) == forest_to_json(m2)


def test_row_order_invariance(rng):
    data = separable_data(rng)
    perm = rng.permutation(data.n)
    shuffled = labeled_from_arrays(data.features[perm], data.labels[perm])
    shuffled = type(data)(
        county_id=data.county_id,
        hazard_id=data.hazard_id,
        schema=data.schema,
        tract_ids=tuple(data.tract_ids[i] for i in perm),
        features=data.features[perm],
        labels=data.labels[perm],
        threshold=data.threshold,
    )
    m1 = train_forest(data, TreeParams(max_depth=4), n_trees=4, seed=5)
    m2 = train_forest(shuffled, TreeParams(max_depth=4), n_trees=4, seed=5)
    assert forest_to_json(m1) == forest_to_json(m2)


def test_parallel_equals_sequential_tree_streams(rng):
    data = separable_data(rng)
    params = TreeParams(max_depth=4, features_per_split=1)
    order = np.argsort(np.asarray(data.tract_ids, dtype=object), kind="stable")
    X, y = data.features[order], data.labels[order]
    sequential = [grow_forest_tree(X, y, params, 21, i, True) for i in range(6)]
    shuffled_build = {
        i: grow_forest_tree(X, y, params, 21, i, True)
        for i in [4, 0, 5, 2, 1, 3]
    }
    for i in range(6):
        assert tree_to_dict(sequential[i]) == tree_to_dict(shuffled_build[i])


def stub_forest(leaf_probs):
    trees = [Leaf(counts=np.array([int(10 * (1 - p)), int(10 * p)]), n=10)
             for p in leaf_probs]
    return ForestModel(
        trees=trees, params=TreeParams(), n_trees=len(trees),
        bootstrap=False, seed=0, feature_names=("a", "b"),
    )


def test_predict_unanimous_and_mean():
    X = np.zeros((3, 2))
    assert predict_proba_forest(stub_forest([1.0, 1.0]), X).tolist() == [1.0] * 3
    np.testing.assert_allclose(
        predict_proba_forest(stub_forest([0.2, 0.6]), X), 0.4
    )
    np.testing.assert_array_equal(
        predict_proba_forest(stub_forest([0.2, 0.6]), X),
        predict_proba_forest(stub_forest([0.6, 0.2]), X),
    )


def test_predict_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        predict_proba_forest(stub_forest([0.5]), np.zeros((2, 3)))


def test_degenerate_labels_rejected(rng):
    X = rng.normal(size=(10, 2))
    data = labeled_from_arrays(X, np.ones(10, dtype=np.int64))
    with pytest.raises(DegenerateLabels):
        train_forest(data, TreeParams(), n_trees=2, seed=0)


def test_serialization_round_trip(rng):
    data = separable_data(rng)
    model = train_forest(data, TreeParams(max_depth=3), n_trees=3, seed=9)
    text = forest_to_json(model)
    rebuilt = forest_from_json(text)
    assert forest_to_json(rebuilt) == text
    np.testing.assert_array_equal(
        predict_proba_forest(model, data.features),
        predict_proba_forest(rebuilt, data.features),
    )


def test_more_trees_do_not_hurt_training_fbeta():
    # median over 10 seeds: going 1 -> 50 trees may not lose more than 0.02
    deltas = []
    for seed in range(10):
        gen = np.random.default_rng(seed)
        X = gen.normal(size=(60, 3))
        y = ((X[:, 0] + 0.5 * gen.normal(size=60)) > 0).astype(np.int64)
        if y.min() == y.max():
            continue
        data = labeled_from_arrays(X, y)
        scores = {}
        for n_trees in (1, 50):
            model = train_forest(data, TreeParams(), n_trees=n_trees, seed=seed)
            preds = predict_forest(model, data.features)
            scores[n_trees] = f_beta(confusion(data.labels, preds), 1.5)
        deltas.append(scores[50] - scores[1])
    assert np.median(deltas) >= -0.02
