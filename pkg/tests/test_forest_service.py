import numpy as np
import pytest

from src.core.exceptions import ShapeMismatchError, TrainingError
from src.models.dataset_model import PixelDataset
from src.repositories.model_repository import ModelRepository
from src.schemas.classifier_schema import TrainConfig
from src.services.classifier_service import build_dataset
from src.services.forest_service import (
    ForestService,
    best_split,
    features_per_split,
    out_of_bag_accuracy,
    predict,
    predict_proba,
    train_rf,
)


def _dataset(features, labels):
    features = np.asarray(features, dtype=np.float64)
    return PixelDataset(
        features=features,
        labels=np.asarray(labels),
        provenance=np.column_stack([np.zeros(len(labels)), np.arange(len(labels))]),
    )


@pytest.fixture
def separable(rng):
    features = rng.random((60, 3))
    labels = np.where(features[:, 0] < 0.5, 1, 2)
    return _dataset(features, labels)


@pytest.fixture(scope="module")
def phantom_forest(flat_phantom):
    cube, labels = flat_phantom
    data = build_dataset(cube, labels, cap=200, seed=0)
    return data, train_rf(data, TrainConfig(n_trees=25, seed=3))


def test_default_features_per_split():
    assert features_per_split(TrainConfig(), 28) == 5
    assert features_per_split(TrainConfig(features_per_split=40), 28) == 28


def test_best_split_takes_midpoint_and_lowest_feature():
    features = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    targets = np.array([0, 0, 1, 1])
    assert best_split(features, targets, 2, np.array([1, 0])) == (0, 1.5)


def test_best_split_none_when_no_gain():
    features = np.array([[1.0], [1.0], [1.0]])
    assert best_split(features, np.array([0, 1, 0]), 2, np.array([0])) is None


def test_separable_data_is_fit_exactly(separable):
    model = train_rf(separable, TrainConfig(n_trees=5, bootstrap=False))
    np.testing.assert_array_equal(predict(model, separable.features), separable.labels)


def test_depth_zero_stump_predicts_bootstrap_majority(separable):
    model = train_rf(separable, TrainConfig(n_trees=1, max_depth=0, seed=4))
    tree = model.trees[0]
    assert tree.n_nodes == 1
    targets = np.searchsorted(model.classes, separable.labels)
    majority = model.classes[int(np.argmax(np.bincount(targets[tree.bootstrap], minlength=2)))]
    assert np.all(predict(model, separable.features) == majority)


def test_out_of_bag_accuracy_on_noiseless_phantom(phantom_forest):
    data, model = phantom_forest
    assert out_of_bag_accuracy(model, data) > 0.99


def test_probabilities_sum_to_one(phantom_forest, rng):
    data, model = phantom_forest
    queries = rng.random((50, data.n_features))
    proba = predict_proba(model, queries)
    assert proba.shape == (50, 3)
    np.testing.assert_allclose(proba.sum(axis=1), 1.0, atol=1e-9)


def test_unanimous_vote_is_certain(phantom_forest):
    data, model = phantom_forest
    proba = predict_proba(model, data.features[:10])
    assert np.all(proba.max(axis=1) == 1.0)


def test_argmax_matches_predict(phantom_forest, rng):
    data, model = phantom_forest
    queries = np.vstack([data.features, rng.random((40, data.n_features))])
    proba = predict_proba(model, queries)
    np.testing.assert_array_equal(np.asarray(model.classes)[np.argmax(proba, axis=1)], predict(model, queries))


def test_training_is_deterministic(separable, rng):
    cfg = TrainConfig(n_trees=7, seed=11)
    queries = rng.random((30, 3))
    np.testing.assert_array_equal(
        predict_proba(train_rf(separable, cfg), queries),
        predict_proba(train_rf(separable, cfg), queries),
    )


async def test_concurrent_training_matches_serial(separable, rng):
    cfg = TrainConfig(n_trees=6, seed=2)
    queries = rng.random((30, 3))
    concurrent = await ForestService(max_workers=3).train_rf(separable, cfg)
    np.testing.assert_array_equal(predict_proba(concurrent, queries), predict_proba(train_rf(separable, cfg), queries))


def test_json_round_trip_keeps_predictions(tmp_path, phantom_forest, rng):
    data, model = phantom_forest
    repo = ModelRepository()
    repo.save_model(model, tmp_path / "forest.json")
    loaded = repo.load_model(tmp_path / "forest.json")

    assert loaded.classes == model.classes
    assert loaded.n_trees == model.n_trees
    assert loaded.wavenumbers == model.wavenumbers
    queries = np.vstack([data.features, rng.random((20, data.n_features))])
    np.testing.assert_array_equal(predict_proba(loaded, queries), predict_proba(model, queries))


def test_duplicates_never_lower_own_vote():
    # class 1 at 0, 1, 2 and an outlier at 7; class 2 at 3..6
    base_x = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
    base_y = [1, 1, 1, 2, 2, 2, 2]
    cfg = TrainConfig(n_trees=1, max_depth=1, bootstrap=False)
    votes = []
    for copies in range(6):
        x = base_x + [7.0] * (copies + 1)
        y = base_y + [1] * (copies + 1)
        model = train_rf(_dataset(np.array(x)[:, None], y), cfg)
        votes.append(predict_proba(model, np.array([[7.0]]))[0, 0])
    assert all(b >= a for a, b in zip(votes, votes[1:]))
    assert votes[-1] == 1.0


def test_single_class_is_rejected():
    with pytest.raises(TrainingError):
        train_rf(_dataset(np.zeros((4, 2)), [1, 1, 1, 1]), TrainConfig(n_trees=1))
    with pytest.raises(TrainingError):
        train_rf(_dataset(np.zeros((1, 2)), [1]), TrainConfig(n_trees=1))


def test_width_mismatch_is_rejected(separable):
    model = train_rf(separable, TrainConfig(n_trees=1))
    with pytest.raises(ShapeMismatchError):
        predict_proba(model, np.zeros((2, 4)))


def test_constant_draws_fall_back_to_untried_features(rng):
    # only the last column varies; one feature is drawn per split
    informative = rng.random(40)
    features = np.column_stack([np.ones(40), np.full(40, 2.0), np.zeros(40), informative])
    labels = np.where(informative < 0.5, 1, 2)
    model = train_rf(_dataset(features, labels), TrainConfig(n_trees=12, features_per_split=1, bootstrap=False))
    assert all(tree.feature[0] == 3 for tree in model.trees)
    assert np.array_equal(predict(model, features), labels)
