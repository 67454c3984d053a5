import numpy as np
import pytest

from src.core.exceptions import TrainingError
from src.services.roc_service import auc, pairwise_concordance, roc_curve


def test_four_sample_case():
    fpr, tpr = roc_curve([0.9, 0.8, 0.3, 0.2], [1, 1, 0, 1])
    assert auc(fpr, tpr) == pytest.approx(2 / 3, abs=1e-9)
    assert pairwise_concordance([0.9, 0.8, 0.3, 0.2], [1, 1, 0, 1]) == pytest.approx(2 / 3)


def test_perfect_separation_passes_through_top_left():
    fpr, tpr = roc_curve([0.9, 0.7, 0.4, 0.1], [1, 1, 0, 0])
    assert any(f == 0.0 and t == 1.0 for f, t in zip(fpr, tpr))
    assert auc(fpr, tpr) == 1.0


def test_constant_scores_give_diagonal():
    fpr, tpr = roc_curve([0.5] * 6, [1, 0, 1, 0, 0, 1])
    np.testing.assert_array_equal(fpr, [0.0, 1.0])
    np.testing.assert_array_equal(tpr, [0.0, 1.0])
    assert auc(fpr, tpr) == 0.5


def test_curve_runs_corner_to_corner_and_is_monotone(rng):
    scores = rng.random(30)
    labels = rng.integers(0, 2, 30)
    labels[:2] = [0, 1]
    fpr, tpr = roc_curve(scores, labels)
    assert (fpr[0], tpr[0]) == (0.0, 0.0)
    assert (fpr[-1], tpr[-1]) == (1.0, 1.0)
    assert np.all(np.diff(fpr) >= 0) and np.all(np.diff(tpr) >= 0)


@pytest.mark.parametrize("seed", range(200))
def test_auc_equals_pairwise_concordance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 51))
    # coarse scores force ties
    scores = rng.integers(0, 6, n) / 5.0
    labels = rng.integers(0, 2, n)
    labels[0], labels[1] = 0, 1
    assert auc(*roc_curve(scores, labels)) == pytest.approx(pairwise_concordance(scores, labels), abs=1e-12)


def test_single_class_is_rejected():
    with pytest.raises(TrainingError):
        roc_curve([0.1, 0.2], [1, 1])


def test_auc_needs_two_points():
    with pytest.raises(ValueError):
        auc([0.0], [0.0])
