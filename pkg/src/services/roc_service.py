from typing import Sequence, Tuple

import numpy as np

from src.core.exceptions import TrainingError


def roc_curve(scores: Sequence[float], labels: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """
    ROC points swept over every distinct score threshold.

    A sample is predicted positive when its score is >= the threshold. The sweep
    starts at a +inf sentinel, so the curve runs from (0, 0) to (1, 1) and tied
    scores move both rates in one diagonal step.

    Args:
        scores: Positive-class score per sample.
        labels: 1 for positive, 0 for negative.

    Returns:
        (fpr, tpr) arrays, nondecreasing.

    Raises:
        TrainingError: If the labels hold only one class or lengths differ.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise TrainingError(f"Scores {scores.shape} and labels {labels.shape} must be matching 1D arrays")
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise TrainingError("ROC needs at least one positive and one negative sample")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    # last index of each run of equal scores
    run_ends = np.r_[np.nonzero(np.diff(sorted_scores))[0], sorted_scores.size - 1]
    tp = np.cumsum(sorted_labels)[run_ends]
    fp = (run_ends + 1) - tp
    tpr = np.r_[0.0, tp / n_pos]
    fpr = np.r_[0.0, fp / n_neg]
    return fpr, tpr


def auc(fpr: Sequence[float], tpr: Sequence[float]) -> float:
    """
    Trapezoidal area under ROC points.

    Raises:
        ValueError: Fewer than two points.
    """
    fpr = np.asarray(fpr, dtype=np.float64)
    tpr = np.asarray(tpr, dtype=np.float64)
    if fpr.size < 2 or fpr.shape != tpr.shape:
        raise ValueError("AUC needs at least two matching ROC points")
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2))


def pairwise_concordance(scores: Sequence[float], labels: Sequence[int]) -> float:
    """P(score_pos > score_neg) + 0.5 P(tie), computed over all pairs."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    pos, neg = scores[labels], scores[~labels]
    if pos.size == 0 or neg.size == 0:
        raise TrainingError("Concordance needs at least one positive and one negative sample")
    diff = pos[:, None] - neg[None, :]
    return float((np.sum(diff > 0) + 0.5 * np.sum(diff == 0)) / diff.size)
