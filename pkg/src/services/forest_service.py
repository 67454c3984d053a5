import asyncio
import math
from typing import List, Optional, Tuple

import numpy as np

from src.core.config import settings
from src.core.exceptions import ShapeMismatchError, TrainingError
from src.core.logging import logger
from src.models.dataset_model import PixelDataset
from src.models.forest_model import LEAF, DecisionTree, ForestModel
from src.schemas.classifier_schema import TrainConfig
from src.utils.rng import FOREST_STREAM, rng_stream


def features_per_split(cfg: TrainConfig, n_features: int) -> int:
    """Configured value, defaulting to floor(sqrt(n_features)), capped at n_features."""
    m = cfg.features_per_split or max(1, math.isqrt(n_features))
    return min(m, n_features)


def _gini(counts: np.ndarray, totals: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        p = counts / totals[..., None]
    return 1.0 - np.sum(np.nan_to_num(p) ** 2, axis=-1)


def best_split(
    features: np.ndarray,
    targets: np.ndarray,
    n_classes: int,
    candidates: np.ndarray,
    min_samples_leaf: int = 1,
) -> Optional[Tuple[int, float]]:
    """
    Gini-optimal (feature, threshold) among ``candidates``.

    Thresholds are midpoints between consecutive distinct values. Ties go to the
    lowest feature index, then the lowest threshold. Returns None when no split
    decreases impurity.
    """
    n = targets.shape[0]
    parent = np.bincount(targets, minlength=n_classes).astype(np.float64)
    parent_gini = float(_gini(parent, np.array(n, dtype=np.float64)))
    onehot = np.eye(n_classes)[targets]

    best: Optional[Tuple[int, float]] = None
    best_gain = 0.0
    for f in np.sort(candidates):
        order = np.argsort(features[:, f], kind="stable")
        values = features[order, f]
        cuts = np.flatnonzero(values[:-1] < values[1:])
        n_left = cuts + 1
        cuts = cuts[(n_left >= min_samples_leaf) & (n - n_left >= min_samples_leaf)]
        if cuts.size == 0:
            continue
        left = np.cumsum(onehot[order], axis=0)[cuts]
        right = parent - left
        n_left = (cuts + 1).astype(np.float64)
        n_right = n - n_left
        impurity = (n_left * _gini(left, n_left) + n_right * _gini(right, n_right)) / n
        gains = parent_gini - impurity
        # first maximum is the lowest threshold
        i = int(np.argmax(gains))
        if gains[i] > best_gain + 1e-12:
            low, high = values[cuts[i]], values[cuts[i] + 1]
            threshold = (low + high) / 2
            if not low <= threshold < high:
                threshold = low
            best_gain = float(gains[i])
            best = (int(f), float(threshold))
    return best


def _draw_split(
    features: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    d: int,
    m: int,
    min_samples_leaf: int,
    rng: np.random.Generator,
) -> Optional[Tuple[int, float]]:
    """
    Split on ``m`` randomly drawn features. When none of them can split the
    node, keep drawing ``m`` at a time from the untried features until one can
    or all ``d`` have been tried.
    """
    candidates = rng.choice(d, size=m, replace=False)
    split = best_split(features, y, n_classes, candidates, min_samples_leaf)
    if split is not None or m >= d:
        return split
    untried = rng.permutation(np.setdiff1d(np.arange(d), candidates))
    for start in range(0, untried.size, m):
        split = best_split(features, y, n_classes, untried[start:start + m], min_samples_leaf)
        if split is not None:
            return split
    return None


def grow_tree(
    features: np.ndarray,
    targets: np.ndarray,
    n_classes: int,
    cfg: TrainConfig,
    tree_index: int,
) -> DecisionTree:
    """
    Grow one CART tree on a bootstrap resample.

    The tree's random stream is derived from (cfg.seed, tree_index) alone, so a
    tree is the same whichever worker grows it. Nodes are numbered in preorder.

    Args:
        features: (n, d) training matrix.
        targets: (n,) class positions in [0, n_classes).
        n_classes: Number of forest classes.
        cfg: Hyperparameters.
        tree_index: Position of the tree in the forest.
    """
    rng = rng_stream(cfg.seed, FOREST_STREAM, tree_index)
    n, d = features.shape
    bootstrap = rng.integers(0, n, size=n) if cfg.bootstrap else np.arange(n)
    m = features_per_split(cfg, d)

    feature: List[int] = []
    threshold: List[float] = []
    left: List[int] = []
    right: List[int] = []
    counts: List[np.ndarray] = []

    # (rows, depth, parent, is_left); right pushed first so left subtrees come first
    stack = [(bootstrap, 0, LEAF, False)]
    while stack:
        rows, depth, parent, is_left = stack.pop()
        node = len(feature)
        if parent != LEAF:
            (left if is_left else right)[parent] = node
        y = targets[rows]
        node_counts = np.bincount(y, minlength=n_classes)
        feature.append(LEAF)
        threshold.append(np.nan)
        left.append(LEAF)
        right.append(LEAF)
        counts.append(node_counts)

        pure = np.count_nonzero(node_counts) <= 1
        depth_reached = cfg.max_depth is not None and depth >= cfg.max_depth
        if pure or depth_reached or rows.size < cfg.min_samples_split:
            continue
        split = _draw_split(features[rows], y, n_classes, d, m, cfg.min_samples_leaf, rng)
        if split is None:
            continue
        f, t = split
        goes_left = features[rows, f] <= t
        feature[node], threshold[node] = f, t
        stack.append((rows[~goes_left], depth + 1, node, False))
        stack.append((rows[goes_left], depth + 1, node, True))

    return DecisionTree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        counts=np.array(counts, dtype=np.int64).reshape(-1, n_classes),
        bootstrap=bootstrap if cfg.bootstrap else None,
    )


def _prepare(data: PixelDataset) -> Tuple[Tuple[int, ...], np.ndarray]:
    if data.n_samples < 2:
        raise TrainingError(f"Training needs at least 2 samples, got {data.n_samples}")
    classes = data.classes()
    if len(classes) < 2:
        raise TrainingError(f"Training needs at least 2 classes, got {classes}")
    targets = np.searchsorted(np.array(classes), data.labels).astype(np.int64)
    return classes, targets


def _assemble(trees: List[DecisionTree], classes, data: PixelDataset, cfg: TrainConfig) -> ForestModel:
    return ForestModel(
        trees=tuple(trees),
        classes=tuple(classes),
        n_features=data.n_features,
        n_features_per_split=features_per_split(cfg, data.n_features),
        train_seed=cfg.seed,
        wavenumbers=data.wavenumbers,
    )


def train_rf(data: PixelDataset, cfg: TrainConfig) -> ForestModel:
    """Grow the forest serially."""
    classes, targets = _prepare(data)
    trees = [grow_tree(data.features, targets, len(classes), cfg, i) for i in range(cfg.n_trees)]
    return _assemble(trees, classes, data, cfg)


def _check_width(model: ForestModel, features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.n_features:
        raise ShapeMismatchError(
            f"Feature matrix of shape {features.shape} does not match model width {model.n_features}"
        )
    return features


def predict_proba(model: ForestModel, features: np.ndarray) -> np.ndarray:
    """
    Fraction of trees voting for each class.

    Returns:
        (n, n_classes) matrix, columns in ``model.classes`` order.

    Raises:
        ShapeMismatchError: If the feature width differs from training.
    """
    features = _check_width(model, features)
    votes = np.zeros((features.shape[0], len(model.classes)))
    rows = np.arange(features.shape[0])
    for tree in model.trees:
        votes[rows, tree.vote(features)] += 1.0
    return votes / model.n_trees


def predict(model: ForestModel, features: np.ndarray) -> np.ndarray:
    """Class code with the most votes; ties go to the lowest code."""
    proba = predict_proba(model, features)
    return np.asarray(model.classes, dtype=np.uint8)[np.argmax(proba, axis=1)]


def out_of_bag_accuracy(model: ForestModel, data: PixelDataset) -> float:
    """
    Accuracy of votes from trees whose bootstrap left the sample out.

    Samples drawn by every tree are skipped.

    Raises:
        TrainingError: If bootstrap records are missing or no sample is out of bag.
    """
    features = _check_width(model, data.features)
    if any(tree.bootstrap is None for tree in model.trees):
        raise TrainingError("Out-of-bag accuracy needs the bootstrap samples recorded at training")
    n = data.n_samples
    votes = np.zeros((n, len(model.classes)))
    rows = np.arange(n)
    for tree in model.trees:
        out_of_bag = np.ones(n, dtype=bool)
        out_of_bag[tree.bootstrap] = False
        votes[rows[out_of_bag], tree.vote(features[out_of_bag])] += 1.0
    scored = votes.sum(axis=1) > 0
    if not np.any(scored):
        raise TrainingError("No sample is out of bag for any tree")
    predicted = np.asarray(model.classes)[np.argmax(votes[scored], axis=1)]
    return float(np.mean(predicted == data.labels[scored]))


class ForestService:
    """Tree-parallel random forest training."""
    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = max_workers or settings.MAX_WORKERS

    async def train_rf(self, data: PixelDataset, cfg: TrainConfig) -> ForestModel:
        """
        Grow ``cfg.n_trees`` trees concurrently.

        Per-tree seeds make the forest identical to the serial ``train_rf``.

        Args:
            data: Labeled pixel spectra with at least two classes.
            cfg: Hyperparameters and seed.

        Returns:
            The trained ForestModel.

        Raises:
            TrainingError: Fewer than two samples or classes.
        """
        try:
            classes, targets = _prepare(data)
            semaphore = asyncio.Semaphore(self.max_workers)

            async def _one(index: int) -> DecisionTree:
                async with semaphore:
                    return await asyncio.to_thread(grow_tree, data.features, targets, len(classes), cfg, index)

            trees = list(await asyncio.gather(*(_one(i) for i in range(cfg.n_trees))))
            model = _assemble(trees, classes, data, cfg)
            logger.info(
                f"Trained {model.n_trees} trees on {data.n_samples} pixels, classes {model.classes}, "
                f"max depth {max(t.depth() for t in trees)}"
            )
            return model
        except ValueError as e:
            logger.warning(f"Training rejected: {e}")
            raise
        except Exception as e:
            logger.error(f"Training failed: {e}", exc_info=True)
            raise
