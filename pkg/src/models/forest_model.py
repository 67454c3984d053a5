from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

LEAF = -1


@dataclass(frozen=True)
class DecisionTree:
    """
    Binary CART tree in flat array form.

    Node 0 is the root. For an internal node ``i`` a sample goes to
    ``left[i]`` when ``x[feature[i]] <= threshold[i]`` and to ``right[i]``
    otherwise. Leaves have ``feature == LEAF``.

    Attributes:
        feature: (n_nodes,) split feature index, LEAF for leaves.
        threshold: (n_nodes,) split threshold, NaN for leaves.
        left: (n_nodes,) left child index, LEAF for leaves.
        right: (n_nodes,) right child index, LEAF for leaves.
        counts: (n_nodes, n_classes) training class counts reaching each node.
        bootstrap: Indices of the training rows drawn for this tree, used for
            out-of-bag scoring; None once the model is reloaded from disk.
    """
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray
    bootstrap: Optional[np.ndarray] = None

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    def is_leaf(self, node: int) -> bool:
        return int(self.feature[node]) == LEAF

    def apply(self, features: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row of ``features``."""
        nodes = np.zeros(features.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.feature[nodes] != LEAF)
        while active.size:
            current = nodes[active]
            go_left = features[active, self.feature[current]] <= self.threshold[current]
            nodes[active] = np.where(go_left, self.left[current], self.right[current])
            active = active[self.feature[nodes[active]] != LEAF]
        return nodes

    def vote(self, features: np.ndarray) -> np.ndarray:
        """Majority class position (into the forest's class list) per row."""
        leaves = self.apply(features)
        # argmax picks the lowest class position on ties
        return np.argmax(self.counts[leaves], axis=1)

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if not self.is_leaf(node):
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return int(depths.max())


@dataclass(frozen=True)
class ForestModel:
    """
    Trained random forest.

    Attributes:
        trees: Grown trees in training order.
        classes: Ordered class codes; probability columns follow this order.
        n_features: Spectral feature width seen at training.
        n_features_per_split: Features sampled at each split.
        train_seed: Seed the forest was grown from.
        wavenumbers: Band positions of the training features, when known.
    """
    trees: Tuple[DecisionTree, ...]
    classes: Tuple[int, ...]
    n_features: int
    n_features_per_split: int
    train_seed: int
    wavenumbers: Tuple[float, ...] = ()

    @property
    def n_trees(self) -> int:
        return len(self.trees)
