import json
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

from src.core.config import settings
from src.core.exceptions import CubeFormatError
from src.core.logging import logger
from src.models.forest_model import LEAF, DecisionTree, ForestModel

FORMAT_NAME = "hsrecon-forest"

class ModelRepository:
    """Versioned JSON persistence for trained forests (trees as nested split/leaf records)."""

    def save_model(self, model: ForestModel, path: Union[str, Path]) -> None:
        document = {
            "format": FORMAT_NAME,
            "version": settings.FORMAT_VERSION,
            "classes": list(model.classes),
            "n_features": model.n_features,
            "n_features_per_split": model.n_features_per_split,
            "train_seed": model.train_seed,
            "wavenumbers_cm1": list(model.wavenumbers),
            "trees": [self._tree_to_record(tree) for tree in model.trees],
        }
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(document, separators=(",", ":")))
        except OSError as e:
            logger.error(f"Failed to save model to {path}: {e}", exc_info=True)
            raise
        logger.info(f"Saved forest with {model.n_trees} trees to {path}")

    def load_model(self, path: Union[str, Path]) -> ForestModel:
        path = Path(path)
        if not path.exists():
            raise CubeFormatError(f"Missing model file: {path}")
        try:
            document = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise CubeFormatError(f"Model file {path} is not valid JSON: {e}") from e
        if document.get("format") != FORMAT_NAME:
            raise CubeFormatError(f"{path} is not a {FORMAT_NAME} document")
        if document.get("version") != settings.FORMAT_VERSION:
            raise CubeFormatError(
                f"Unsupported model version {document.get('version')}, expected {settings.FORMAT_VERSION}"
            )
        return ForestModel(
            trees=tuple(self._record_to_tree(record) for record in document["trees"]),
            classes=tuple(int(c) for c in document["classes"]),
            n_features=int(document["n_features"]),
            n_features_per_split=int(document["n_features_per_split"]),
            train_seed=int(document["train_seed"]),
            wavenumbers=tuple(float(w) for w in document.get("wavenumbers_cm1", [])),
        )

    def _tree_to_record(self, tree: DecisionTree, node: int = 0) -> Dict[str, Any]:
        record: Dict[str, Any] = {"counts": [int(c) for c in tree.counts[node]]}
        if not tree.is_leaf(node):
            record["feature"] = int(tree.feature[node])
            record["threshold"] = float(tree.threshold[node])
            record["left"] = self._tree_to_record(tree, int(tree.left[node]))
            record["right"] = self._tree_to_record(tree, int(tree.right[node]))
        return record

    def _record_to_tree(self, root: Dict[str, Any]) -> DecisionTree:
        feature: List[int] = []
        threshold: List[float] = []
        left: List[int] = []
        right: List[int] = []
        counts: List[List[int]] = []

        def visit(record: Dict[str, Any]) -> int:
            index = len(feature)
            counts.append(record["counts"])
            is_split = "feature" in record
            feature.append(int(record["feature"]) if is_split else LEAF)
            threshold.append(float(record["threshold"]) if is_split else float("nan"))
            left.append(LEAF)
            right.append(LEAF)
            if is_split:
                left[index] = visit(record["left"])
                right[index] = visit(record["right"])
            return index

        visit(root)
        return DecisionTree(
            feature=np.asarray(feature, dtype=np.int64),
            threshold=np.asarray(threshold, dtype=np.float64),
            left=np.asarray(left, dtype=np.int64),
            right=np.asarray(right, dtype=np.int64),
            counts=np.asarray(counts, dtype=np.int64),
        )
