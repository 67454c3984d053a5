from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.core.exceptions import ShapeMismatchError, TrainingError
from src.core.logging import logger
from src.models.dataset_model import PixelDataset
from src.models.forest_model import ForestModel
from src.models.image_model import HyperCube, LabelMap, TissueClass
from src.schemas.classifier_schema import (
    EvaluationReport, RepeatedEvaluation, RocCurve, SplitSummary, TrainConfig
)
from src.services.forest_service import ForestService, predict_proba
from src.services.roc_service import auc, roc_curve
from src.utils.rng import SAMPLING_STREAM, rng_stream
from src.utils.validators import validate_same_shape

LABELED_CLASSES: Tuple[int, ...] = tuple(int(c) for c in TissueClass if c != TissueClass.UNLABELED)


def build_dataset(
    cube: HyperCube,
    labels: LabelMap,
    cap: int,
    seed: int,
    mask: Optional[np.ndarray] = None,
    classes: Sequence[int] = LABELED_CLASSES,
    cube_id: int = 0,
) -> PixelDataset:
    """
    Class-balanced sample of labeled pixel spectra.

    Each class contributes at most ``cap`` pixels drawn uniformly without
    replacement from its own seeded stream. Requested classes with no pixels are
    dropped with a warning and recorded on the dataset.

    Args:
        cube: Spectra source.
        labels: Per-pixel classes, same dimensions as the cube.
        cap: Per-class pixel cap.
        seed: Sampling seed.
        mask: Optional boolean raster restricting eligible pixels.
        classes: Class codes to sample.
        cube_id: Provenance tag stored with every row.

    Raises:
        ShapeMismatchError: If cube, labels and mask disagree in dimensions.
        TrainingError: If no labeled pixel is eligible.
    """
    validate_same_shape(cube, labels, "cube and label map")
    flat = labels.labels.reshape(-1)
    eligible = np.ones(flat.shape, dtype=bool)
    if mask is not None:
        validate_same_shape(np.asarray(mask), labels, "mask and label map")
        eligible = np.asarray(mask, dtype=bool).reshape(-1)

    chosen: List[np.ndarray] = []
    dropped: List[int] = []
    for code in classes:
        pixels = np.flatnonzero((flat == code) & eligible)
        if pixels.size == 0:
            logger.warning(f"Class {code} has no eligible pixels and is dropped")
            dropped.append(int(code))
            continue
        if pixels.size > cap:
            pixels = np.sort(rng_stream(seed, SAMPLING_STREAM, code).choice(pixels, size=cap, replace=False))
        chosen.append(pixels)
    if not chosen:
        raise TrainingError("No labeled pixels available to build a dataset")

    index = np.concatenate(chosen)
    features = cube.spectra()[index]
    return PixelDataset(
        features=features,
        labels=flat[index],
        provenance=np.column_stack([np.full(index.size, cube_id), index]),
        wavenumbers=cube.wavenumbers,
        dropped_classes=tuple(dropped),
    )


def evaluate(model: ForestModel, test: PixelDataset) -> EvaluationReport:
    """
    Per-class recall, support-weighted overall accuracy, confusion matrix and
    one-vs-rest ROC curves on a held-out dataset.

    Test classes the model never saw are reported in ``excluded_classes`` and
    left out of the accuracies.

    Raises:
        TrainingError: If the test set is empty or holds only unseen classes.
    """
    if test.n_samples == 0:
        raise TrainingError("Cannot evaluate on an empty test set")
    proba = predict_proba(model, test.features)
    predicted = np.asarray(model.classes)[np.argmax(proba, axis=1)]

    present = test.classes()
    excluded = [c for c in present if c not in model.classes]
    if excluded:
        logger.warning(f"Test classes {excluded} were not seen at training and are excluded")
    scored = [c for c in present if c in model.classes]
    if not scored:
        raise TrainingError("Test set holds no class the model was trained on")

    support = {c: int(np.sum(test.labels == c)) for c in scored}
    total = sum(support.values())
    per_class = {c: float(np.mean(predicted[test.labels == c] == c)) for c in scored}
    overall = float(sum(support[c] / total * per_class[c] for c in scored))

    all_classes = sorted(set(model.classes) | set(present))
    position = {c: i for i, c in enumerate(all_classes)}
    confusion = np.zeros((len(all_classes), len(all_classes)), dtype=np.int64)
    np.add.at(confusion, ([position[int(c)] for c in test.labels], [position[int(c)] for c in predicted]), 1)

    curves = []
    for column, code in enumerate(model.classes):
        positives = test.labels == code
        if positives.all() or not positives.any():
            continue
        fpr, tpr = roc_curve(proba[:, column], positives)
        curves.append(RocCurve(class_code=code, fpr=fpr.tolist(), tpr=tpr.tolist(), auc=auc(fpr, tpr)))

    return EvaluationReport(
        classes=all_classes,
        support=support,
        per_class_accuracy=per_class,
        overall_accuracy=overall,
        confusion=confusion.tolist(),
        roc=curves,
        excluded_classes=excluded,
    )


def classify_cube(model: ForestModel, cube: HyperCube) -> LabelMap:
    """
    Per-pixel argmax class of a whole cube.

    Raises:
        ShapeMismatchError: If the band count differs from the model width.
    """
    if cube.n_bands != model.n_features:
        raise ShapeMismatchError(f"Cube has {cube.n_bands} bands, model expects {model.n_features}")
    if model.wavenumbers and tuple(model.wavenumbers) != cube.wavenumbers:
        logger.warning("Cube wavenumbers differ from the training wavenumbers")
    proba = predict_proba(model, cube.spectra())
    codes = np.asarray(model.classes, dtype=np.uint8)[np.argmax(proba, axis=1)]
    return LabelMap(labels=codes.reshape(cube.shape), dx_um=cube.dx_um, dy_um=cube.dy_um)


def split_halves(labels: LabelMap, split_column: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Left (train) and right (test) column halves; disjoint and covering."""
    column = labels.width // 2 if split_column is None else split_column
    if not 0 < column < labels.width:
        raise ValueError(f"Split column {column} must lie inside (0, {labels.width})")
    train = np.zeros(labels.shape, dtype=bool)
    train[:, :column] = True
    return train, ~train


def summarize_split(labels: LabelMap, split_column: Optional[int] = None) -> SplitSummary:
    """Per-class pixel counts on each side of the split."""
    column = labels.width // 2 if split_column is None else split_column
    train, test = split_halves(labels, column)

    def _count(mask: np.ndarray) -> dict:
        return {c: int(np.sum((labels.labels == c) & mask)) for c in labels.classes_present()}

    return SplitSummary(
        train_pixels=_count(train),
        test_pixels=_count(test),
        split_column=column,
    )


class ClassifierService:
    """Train-on-left, test-on-right evaluation protocol."""
    def __init__(self, forest_service: Optional[ForestService] = None):
        self.forest_service = forest_service or ForestService()

    async def train_on_half(self, cube: HyperCube, labels: LabelMap, cfg: TrainConfig) -> ForestModel:
        train_mask, _ = split_halves(labels)
        data = build_dataset(cube, labels, cfg.per_class_cap, cfg.seed, mask=train_mask)
        return await self.forest_service.train_rf(data, cfg)

    def test_dataset(self, cube: HyperCube, labels: LabelMap, cap: Optional[int] = None, seed: int = 0) -> PixelDataset:
        """Labeled pixels of the right half, capped per class when ``cap`` is set."""
        _, test_mask = split_halves(labels)
        return build_dataset(cube, labels, cap or labels.height * labels.width, seed, mask=test_mask)

    async def repeated_evaluation(
        self,
        cube: HyperCube,
        labels: LabelMap,
        cfg: TrainConfig,
        repeats: int,
        test_cube: Optional[HyperCube] = None,
    ) -> RepeatedEvaluation:
        """
        Train on the left half and evaluate on the right half ``repeats`` times
        with seeds cfg.seed, cfg.seed + 1, ...

        Args:
            cube: Training spectra.
            labels: Ground-truth label map.
            cfg: Forest hyperparameters.
            repeats: Number of repetitions.
            test_cube: Spectra scored on the right half, defaults to ``cube``.

        Returns:
            Per-class and overall accuracy mean and population std across repeats.
        """
        if repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {repeats}")
        test = self.test_dataset(test_cube or cube, labels)
        reports = []
        for i in range(repeats):
            run_cfg = cfg.model_copy(update={"seed": cfg.seed + i})
            model = await self.train_on_half(cube, labels, run_cfg)
            report = evaluate(model, test)
            logger.info(f"Repeat {i + 1}/{repeats}: overall accuracy {report.overall_accuracy:.4f}")
            reports.append(report)

        codes = sorted({c for report in reports for c in report.per_class_accuracy})
        per_class = {c: np.array([r.per_class_accuracy.get(c, np.nan) for r in reports]) for c in codes}
        overall = np.array([r.overall_accuracy for r in reports])
        return RepeatedEvaluation(
            repeats=repeats,
            per_class_mean={c: float(np.nanmean(v)) for c, v in per_class.items()},
            per_class_std={c: float(np.nanstd(v)) for c, v in per_class.items()},
            overall_mean=float(overall.mean()),
            overall_std=float(overall.std()),
            reports=reports,
        )
