from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from src.core.exceptions import InvalidImageError, ShapeMismatchError


@dataclass(frozen=True)
class PixelDataset:
    """
    Per-pixel spectra with class labels.

    Attributes:
        features: (n_samples, n_bands) float64 spectra.
        labels: (n_samples,) class codes in {1, 2, 3}.
        provenance: (n_samples, 2) int64 rows of (cube id, flat pixel index).
        wavenumbers: Band positions of the feature columns.
        dropped_classes: Requested classes absent from the source label map.
    """
    features: np.ndarray
    labels: np.ndarray
    provenance: np.ndarray
    wavenumbers: Tuple[float, ...] = ()
    dropped_classes: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.uint8)
        provenance = np.array(self.provenance, dtype=np.int64).reshape(-1, 2)
        if features.ndim != 2:
            raise ShapeMismatchError(f"Features must be 2D, got shape {features.shape}")
        if not (features.shape[0] == labels.shape[0] == provenance.shape[0]):
            raise ShapeMismatchError("Features, labels and provenance disagree in sample count")
        if not np.all(np.isfinite(features)):
            raise InvalidImageError("Feature rows must be finite")
        if np.any(labels == 0):
            raise InvalidImageError("Dataset rows must carry a nonzero class label")
        for name, arr in (("features", features), ("labels", labels), ("provenance", provenance)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "wavenumbers", tuple(float(w) for w in self.wavenumbers))
        object.__setattr__(self, "dropped_classes", tuple(int(c) for c in self.dropped_classes))

    @property
    def n_samples(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])

    def classes(self) -> Tuple[int, ...]:
        return tuple(int(c) for c in np.unique(self.labels))
