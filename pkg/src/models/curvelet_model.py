from dataclasses import dataclass, replace
from typing import Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class CurveletCoeffs:
    """
    Curvelet coefficient pyramid.

    Attributes:
        scales: ``scales[j][l]`` is the complex coefficient grid of scale j and
            orientation l. Scale 0 is the isotropic low-pass, the last scale is a
            single orientation-free grid, the scales in between carry wedges.
        image_shape: (height, width) of the transformed image.
        dx_um: Pixel spacing of the source band, restored on inversion.
        dy_um: Row spacing of the source band.
        wavenumber_cm1: Spectral position of the source band.
    """
    scales: Tuple[Tuple[np.ndarray, ...], ...]
    image_shape: Tuple[int, int]
    dx_um: float = 1.0
    dy_um: float = 1.0
    wavenumber_cm1: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "scales", tuple(tuple(wedges) for wedges in self.scales))
        object.__setattr__(self, "image_shape", (int(self.image_shape[0]), int(self.image_shape[1])))

    @property
    def n_scales(self) -> int:
        return len(self.scales)

    def orientation_counts(self) -> Tuple[int, ...]:
        return tuple(len(wedges) for wedges in self.scales)

    def energy(self) -> float:
        """Sum of squared coefficient magnitudes."""
        return float(sum(np.vdot(c, c).real for wedges in self.scales for c in wedges))

    def scaled(self, factor: complex) -> "CurveletCoeffs":
        return replace(self, scales=tuple(tuple(c * factor for c in wedges) for wedges in self.scales))

    def zeros_like(self) -> "CurveletCoeffs":
        return replace(self, scales=tuple(tuple(np.zeros_like(c) for c in wedges) for wedges in self.scales))

    def with_scales(self, replacement: "CurveletCoeffs", indices: Sequence[int]) -> "CurveletCoeffs":
        """Copy of self whose scales listed in ``indices`` come from ``replacement``."""
        chosen = set(indices)
        return replace(
            self,
            scales=tuple(
                replacement.scales[j] if j in chosen else wedges
                for j, wedges in enumerate(self.scales)
            ),
        )
