from dataclasses import dataclass
from typing import Optional

from src.models.image_model import BandImage


@dataclass(frozen=True)
class EqualizationResult:
    """
    Least-squares linear map ``a * reference + b`` fitted onto a target band.

    Attributes:
        band: The mapped reference, carrying the target's metadata.
        gain: Slope a = cov(ref, target) / var(ref), 0 when degenerate.
        offset: Intercept b = mean(target) - a * mean(ref).
        degenerate: True when the reference has zero variance.
    """
    band: BandImage
    gain: float
    offset: float
    degenerate: bool = False


@dataclass(frozen=True)
class ReconstructedBand:
    """
    Output of the single-band pipeline.

    Attributes:
        fused: Final reconstruction on the reference grid.
        interpolated: Fourier-interpolated intermediate (the band itself when r = 1).
        r: Undersampling factor of the source band.
        equalization: Fit of the reference onto the band, None when skipped.
    """
    fused: BandImage
    interpolated: BandImage
    r: int
    equalization: Optional[EqualizationResult] = None
