import math
from typing import Optional

from src.core.config import settings
from src.core.exceptions import ConfigError, InvalidImageError
from src.core.logging import logger
from src.models.image_model import AcquisitionSet, BandImage, HyperCube
from src.schemas.acquisition_schema import ProtocolTime, SamplingSpec, TimeModel
from src.utils.validators import validate_factor


def simulate_sparse_acquisition(full: BandImage, r: int) -> BandImage:
    """
    Keep every r-th scan row of a square-pixel band, starting at row 0.

    Args:
        full: Band sampled on a square grid.
        r: Undersampling factor along y.

    Returns:
        Band with ceil(height / r) rows copied bit-exactly and dy_um = r * dx_um.

    Raises:
        ValueError: If r < 1 or the source pixels are not square.
    """
    if int(r) != r or r < 1:
        raise ValueError(f"Undersampling factor must be >= 1, got {r}")
    if not full.is_square_pixel:
        raise InvalidImageError(f"Sparse acquisition needs a square-pixel source, got {full.dx_um}x{full.dy_um} um")
    r = int(r)
    if r == 1:
        return full
    return full.with_pixels(full.pixels[::r], dy_um=r * full.dx_um)


def data_fraction(spec: SamplingSpec) -> float:
    """Fraction of the full-resolution samples acquired: dx / dy."""
    return spec.dx_um / spec.dy_um


def row_count(spec: SamplingSpec) -> int:
    """Scan rows needed to cover the region height at the sampling pitch."""
    # tolerate float noise such as 1500 / 0.5 landing a hair above an integer
    return math.ceil(round(spec.region_height_um / spec.dy_um, 9))


def acquisition_time(spec: SamplingSpec, model: TimeModel) -> float:
    """Minutes to image one band of the region: rows x seconds_per_row + overhead."""
    seconds = row_count(spec) * model.seconds_per_row + model.fixed_overhead_s
    return seconds / 60.0


def protocol_time(
    spec: SamplingSpec,
    model: TimeModel,
    n_bands: int,
    n_reference_bands: int = 1,
) -> ProtocolTime:
    """
    Compare a full-resolution multi-band protocol with the sparse one.

    The sparse protocol acquires ``n_reference_bands`` at dy = dx and the remaining
    bands at ``spec.dy_um``.
    """
    if n_bands < 1 or n_reference_bands < 0 or n_reference_bands > n_bands:
        raise ConfigError(f"Invalid band counts: n_bands={n_bands}, n_reference_bands={n_reference_bands}")
    full_spec = spec.model_copy(update={"dy_um": spec.dx_um})
    per_band_full = acquisition_time(full_spec, model)
    per_band_sparse = acquisition_time(spec, model)
    full = n_bands * per_band_full
    sparse = n_reference_bands * per_band_full + (n_bands - n_reference_bands) * per_band_sparse
    return ProtocolTime(
        n_bands=n_bands,
        n_reference_bands=n_reference_bands,
        full_minutes=full,
        sparse_minutes=sparse,
        speedup=full / sparse,
        data_fraction=data_fraction(spec),
    )


def build_acquisition_set(
    cube: HyperCube,
    reference_wavenumber: float,
    r: int,
    tolerance: Optional[float] = None,
) -> AcquisitionSet:
    """
    Split a full-resolution cube into the reference band and r-decimated sparse bands.

    Raises:
        ConfigError: If no band lies within ``tolerance`` of ``reference_wavenumber``.
    """
    tolerance = settings.WAVENUMBER_MATCH_TOLERANCE_CM1 if tolerance is None else tolerance
    index = cube.index_of(reference_wavenumber, tolerance)
    if index is None:
        logger.warning(f"Reference wavenumber {reference_wavenumber} not in cube {cube.wavenumbers}")
        raise ConfigError(f"Reference wavenumber {reference_wavenumber} cm-1 is not present in the cube")
    validate_factor(r, cube.height)
    reference = cube.bands[index]
    sparse = tuple(
        simulate_sparse_acquisition(band, r) for i, band in enumerate(cube.bands) if i != index
    )
    logger.info(
        f"Built acquisition set: reference {reference.wavenumber_cm1} cm-1, {len(sparse)} sparse bands at r={r}"
    )
    return AcquisitionSet(reference=reference, sparse_bands=sparse)

