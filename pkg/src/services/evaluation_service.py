import asyncio
from itertools import groupby
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from src.core.config import settings
from src.core.exceptions import InvalidImageError
from src.core.logging import logger
from src.models.image_model import BandImage, HyperCube
from src.schemas.evaluation_schema import SsimParams, SweepAggregate, SweepReport, SweepRow
from src.schemas.reconstruction_schema import FusionConfig
from src.services.acquisition_service import build_acquisition_set
from src.services.reconstruction_service import reconstruct_band
from src.utils.validators import validate_factor, validate_same_shape


def mse(a: BandImage, b: BandImage) -> float:
    """Mean squared pixel difference; zero iff the rasters are equal."""
    validate_same_shape(a.pixels, b.pixels, "compared bands")
    diff = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
    return float(np.mean(diff * diff))


def gaussian_window(size: int, sigma: float) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - size // 2
    g = np.exp(-(offsets ** 2) / (2 * sigma ** 2))
    window = np.outer(g, g)
    return window / window.sum()


def resolve_dynamic_range(reference: BandImage, params: SsimParams) -> float:
    """Fixed range, or max - min of the reference (1.0 for a constant reference)."""
    if params.dynamic_range != "auto":
        return float(params.dynamic_range)
    span = float(reference.pixels.max() - reference.pixels.min())
    return span if span > 0 else 1.0


def ssim(a: BandImage, b: BandImage, params: Optional[SsimParams] = None) -> float:
    """
    Mean structural similarity over all fully covered windows.

    ``a`` is the reference: with ``dynamic_range="auto"`` its max - min sets the
    stabilizers C1 = (k1 L)^2 and C2 = (k2 L)^2, so the score is only symmetric
    for a fixed range.

    Args:
        a: Reference (ground-truth) band.
        b: Compared band.
        params: Window and stabilizer settings.

    Returns:
        SSIM in [-1, 1]; exactly 1 when ``a`` and ``b`` are equal.

    Raises:
        ShapeMismatchError: If the bands differ in dimensions.
        InvalidImageError: If a band is smaller than the window.
    """
    params = params or SsimParams()
    validate_same_shape(a.pixels, b.pixels, "compared bands")
    size = params.window_size
    if min(a.shape) < size:
        raise InvalidImageError(f"Band of shape {a.shape} is smaller than the {size}x{size} SSIM window")

    x = a.pixels.astype(np.float64)
    y = b.pixels.astype(np.float64)
    dynamic_range = resolve_dynamic_range(a, params)
    c1 = (params.k1 * dynamic_range) ** 2
    c2 = (params.k2 * dynamic_range) ** 2

    window = gaussian_window(size, params.window_sigma)
    pad = (size - 1) // 2
    valid = (slice(pad, x.shape[0] - pad), slice(pad, x.shape[1] - pad))

    def local_mean(img: np.ndarray) -> np.ndarray:
        return ndimage.correlate(img, window, mode="reflect")[valid]

    mu_x, mu_y = local_mean(x), local_mean(y)
    var_x = local_mean(x * x) - mu_x * mu_x
    var_y = local_mean(y * y) - mu_y * mu_y
    cov = local_mean(x * y) - mu_x * mu_y

    numerator = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
    denominator = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.clip(np.mean(numerator / denominator), -1.0, 1.0))


def aggregate(rows: Sequence[SweepRow]) -> List[SweepAggregate]:
    """Population mean and std of mse and ssim per undersampling factor."""
    aggregates = []
    for r, group in groupby(sorted(rows, key=lambda row: row.r), key=lambda row: row.r):
        group = list(group)
        mse_values = np.array([row.mse for row in group])
        ssim_values = np.array([row.ssim for row in group])
        aggregates.append(SweepAggregate(
            r=r,
            dy_um=group[0].dy_um,
            n=len(group),
            mse_mean=float(mse_values.mean()),
            mse_std=float(mse_values.std()),
            ssim_mean=float(ssim_values.mean()),
            ssim_std=float(ssim_values.std()),
        ))
    return aggregates


def score_band(
    sparse: BandImage,
    reference: BandImage,
    truth: BandImage,
    cfg: FusionConfig,
    params: SsimParams,
    core: int = 0,
) -> SweepRow:
    """Reconstruct one sparse band and score it against its full-resolution original."""
    result = reconstruct_band(sparse, reference, cfg)
    return SweepRow(
        r=result.r,
        dy_um=sparse.dy_um,
        wavenumber_cm1=truth.wavenumber_cm1,
        mse=mse(truth, result.fused),
        ssim=ssim(truth, result.fused, params),
        core=core,
        dynamic_range=resolve_dynamic_range(truth, params),
    )


class SweepService:
    """Reconstruction quality across undersampling factors."""
    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = max_workers or settings.MAX_WORKERS

    async def spacing_sweep(
        self,
        cubes: Sequence[HyperCube],
        reference_wavenumber: float,
        factors: Sequence[int],
        cfg: FusionConfig,
        params: Optional[SsimParams] = None,
    ) -> SweepReport:
        """
        Undersample, reconstruct and score every non-reference band of every cube
        at every factor.

        (core, r, band) jobs run in worker threads under a semaphore; rows are
        sorted by (r, core, wavenumber) so the report never depends on scheduling.

        Args:
            cubes: Full-resolution cubes (one per core), all holding the reference band.
            reference_wavenumber: Band kept at full resolution.
            factors: Undersampling factors r to sweep.
            cfg: Fusion settings.
            params: SSIM settings.

        Returns:
            SweepReport with per-band rows and per-r aggregates.

        Raises:
            ConfigError: If a cube lacks the reference band.
            ValueError: If a factor is below 1 or exceeds a cube height.
        """
        params = params or SsimParams()
        semaphore = asyncio.Semaphore(self.max_workers)
        jobs: List[Tuple] = []
        try:
            for core, cube in enumerate(cubes):
                for r in factors:
                    validate_factor(r, cube.height)
                    acq = build_acquisition_set(cube, reference_wavenumber, r)
                    for sparse in acq.sparse_bands:
                        truth = cube.band_at(sparse.wavenumber_cm1)
                        jobs.append((sparse, acq.reference, truth, cfg, params, core))

            async def _one(job: Tuple) -> SweepRow:
                async with semaphore:
                    return await asyncio.to_thread(score_band, *job)

            rows = list(await asyncio.gather(*(_one(job) for job in jobs)))
        except ValueError as e:
            logger.warning(f"Sweep rejected: {e}")
            raise
        except Exception as e:
            logger.error(f"Sweep failed: {e}", exc_info=True)
            raise

        rows.sort(key=lambda row: (row.r, row.core, row.wavenumber_cm1))
        aggregates = aggregate(rows)
        for agg in aggregates:
            logger.info(f"r={agg.r}: mse {agg.mse_mean:.6g} +/- {agg.mse_std:.3g}, ssim {agg.ssim_mean:.4f}")
        return SweepReport(reference_wavenumber_cm1=reference_wavenumber, rows=rows, aggregates=aggregates)
