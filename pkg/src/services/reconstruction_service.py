import asyncio
import math
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy import fft

from src.core.config import settings
from src.core.exceptions import ConfigError, InvalidImageError
from src.core.logging import logger
from src.models.fusion_model import EqualizationResult, ReconstructedBand
from src.models.image_model import AcquisitionSet, BandImage, HyperCube, undersampling_factor
from src.schemas.reconstruction_schema import FusionConfig
from src.services.curvelet_service import curvelet_forward, curvelet_inverse
from src.services.image_service import crop
from src.utils.validators import validate_same_shape


def fourier_interpolate(band: BandImage, target_height: int, sigma_frac: Optional[float] = 0.5) -> BandImage:
    """
    Upsample a row-decimated band along y by zero-padding its vertical spectrum.

    The centered spectrum is padded from ``band.height`` to ``target_height``
    rows, with an even-height Nyquist row split evenly between its two
    conjugate positions. A Gaussian window exp(-k^2 / (2 sigma^2)) with
    sigma = sigma_frac * (height / 2) smooths the result; ``None`` disables it.

    Args:
        band: Band whose dy/dx equals target_height / band.height.
        target_height: Output row count.
        sigma_frac: Window sigma relative to the low-resolution Nyquist.

    Returns:
        Real-valued band with square pixels and the same spatial mean.

    Raises:
        InvalidImageError: Target smaller than the source, or the factor does not match dy/dx.
    """
    h = band.height
    if target_height < h:
        raise InvalidImageError(f"Target height {target_height} is smaller than source height {h}")
    r = undersampling_factor(band.dy_um, band.dx_um)
    if target_height != r * h:
        raise InvalidImageError(
            f"Target height {target_height} is not the dy/dx factor {r} times the source height {h}"
        )
    if r == 1:
        return band

    spectrum = fft.fft(band.pixels.astype(np.float64), axis=0)
    padded = np.zeros((target_height, band.width), dtype=np.complex128)
    n_pos = (h + 1) // 2
    n_neg = (h - 1) // 2
    padded[:n_pos] = spectrum[:n_pos]
    if n_neg:
        padded[target_height - n_neg:] = spectrum[h - n_neg:]
    if h % 2 == 0:
        nyquist = spectrum[h // 2]
        padded[h // 2] = nyquist / 2
        padded[target_height - h // 2] = nyquist / 2

    if sigma_frac is not None:
        k = fft.fftfreq(target_height) * target_height
        sigma = sigma_frac * h / 2
        padded *= np.exp(-(k ** 2) / (2 * sigma ** 2))[:, None]

    pixels = np.real(fft.ifft(padded * (target_height / h), axis=0))
    return band.with_pixels(pixels, dy_um=band.dx_um)


def equalize_linear(reference: BandImage, target: BandImage) -> EqualizationResult:
    """
    Least-squares fit of ``a * reference + b`` to ``target``.

    A constant reference cannot carry any structure, so it maps to a constant
    image at the target mean (a = 0) and the result is flagged degenerate.

    Raises:
        ShapeMismatchError: If the bands differ in dimensions.
    """
    validate_same_shape(reference.pixels, target.pixels, "reference and target")
    ref = reference.pixels.astype(np.float64)
    tgt = target.pixels.astype(np.float64)
    ref_mean, tgt_mean = ref.mean(), tgt.mean()
    ref_centered = ref - ref_mean
    variance = float(np.mean(ref_centered ** 2))
    if variance == 0.0:
        logger.warning(f"Reference band has zero variance; equalizing to the mean of {target.wavenumber_cm1} cm-1")
        return EqualizationResult(
            band=target.with_pixels(np.full(ref.shape, tgt_mean)),
            gain=0.0,
            offset=float(tgt_mean),
            degenerate=True,
        )
    gain = float(np.mean(ref_centered * (tgt - tgt_mean)) / variance)
    offset = float(tgt_mean - gain * ref_mean)
    return EqualizationResult(band=target.with_pixels(gain * ref + offset), gain=gain, offset=offset)


def resolve_cutoff(cutoff: Union[str, int], n_scales: int, r: int) -> int:
    """
    Last scale index taken from the interpolated band.

    "auto" gives J - 1 - ceil(log2 r) clamped to [0, J - 1].

    Raises:
        ConfigError: Explicit cutoff outside [0, J - 1].
    """
    if cutoff == "auto":
        jc = n_scales - 1 - math.ceil(math.log2(r))
        return min(max(jc, 0), n_scales - 1)
    if not 0 <= int(cutoff) < n_scales:
        raise ConfigError(f"Cutoff scale {cutoff} outside [0, {n_scales - 1}]")
    return int(cutoff)


def _fuse(
    interp: BandImage, reference: BandImage, r: int, cfg: FusionConfig
) -> Tuple[BandImage, Optional[EqualizationResult]]:
    validate_same_shape(interp.pixels, reference.pixels, "interpolated and reference bands")
    equalization = equalize_linear(reference, interp) if cfg.equalization else None
    detail = equalization.band if equalization is not None else reference

    low = curvelet_forward(interp)
    high = curvelet_forward(detail)
    jc = resolve_cutoff(cfg.cutoff_scale, low.n_scales, r)
    logger.debug(f"Fusing {interp.wavenumber_cm1} cm-1 with scales 0..{jc} of {low.n_scales} from the band")

    fused = high.with_scales(low, range(jc + 1))
    return curvelet_inverse(fused, like=interp), equalization


def fuse_bands(interp: BandImage, reference: BandImage, r: int, cfg: FusionConfig) -> BandImage:
    """
    Merge the coarse curvelet scales of an interpolated band with the fine
    scales of the high-resolution reference.

    Args:
        interp: Interpolated band on the reference grid.
        reference: High-resolution reference band.
        r: Undersampling factor the band was acquired with.
        cfg: Cutoff, window and equalization settings.

    Returns:
        Fused band with the metadata of ``interp``.

    Raises:
        ShapeMismatchError: If the bands differ in dimensions.
        ConfigError: If an explicit cutoff is out of range.
    """
    return _fuse(interp, reference, r, cfg)[0]


def reconstruct_band(sparse: BandImage, reference: BandImage, cfg: FusionConfig) -> ReconstructedBand:
    """
    Interpolate one sparse band onto the reference grid and fuse it.

    r = 1 bands are already on the reference grid and come back unchanged. For
    heights not divisible by r the band is interpolated to ceil(H / r) * r rows
    and cropped to the reference height.
    """
    r = undersampling_factor(sparse.dy_um, sparse.dx_um)
    if r == 1:
        return ReconstructedBand(fused=sparse, interpolated=sparse, r=1)
    interp = fourier_interpolate(sparse, sparse.height * r, cfg.gaussian_sigma_frac)
    if interp.height != reference.height:
        interp = crop(interp, 0, 0, interp.width, reference.height)
    fused, equalization = _fuse(interp, reference, r, cfg)
    if equalization is not None and equalization.degenerate:
        logger.warning(f"Band {sparse.wavenumber_cm1} cm-1 fused against a constant reference")
    return ReconstructedBand(fused=fused, interpolated=interp, r=r, equalization=equalization)


def _assemble(acq: AcquisitionSet, bands: List[BandImage]) -> HyperCube:
    return HyperCube(tuple(sorted([acq.reference, *bands], key=lambda b: b.wavenumber_cm1)))


def reconstruct_set(acq: AcquisitionSet, cfg: FusionConfig) -> HyperCube:
    """Reconstruct every sparse band serially; the reference is inserted unmodified."""
    return _assemble(acq, [reconstruct_band(band, acq.reference, cfg).fused for band in acq.sparse_bands])


class ReconstructionService:
    """Band-parallel reconstruction of an acquisition set."""
    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = max_workers or settings.MAX_WORKERS

    async def reconstruct_bands(self, acq: AcquisitionSet, cfg: FusionConfig) -> List[ReconstructedBand]:
        """
        Run the single-band pipeline on every sparse band concurrently.

        Each band runs in a worker thread, at most ``max_workers`` at a time.
        Results come back in band order regardless of completion order.
        """
        semaphore = asyncio.Semaphore(self.max_workers)

        async def _one(band: BandImage) -> ReconstructedBand:
            async with semaphore:
                return await asyncio.to_thread(reconstruct_band, band, acq.reference, cfg)

        try:
            logger.info(
                f"Reconstructing {len(acq.sparse_bands)} bands against {acq.reference.wavenumber_cm1} cm-1 "
                f"with {self.max_workers} workers"
            )
            return list(await asyncio.gather(*(_one(band) for band in acq.sparse_bands)))
        except ValueError as e:
            logger.warning(f"Reconstruction rejected: {e}")
            raise
        except Exception as e:
            logger.error(f"Reconstruction failed: {e}", exc_info=True)
            raise

    async def reconstruct_set(self, acq: AcquisitionSet, cfg: FusionConfig) -> HyperCube:
        """
        Reconstruct all sparse bands concurrently.

        Args:
            acq: Reference band plus sparse bands.
            cfg: Fusion settings shared by all bands.

        Returns:
            HyperCube holding the unmodified reference and every reconstructed
            band, identical to the serial ``reconstruct_set``.
        """
        results = await self.reconstruct_bands(acq, cfg)
        return _assemble(acq, [result.fused for result in results])
