from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from src.core.config import settings
from src.core.exceptions import ConfigError
from src.core.logging import logger
from src.models.image_model import HyperCube, LabelMap, TissueClass
from src.schemas.acquisition_schema import ClassSignature, GaussianPeak, PhantomSpec
from src.utils.rng import LAYOUT_STREAM, NOISE_STREAM, TEXTURE_STREAM, rng_stream

# Protein-like base spectrum shared by all tissue, on top of a broad absorbance baseline
_BASE_PEAKS: List[Tuple[float, float, float]] = [
    (1350.0, 260.0, 0.18),
    (1660.0, 22.0, 1.00),
    (1546.0, 24.0, 0.62),
    (1456.0, 20.0, 0.14),
    (1396.0, 22.0, 0.10),
]

# Per-class density of the base spectrum and class-specific peaks
_CLASS_CHEMISTRY: Dict[TissueClass, Tuple[float, List[Tuple[float, float, float]]]] = {
    TissueClass.EPITHELIUM: (0.95, [(1238.0, 22.0, 0.20), (1080.0, 26.0, 0.24)]),
    TissueClass.STROMA: (0.70, [(1238.0, 18.0, 0.24), (1338.0, 20.0, 0.16), (1204.0, 18.0, 0.10)]),
    TissueClass.NECROSIS: (0.45, [(1746.0, 20.0, 0.26), (1136.0, 30.0, 0.10)]),
}


def default_class_signatures() -> List[ClassSignature]:
    signatures = []
    for code, (density, specific) in _CLASS_CHEMISTRY.items():
        peaks = [GaussianPeak(center_cm1=c, width_cm1=w, amplitude=a * density) for c, w, a in _BASE_PEAKS]
        peaks += [GaussianPeak(center_cm1=c, width_cm1=w, amplitude=a) for c, w, a in specific]
        signatures.append(ClassSignature(code=int(code), peaks=peaks))
    return signatures


def default_phantom_spec(
    seed: int = 0,
    width: int = 256,
    height: int = 256,
    noise_sigma: float = 0.005,
    wavenumbers: Optional[Sequence[float]] = None,
) -> PhantomSpec:
    """Three-class phantom on the 28-band wavenumber list."""
    return PhantomSpec(
        seed=seed,
        width=width,
        height=height,
        wavenumbers=list(wavenumbers or settings.DEFAULT_WAVENUMBERS_CM1),
        classes=default_class_signatures(),
        noise_sigma=noise_sigma,
    )


def class_signature(signature: ClassSignature, wavenumbers: Sequence[float]) -> np.ndarray:
    """Noiseless absorbance of a class sampled at ``wavenumbers`` (float64)."""
    nu = np.asarray(wavenumbers, dtype=np.float64)
    spectrum = np.zeros_like(nu)
    for peak in signature.peaks:
        spectrum += peak.amplitude * np.exp(-0.5 * ((nu - peak.center_cm1) / peak.width_cm1) ** 2)
    return spectrum


def _paint_blob(labels: np.ndarray, code: int, center, radii, angle) -> None:
    yy, xx = np.mgrid[0:labels.shape[0], 0:labels.shape[1]]
    dy, dx = yy - center[0], xx - center[1]
    cos_a, sin_a = np.cos(angle), np.sin(angle)
    u = (dx * cos_a + dy * sin_a) / radii[0]
    v = (-dx * sin_a + dy * cos_a) / radii[1]
    labels[u * u + v * v <= 1.0] = code


def generate_labels(spec: PhantomSpec) -> LabelMap:
    """Elliptical class blobs painted round-robin across classes on an unlabeled background."""
    rng = rng_stream(spec.seed, LAYOUT_STREAM)
    labels = np.zeros((spec.height, spec.width), dtype=np.uint8)
    blobs: List[Tuple[int, tuple, tuple, float]] = []
    for signature in spec.classes:
        low, high = signature.radius_range_px
        for _ in range(signature.blob_count):
            center = (rng.uniform(0, spec.height), rng.uniform(0, spec.width))
            major = rng.uniform(low, high)
            radii = (major, major * rng.uniform(0.55, 1.0))
            blobs.append((signature.code, center, radii, rng.uniform(0, np.pi)))
    # interleave so no class systematically paints over another
    order = rng.permutation(len(blobs))
    for index in order:
        _paint_blob(labels, *blobs[index])
    # a repaint can cover another class in turn, so recheck every round
    for attempt in range(len(blobs)):
        missing = [s.code for s in spec.classes if not np.any(labels == s.code)]
        if not missing:
            break
        for code in missing:
            own = [b for b in blobs if b[0] == code]
            logger.debug(f"Class {code} fully covered, repainting blob {attempt % len(own)}")
            _paint_blob(labels, *own[attempt % len(own)])
    missing = [s.code for s in spec.classes if not np.any(labels == s.code)]
    if missing:
        logger.warning(f"Phantom layout for seed {spec.seed} leaves classes {missing} fully covered")
        raise ConfigError(f"Classes {missing} cannot all be placed; reduce blob radii or counts")
    return LabelMap(labels=labels, dx_um=spec.dx_um, dy_um=spec.dx_um)


def generate_texture(spec: PhantomSpec) -> np.ndarray:
    """Smooth multiplicative texture around 1.0, or all ones when disabled."""
    shape = (spec.height, spec.width)
    if spec.texture_scale is None or spec.texture_strength == 0:
        return np.ones(shape)
    rng = rng_stream(spec.seed, TEXTURE_STREAM)
    field = ndimage.gaussian_filter(rng.standard_normal(shape), sigma=spec.texture_scale, mode="wrap")
    std = field.std()
    if std > 0:
        field = (field - field.mean()) / std
    return 1.0 + spec.texture_strength * np.clip(field, -2.5, 2.5)


def generate_phantom(spec: PhantomSpec) -> Tuple[HyperCube, LabelMap]:
    """
    Build a labeled synthetic cube.

    Every labeled pixel carries its class signature times the smooth texture, the
    background carries ``background_level`` in every band, and each band gets
    independent Gaussian noise from its own counter-based stream. Output pixels
    are float32 so the cube round-trips through the raw format bit-exactly.

    Raises:
        ConfigError: No classes, or two classes with identical sampled signatures.
    """
    if not spec.classes:
        raise ConfigError("Phantom spec must define at least one tissue class")
    signatures = {s.code: class_signature(s, spec.wavenumbers) for s in spec.classes}
    codes = list(signatures)
    for i, a in enumerate(codes):
        for b in codes[i + 1:]:
            if np.array_equal(signatures[a], signatures[b]):
                raise ConfigError(f"Classes {a} and {b} have identical signatures")

    labels = generate_labels(spec)
    texture = generate_texture(spec)
    n_bands = len(spec.wavenumbers)
    data = np.full((n_bands, spec.height, spec.width), spec.background_level, dtype=np.float64)
    for code, spectrum in signatures.items():
        mask = labels.labels == code
        data[:, mask] = spectrum[:, None] * texture[mask][None, :]
    if spec.noise_sigma > 0:
        for band in range(n_bands):
            data[band] += rng_stream(spec.seed, NOISE_STREAM + band).normal(0.0, spec.noise_sigma, size=data[band].shape)

    cube = HyperCube.from_array(data.astype(np.float32), spec.wavenumbers, spec.dx_um, spec.dx_um)
    logger.info(
        f"Generated phantom {spec.width}x{spec.height}, {n_bands} bands, classes {labels.classes_present()}"
    )
    return cube, labels
