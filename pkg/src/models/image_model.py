import math
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from src.core.exceptions import InvalidImageError, ShapeMismatchError


class TissueClass(IntEnum):
    """Label codes stored in a LabelMap."""
    UNLABELED = 0
    EPITHELIUM = 1
    STROMA = 2
    NECROSIS = 3


def _frozen_array(values: np.ndarray) -> np.ndarray:
    arr = np.array(values, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class BandImage:
    """
    Single-wavenumber raster with physical pixel spacing.

    Pixels are kept in the dtype they were produced with: float32 when read from
    disk, float64 when computed. The on-disk format is always float32.

    Attributes:
        pixels: 2D array indexed [row (y), column (x)], all values finite.
        dx_um: Pixel spacing along x in micrometers.
        dy_um: Pixel spacing along y (scan rows) in micrometers.
        wavenumber_cm1: Spectral position of the band in cm^-1.
    """
    pixels: np.ndarray
    dx_um: float
    dy_um: float
    wavenumber_cm1: float

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidImageError(f"Band raster must be 2D and non-empty, got shape {arr.shape}")
        if not np.issubdtype(arr.dtype, np.floating):
            arr = arr.astype(np.float64)
        if not np.all(np.isfinite(arr)):
            raise InvalidImageError(f"Band {self.wavenumber_cm1} cm-1 contains non-finite pixels")
        if not (self.dx_um > 0 and self.dy_um > 0):
            raise InvalidImageError(f"Pixel spacing must be positive, got dx={self.dx_um}, dy={self.dy_um}")
        if not self.wavenumber_cm1 > 0:
            raise InvalidImageError(f"Wavenumber must be positive, got {self.wavenumber_cm1}")
        object.__setattr__(self, "pixels", _frozen_array(arr))
        object.__setattr__(self, "dx_um", float(self.dx_um))
        object.__setattr__(self, "dy_um", float(self.dy_um))
        object.__setattr__(self, "wavenumber_cm1", float(self.wavenumber_cm1))

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width

    @property
    def is_square_pixel(self) -> bool:
        return math.isclose(self.dx_um, self.dy_um, rel_tol=1e-9)

    def row(self, index: int) -> np.ndarray:
        return self.pixels[index]

    def with_pixels(self, pixels: np.ndarray, **changes) -> "BandImage":
        """Return a copy carrying new pixels (and optionally new metadata)."""
        return replace(self, pixels=pixels, **changes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BandImage):
            return NotImplemented
        return (
            self.dx_um == other.dx_um
            and self.dy_um == other.dy_um
            and self.wavenumber_cm1 == other.wavenumber_cm1
            and self.shape == other.shape
            and np.array_equal(self.pixels, other.pixels)
        )

    __hash__ = None


@dataclass(frozen=True)
class HyperCube:
    """
    Ordered stack of co-registered band images.

    Attributes:
        bands: Bands sorted by strictly increasing wavenumber, all sharing
            dimensions and pixel spacing.
    """
    bands: Tuple[BandImage, ...]

    def __post_init__(self):
        bands = tuple(self.bands)
        if not bands:
            raise InvalidImageError("A cube needs at least one band")
        first = bands[0]
        for band in bands[1:]:
            if band.shape != first.shape:
                raise ShapeMismatchError(
                    f"Band {band.wavenumber_cm1} has shape {band.shape}, expected {first.shape}"
                )
            if band.dx_um != first.dx_um or band.dy_um != first.dy_um:
                raise InvalidImageError(f"Band {band.wavenumber_cm1} has a different pixel spacing")
        wavenumbers = [b.wavenumber_cm1 for b in bands]
        if any(b <= a for a, b in zip(wavenumbers, wavenumbers[1:])):
            raise InvalidImageError(f"Band wavenumbers must be strictly increasing: {wavenumbers}")
        object.__setattr__(self, "bands", bands)

    @classmethod
    def from_array(
        cls,
        data: np.ndarray,
        wavenumbers: Sequence[float],
        dx_um: float,
        dy_um: float,
    ) -> "HyperCube":
        """Build a cube from a (bands, height, width) array."""
        data = np.asarray(data)
        if data.ndim != 3 or data.shape[0] != len(wavenumbers):
            raise ShapeMismatchError(
                f"Array of shape {data.shape} does not match {len(wavenumbers)} wavenumbers"
            )
        return cls(tuple(
            BandImage(pixels=data[i], dx_um=dx_um, dy_um=dy_um, wavenumber_cm1=w)
            for i, w in enumerate(wavenumbers)
        ))

    @property
    def n_bands(self) -> int:
        return len(self.bands)

    @property
    def height(self) -> int:
        return self.bands[0].height

    @property
    def width(self) -> int:
        return self.bands[0].width

    @property
    def shape(self) -> Tuple[int, int]:
        return self.bands[0].shape

    @property
    def dx_um(self) -> float:
        return self.bands[0].dx_um

    @property
    def dy_um(self) -> float:
        return self.bands[0].dy_um

    @property
    def wavenumbers(self) -> Tuple[float, ...]:
        return tuple(b.wavenumber_cm1 for b in self.bands)

    def to_array(self, dtype=None) -> np.ndarray:
        """Stack bands into a (bands, height, width) array."""
        stacked = np.stack([b.pixels for b in self.bands])
        return stacked if dtype is None else stacked.astype(dtype, copy=False)

    def spectra(self) -> np.ndarray:
        """Per-pixel spectra as an (height*width, bands) float64 matrix, row-major pixel order."""
        return self.to_array(np.float64).reshape(self.n_bands, -1).T

    def index_of(self, wavenumber_cm1: float, tolerance: float = 0.5) -> Optional[int]:
        """Index of the band closest to ``wavenumber_cm1`` within ``tolerance``, else None."""
        distances = [abs(w - wavenumber_cm1) for w in self.wavenumbers]
        best = int(np.argmin(distances))
        return best if distances[best] <= tolerance else None

    def band_at(self, wavenumber_cm1: float, tolerance: float = 0.5) -> Optional[BandImage]:
        index = self.index_of(wavenumber_cm1, tolerance)
        return None if index is None else self.bands[index]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HyperCube):
            return NotImplemented
        return self.bands == other.bands

    __hash__ = None


@dataclass(frozen=True)
class LabelMap:
    """
    Per-pixel tissue class raster.

    Attributes:
        labels: 2D uint8 array of TissueClass codes.
        dx_um: Pixel spacing along x, carried into the sidecar header.
        dy_um: Pixel spacing along y.
    """
    labels: np.ndarray
    dx_um: float = 0.5
    dy_um: float = 0.5

    def __post_init__(self):
        arr = np.asarray(self.labels)
        if arr.ndim != 2 or arr.size == 0:
            raise InvalidImageError(f"Label map must be 2D and non-empty, got shape {arr.shape}")
        valid = {int(c) for c in TissueClass}
        present = {int(c) for c in np.unique(arr)}
        if not present <= valid:
            raise InvalidImageError(f"Label codes {sorted(present - valid)} are not valid tissue classes")
        object.__setattr__(self, "labels", _frozen_array(arr.astype(np.uint8)))

    @property
    def height(self) -> int:
        return int(self.labels.shape[0])

    @property
    def width(self) -> int:
        return int(self.labels.shape[1])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width

    def classes_present(self) -> Tuple[int, ...]:
        """Labeled class codes present in the map, ascending."""
        return tuple(int(c) for c in np.unique(self.labels) if c != TissueClass.UNLABELED)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabelMap):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.labels, other.labels)

    __hash__ = None


def undersampling_factor(dy_um: float, dx_um: float) -> int:
    """Integer ratio dy/dx, or InvalidImageError when the ratio is not integral."""
    ratio = dy_um / dx_um
    r = int(round(ratio))
    if r < 1 or not math.isclose(ratio, r, rel_tol=1e-9, abs_tol=1e-9):
        raise InvalidImageError(f"dy/dx = {ratio:g} is not a positive integer")
    return r


@dataclass(frozen=True)
class AcquisitionSet:
    """
    One full-resolution reference band plus row-decimated sparse bands.

    Attributes:
        reference: Square-pixel band (the Amide I image in the study layout).
        sparse_bands: Bands sampled every r-th row, r = dy/dx, sorted by wavenumber.
    """
    reference: BandImage
    sparse_bands: Tuple[BandImage, ...] = field(default_factory=tuple)

    def __post_init__(self):
        ref = self.reference
        if not ref.is_square_pixel:
            raise InvalidImageError(
                f"Reference band must have square pixels, got {ref.dx_um}x{ref.dy_um} um"
            )
        bands = tuple(sorted(self.sparse_bands, key=lambda b: b.wavenumber_cm1))
        for band in bands:
            if band.width != ref.width or band.dx_um != ref.dx_um:
                raise ShapeMismatchError(
                    f"Sparse band {band.wavenumber_cm1} does not share the reference x grid"
                )
            r = undersampling_factor(band.dy_um, band.dx_um)
            expected = math.ceil(ref.height / r)
            if band.height != expected:
                raise ShapeMismatchError(
                    f"Sparse band {band.wavenumber_cm1} has {band.height} rows, expected {expected} for r={r}"
                )
            if math.isclose(band.wavenumber_cm1, ref.wavenumber_cm1):
                raise InvalidImageError(f"Sparse band duplicates the reference wavenumber {ref.wavenumber_cm1}")
        object.__setattr__(self, "sparse_bands", bands)

    def factors(self) -> Tuple[int, ...]:
        return tuple(undersampling_factor(b.dy_um, b.dx_um) for b in self.sparse_bands)

    def wavenumbers(self) -> Iterable[float]:
        return sorted([self.reference.wavenumber_cm1] + [b.wavenumber_cm1 for b in self.sparse_bands])
