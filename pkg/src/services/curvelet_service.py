"""Wrapping-based discrete curvelet transform.

Windows are built on the centered, orthonormally scaled 2D spectrum. Each
window's support is wrapped into the smallest rectangle that maps it
injectively, so the frame is exactly tight and inversion is perfect up to
floating-point rounding.
"""
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np
from scipy import fft

from src.core.exceptions import TransformError
from src.core.logging import logger
from src.models.curvelet_model import CurveletCoeffs
from src.models.image_model import BandImage

MIN_SIZE = 32
COARSEST_WEDGES = 16


@dataclass(frozen=True)
class _Window:
    """Support points (rows, cols) of one window, their weights and the wrap rectangle."""
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray
    wrap_shape: Tuple[int, int]

    def wrapped_index(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.rows % self.wrap_shape[0], self.cols % self.wrap_shape[1]


@dataclass(frozen=True)
class CurveletPlan:
    shape: Tuple[int, int]
    windows: Tuple[Tuple[_Window, ...], ...]

    @property
    def n_scales(self) -> int:
        return len(self.windows)

    def orientation_counts(self) -> Tuple[int, ...]:
        return tuple(len(scale) for scale in self.windows)


def scale_count(height: int, width: int) -> int:
    """J = max(2, ceil(log2(min(height, width))) - 3)."""
    return max(2, math.ceil(math.log2(min(height, width))) - 3)


def orientation_counts(n_scales: int) -> List[int]:
    """Wedges per scale: one at both ends, 16 at scale 1 doubling every other scale."""
    counts = [1]
    for j in range(1, n_scales - 1):
        counts.append(COARSEST_WEDGES * 2 ** math.ceil((j - 1) / 2))
    counts.append(1)
    return counts


def _window_pair(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Smooth (rising, falling) ramps on [0, 1] with rising**2 + falling**2 == 1."""
    x = np.asarray(x, dtype=np.float64)
    rise = np.zeros_like(x)
    fall = np.zeros_like(x)
    inside = (x > 0) & (x < 1)
    xi = x[inside]
    with np.errstate(divide="ignore", over="ignore"):
        fall[inside] = np.exp(1 - 1 / (1 - np.exp(1 - 1 / xi)))
        rise[inside] = np.exp(1 - 1 / (1 - np.exp(1 - 1 / (1 - xi))))
    fall[x <= 0] = 1.0
    rise[x >= 1] = 1.0
    norm = np.sqrt(rise ** 2 + fall ** 2)
    return rise / norm, fall / norm


def _radial_profile(t: np.ndarray) -> np.ndarray:
    # 1 on |t| <= 1, smooth decay to 0 at |t| = 2
    return _window_pair(np.abs(t) - 1.0)[1]


def _angle_coordinate(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Piecewise-linear-in-slope angle u in [0, 4), one unit per cardinal cone."""
    ax, ay = np.abs(x), np.abs(y)
    with np.errstate(divide="ignore", invalid="ignore"):
        east = (y / x + 1) / 2
        north = 1 + (1 - x / y) / 2
        west = 2 + (1 - y / -x) / 2
        south = 3 + (1 + x / -y) / 2
    u = np.select(
        [(x > 0) & (ay <= x), (y > 0) & (ax < y), (x < 0) & (ay <= ax), (y < 0) & (ax < ay)],
        [east, north, west, south],
        default=0.0,
    )
    return np.mod(u, 4.0)


def _angular_window(u: np.ndarray, index: int, n_wedges: int) -> np.ndarray:
    width = 4.0 / n_wedges
    ramp = width / 2
    s = np.mod(u - index * width + width / 4, 4.0)
    rise, _ = _window_pair(s / ramp)
    _, fall = _window_pair((s - width) / ramp)
    out = np.where(s < width, rise, fall)
    out[s >= width + ramp] = 0.0
    return out


def _wrap_window(weights: np.ndarray) -> _Window:
    rows, cols = np.nonzero(weights > 0)
    if rows.size == 0:
        raise TransformError("Empty curvelet window; image too small for the requested scales")

    def _extent_and_span(major: np.ndarray, minor: np.ndarray) -> Tuple[int, int]:
        extent = int(major.max() - major.min() + 1)
        order = np.argsort(major, kind="stable")
        _, starts = np.unique(major[order], return_index=True)
        lo = np.minimum.reduceat(minor[order], starts)
        hi = np.maximum.reduceat(minor[order], starts)
        return extent, int((hi - lo).max() + 1)

    by_rows = _extent_and_span(rows, cols)
    by_cols = _extent_and_span(cols, rows)[::-1]
    wrap_shape = by_rows if by_rows[0] * by_rows[1] <= by_cols[0] * by_cols[1] else by_cols
    return _Window(rows=rows, cols=cols, weights=weights[rows, cols], wrap_shape=wrap_shape)


@lru_cache(maxsize=8)
def plan(height: int, width: int) -> CurveletPlan:
    """
    Build (and cache) the window set for an image shape.

    Raises:
        TransformError: If either dimension is below 32 pixels.
    """
    if min(height, width) < MIN_SIZE:
        raise TransformError(f"Curvelet transform needs at least {MIN_SIZE}x{MIN_SIZE} pixels, got {height}x{width}")
    n_scales = scale_count(height, width)
    counts = orientation_counts(n_scales)

    k1 = (np.arange(height) - height // 2).astype(np.float64)[:, None]
    k2 = (np.arange(width) - width // 2).astype(np.float64)[None, :]

    def lowpass(j: int) -> np.ndarray:
        div = 3.0 * 2 ** (n_scales - 1 - j)
        return _radial_profile(k1 / (height / div)) * _radial_profile(k2 / (width / div))

    u = _angle_coordinate(np.broadcast_to(k1 / height, (height, width)), np.broadcast_to(k2 / width, (height, width)))

    windows: List[Tuple[_Window, ...]] = [(_wrap_window(lowpass(0)),)]
    previous = lowpass(0)
    for j in range(1, n_scales - 1):
        current = lowpass(j)
        radial = current * np.sqrt(np.clip(1.0 - previous ** 2, 0.0, None))
        windows.append(tuple(
            _wrap_window(radial * _angular_window(u, index, counts[j])) for index in range(counts[j])
        ))
        previous = current
    windows.append((_wrap_window(np.sqrt(np.clip(1.0 - previous ** 2, 0.0, None))),))

    logger.debug(f"Planned curvelet transform for {height}x{width}: {n_scales} scales, wedges {counts}")
    return CurveletPlan(shape=(height, width), windows=tuple(windows))


def forward_array(pixels: np.ndarray) -> Tuple[Tuple[np.ndarray, ...], ...]:
    pixels = np.asarray(pixels, dtype=np.float64)
    p = plan(*pixels.shape)
    spectrum = fft.fftshift(fft.fft2(pixels, norm="ortho"))
    scales = []
    for scale in p.windows:
        wedges = []
        for window in scale:
            wrapped = np.zeros(window.wrap_shape, dtype=np.complex128)
            wrapped[window.wrapped_index()] = window.weights * spectrum[window.rows, window.cols]
            wedges.append(fft.ifft2(wrapped, norm="ortho"))
        scales.append(tuple(wedges))
    return tuple(scales)


def validate_pyramid(coeffs: CurveletCoeffs) -> CurveletPlan:
    """
    Check a pyramid against the plan for its image shape.

    Raises:
        TransformError: On a wrong scale count, wedge count or grid shape.
    """
    p = plan(*coeffs.image_shape)
    if coeffs.orientation_counts() != p.orientation_counts():
        raise TransformError(
            f"Pyramid has wedge counts {coeffs.orientation_counts()}, expected {p.orientation_counts()}"
        )
    for j, (scale, wedges) in enumerate(zip(p.windows, coeffs.scales)):
        for index, (window, grid) in enumerate(zip(scale, wedges)):
            if np.shape(grid) != window.wrap_shape:
                raise TransformError(
                    f"Scale {j} wedge {index} has shape {np.shape(grid)}, expected {window.wrap_shape}"
                )
    return p


def inverse_array(coeffs: CurveletCoeffs) -> np.ndarray:
    p = validate_pyramid(coeffs)
    spectrum = np.zeros(p.shape, dtype=np.complex128)
    for scale, wedges in zip(p.windows, coeffs.scales):
        for window, grid in zip(scale, wedges):
            wrapped = fft.fft2(grid, norm="ortho")
            spectrum[window.rows, window.cols] += window.weights * wrapped[window.wrapped_index()]
    return np.real(fft.ifft2(fft.ifftshift(spectrum), norm="ortho"))


def curvelet_forward(image: BandImage) -> CurveletCoeffs:
    """
    Decompose a band into a tight-frame curvelet pyramid.

    Args:
        image: Band of at least 32x32 pixels.

    Returns:
        CurveletCoeffs with scale_count(height, width) scales; the sum of squared
        coefficient magnitudes equals the image energy.

    Raises:
        TransformError: If the image is too small.
    """
    return CurveletCoeffs(
        scales=forward_array(image.pixels),
        image_shape=image.shape,
        dx_um=image.dx_um,
        dy_um=image.dy_um,
        wavenumber_cm1=image.wavenumber_cm1,
    )


def curvelet_inverse(coeffs: CurveletCoeffs, like: Optional[BandImage] = None) -> BandImage:
    """
    Rebuild a band from a pyramid. Metadata comes from ``like`` when given,
    otherwise from the pyramid.

    Raises:
        TransformError: If the pyramid does not match the plan for its shape.
    """
    pixels = inverse_array(coeffs)
    if like is not None:
        return like.with_pixels(pixels)
    return BandImage(
        pixels=pixels,
        dx_um=coeffs.dx_um,
        dy_um=coeffs.dy_um,
        wavenumber_cm1=coeffs.wavenumber_cm1,
    )
