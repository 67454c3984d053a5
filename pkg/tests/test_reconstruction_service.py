import numpy as np
import pytest

from src.core.exceptions import ConfigError, InvalidImageError, ShapeMismatchError
from src.models.image_model import AcquisitionSet, HyperCube
from src.schemas.reconstruction_schema import FusionConfig
from src.services.acquisition_service import build_acquisition_set, simulate_sparse_acquisition
from src.services.evaluation_service import mse, ssim
from src.services.phantom_service import default_phantom_spec, generate_phantom
from src.services.reconstruction_service import (
    ReconstructionService,
    equalize_linear,
    fourier_interpolate,
    fuse_bands,
    reconstruct_band,
    reconstruct_set,
    resolve_cutoff,
)


@pytest.fixture
def cfg():
    return FusionConfig()


@pytest.fixture
def small_set(small_phantom):
    """Reference plus three sparse bands at r=4."""
    cube, _ = small_phantom
    bands = tuple(cube.band_at(w) for w in (1238.0, 1556.0, 1660.0, 1746.0))
    return build_acquisition_set(HyperCube(bands), 1660.0, 4)


@pytest.mark.parametrize("r", [2, 5, 10])
def test_constant_band_stays_constant(make_band, r):
    sparse = make_band(np.full((9, 6), 3.25), dy=0.5 * r)
    out = fourier_interpolate(sparse, 9 * r)
    np.testing.assert_allclose(out.pixels, 3.25, rtol=1e-6)


def test_vertical_sinusoid_is_recovered(make_band):
    r, h, cycles = 5, 40, 5
    rows = np.arange(h)[:, None]
    sparse = make_band(np.repeat(np.sin(2 * np.pi * cycles * rows / h), 4, axis=1), dy=0.5 * r)

    out = fourier_interpolate(sparse, h * r, sigma_frac=4.0)

    fine = np.arange(h * r)[:, None]
    truth = np.repeat(np.sin(2 * np.pi * cycles * fine / (h * r)), 4, axis=1)
    error = np.linalg.norm(out.pixels - truth) / np.linalg.norm(truth)
    assert error < 1e-2


def test_output_shape_and_spacing(make_band, rng):
    sparse = make_band(rng.random((20, 100)), dx=0.5, dy=2.5)
    out = fourier_interpolate(sparse, 100)
    assert out.shape == (100, 100)
    assert out.dy_um == out.dx_um == 0.5


@pytest.mark.parametrize("h", [7, 8])
def test_mean_preserved_for_odd_and_even_heights(make_band, rng, h):
    sparse = make_band(rng.random((h, 12)) + 1.0, dy=1.5)
    out = fourier_interpolate(sparse, 3 * h)
    assert np.isrealobj(out.pixels)
    assert out.pixels.mean() == pytest.approx(sparse.pixels.mean(), rel=1e-6)


def test_even_height_without_window_keeps_sampled_rows(make_band, rng):
    sparse = make_band(rng.random((8, 5)), dy=1.0)
    out = fourier_interpolate(sparse, 16, sigma_frac=None)
    np.testing.assert_allclose(out.pixels[::2], sparse.pixels, atol=1e-12)


def test_interpolate_rejects_bad_targets(make_band):
    sparse = make_band(np.zeros((10, 4)), dy=2.5)
    with pytest.raises(InvalidImageError):
        fourier_interpolate(sparse, 5)
    with pytest.raises(InvalidImageError):
        fourier_interpolate(sparse, 40)


def test_equalize_exact_linear_relation(make_band, rng):
    ref = make_band(rng.random((16, 16)))
    target = make_band(2.0 * ref.pixels + 3.0)
    result = equalize_linear(ref, target)
    assert result.gain == pytest.approx(2.0)
    assert result.offset == pytest.approx(3.0)
    np.testing.assert_allclose(result.band.pixels, target.pixels, atol=1e-12)
    assert not result.degenerate


def test_equalize_constant_reference_is_degenerate(make_band, rng):
    target = make_band(rng.random((8, 8)))
    result = equalize_linear(make_band(np.full((8, 8), 4.0)), target)
    assert result.degenerate
    assert result.gain == 0.0
    np.testing.assert_allclose(result.band.pixels, target.pixels.mean())


def test_equalize_residual_is_uncorrelated_with_reference(make_band, rng):
    ref = make_band(rng.random((20, 30)))
    target = make_band(rng.random((20, 30)))
    result = equalize_linear(ref, target)
    residual = result.band.pixels - target.pixels
    assert abs(np.mean(residual * (ref.pixels - ref.pixels.mean()))) < 1e-6
    assert result.band.pixels.mean() == pytest.approx(target.pixels.mean(), rel=1e-6)
    assert result.band.wavenumber_cm1 == target.wavenumber_cm1


def test_equalize_shape_mismatch(make_band):
    with pytest.raises(ShapeMismatchError):
        equalize_linear(make_band(np.zeros((4, 4))), make_band(np.zeros((4, 5))))


@pytest.mark.parametrize("r, expected", [(1, 3), (2, 2), (4, 1), (6, 0), (10, 0), (40, 0)])
def test_auto_cutoff(r, expected):
    assert resolve_cutoff("auto", 4, r) == expected


def test_explicit_cutoff_out_of_range():
    assert resolve_cutoff(2, 4, 10) == 2
    with pytest.raises(ConfigError):
        resolve_cutoff(4, 4, 10)


def test_all_scales_from_band_is_identity(make_band, rng):
    interp = make_band(rng.random((64, 64)))
    reference = make_band(rng.random((64, 64)))
    fused = fuse_bands(interp, reference, 4, FusionConfig(cutoff_scale=2))
    np.testing.assert_allclose(fused.pixels, interp.pixels, rtol=1e-6, atol=1e-9)


def test_identical_reference_is_identity(make_band, rng, cfg):
    interp = make_band(rng.random((64, 64)))
    for cutoff in ("auto", 0, 1):
        fused = fuse_bands(interp, interp, 10, cfg.model_copy(update={"cutoff_scale": cutoff}))
        np.testing.assert_allclose(fused.pixels, interp.pixels, rtol=1e-6, atol=1e-9)


def test_fuse_shape_mismatch(make_band, cfg):
    with pytest.raises(ShapeMismatchError):
        fuse_bands(make_band(np.zeros((64, 64))), make_band(np.zeros((64, 65))), 2, cfg)


@pytest.fixture(scope="module")
def default_cube():
    return generate_phantom(default_phantom_spec(seed=0))[0]


# bands carrying the shared protein spectrum; 908 and 1746 cm-1 barely follow the reference
@pytest.mark.parametrize("wavenumber", [1396.0, 1456.0, 1536.0, 1556.0, 1662.0, 1668.0])
def test_fusion_beats_interpolation(default_cube, wavenumber, cfg):
    reference = default_cube.band_at(1660.0)
    truth = default_cube.band_at(wavenumber)

    result = reconstruct_band(simulate_sparse_acquisition(truth, 10), reference, cfg)

    assert result.fused.shape == truth.shape
    assert np.all(np.isfinite(result.fused.pixels))
    assert mse(truth, result.fused) < mse(truth, result.interpolated)
    assert ssim(truth, result.fused) > ssim(truth, result.interpolated)


def test_r1_band_passes_through(small_phantom, cfg):
    cube, _ = small_phantom
    band = cube.band_at(1238.0)
    result = reconstruct_band(band, cube.band_at(1660.0), cfg)
    assert result.fused is band
    assert result.equalization is None


def test_empty_set_yields_reference_only(make_band, cfg, rng):
    reference = make_band(rng.random((40, 40)))
    cube = reconstruct_set(AcquisitionSet(reference=reference), cfg)
    assert cube.n_bands == 1
    assert cube.bands[0] == reference


async def test_concurrent_matches_serial(small_set, cfg):
    serial = reconstruct_set(small_set, cfg)
    concurrent = await ReconstructionService(max_workers=2).reconstruct_set(small_set, cfg)
    assert concurrent == serial
    assert concurrent.band_at(1660.0) == small_set.reference


async def test_full_phantom_set_at_r10(small_phantom, cfg):
    cube, _ = small_phantom
    acq = build_acquisition_set(cube, 1660.0, 10)
    out = await ReconstructionService().reconstruct_set(acq, cfg)
    assert out.n_bands == 28
    assert out.wavenumbers == cube.wavenumbers
    assert out.shape == cube.shape
    assert out.dy_um == out.dx_um
