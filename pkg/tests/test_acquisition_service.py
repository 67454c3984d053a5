import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.core.exceptions import ConfigError
from src.schemas.acquisition_schema import SamplingSpec, TimeModel
from src.services.acquisition_service import (
    acquisition_time,
    build_acquisition_set,
    data_fraction,
    protocol_time,
    simulate_sparse_acquisition,
)


@pytest.fixture
def time_model():
    return TimeModel(seconds_per_row=1.8)


def test_r1_returns_input_unchanged(make_band, rng):
    band = make_band(rng.random((10, 6)))
    assert simulate_sparse_acquisition(band, 1) == band


def test_keeps_every_rth_row_bit_exactly(make_band, rng):
    band = make_band(rng.random((23, 7)).astype(np.float32))
    sparse = simulate_sparse_acquisition(band, 4)
    assert sparse.height == math.ceil(23 / 4)
    assert sparse.dy_um == 4 * band.dx_um
    for i in range(0, band.height, 4):
        assert sparse.row(i // 4).tobytes() == band.row(i).tobytes()


def test_ten_row_band_at_r10_keeps_first_row(make_band, rng):
    band = make_band(rng.random((10, 3)))
    sparse = simulate_sparse_acquisition(band, 10)
    assert sparse.shape == (1, 3)
    np.testing.assert_array_equal(sparse.row(0), band.row(0))
    assert sparse.dy_um == pytest.approx(5.0)


def test_rejects_bad_factor(make_band):
    with pytest.raises(ValueError):
        simulate_sparse_acquisition(make_band(np.zeros((4, 4))), 0)


@pytest.mark.parametrize(
    "dy, fraction",
    [(0.5, 1.0), (1.0, 0.5), (5.0, 0.1), (20.0, 0.025), (3.0, 1 / 6)],
)
def test_data_fraction(dy, fraction):
    spec = SamplingSpec(dx_um=0.5, dy_um=dy)
    assert data_fraction(spec) == pytest.approx(fraction)
    assert data_fraction(spec) * spec.dy_um == pytest.approx(spec.dx_um)


@pytest.mark.parametrize(
    "dy, minutes",
    [(0.5, 90.0), (1.0, 45.0), (2.0, 22.5), (3.0, 15.0), (5.0, 9.0), (10.0, 4.5), (20.0, 2.25)],
)
def test_acquisition_time_table(dy, minutes, time_model):
    assert acquisition_time(SamplingSpec(dx_um=0.5, dy_um=dy), time_model) == pytest.approx(minutes)


def test_acquisition_time_strictly_decreasing(time_model):
    times = [acquisition_time(SamplingSpec(dx_um=0.5, dy_um=dy), time_model) for dy in (0.5, 1, 2, 3, 5, 10, 20)]
    assert all(b < a for a, b in zip(times, times[1:]))


def test_fixed_overhead_is_added_once(time_model):
    spec = SamplingSpec(dx_um=0.5, dy_um=5.0)
    model = time_model.model_copy(update={"fixed_overhead_s": 60.0})
    assert acquisition_time(spec, model) == pytest.approx(10.0)


def test_sampling_spec_rejects_non_integer_ratio():
    with pytest.raises(ValidationError):
        SamplingSpec(dx_um=0.5, dy_um=1.2)
    with pytest.raises(ValidationError):
        SamplingSpec(dx_um=1.0, dy_um=0.5)


def test_protocol_time_28_bands(time_model):
    protocol = protocol_time(SamplingSpec(dx_um=0.5, dy_um=5.0), time_model, n_bands=28)
    assert protocol.full_minutes == pytest.approx(28 * 90.0)
    assert protocol.sparse_minutes == pytest.approx(90.0 + 27 * 9.0)
    assert protocol.speedup == pytest.approx(7.5676, abs=1e-4)
    assert protocol.data_fraction == pytest.approx(0.1)


def test_protocol_time_rejects_bad_counts(time_model):
    with pytest.raises(ConfigError):
        protocol_time(SamplingSpec(), time_model, n_bands=2, n_reference_bands=3)


def test_build_acquisition_set_splits_reference(small_phantom):
    cube, _ = small_phantom
    acq = build_acquisition_set(cube, 1660.0, 10)
    assert acq.reference == cube.band_at(1660.0)
    assert len(acq.sparse_bands) == cube.n_bands - 1
    assert set(acq.factors()) == {10}
    assert all(b.height == math.ceil(cube.height / 10) for b in acq.sparse_bands)


def test_build_acquisition_set_unknown_reference(small_phantom):
    cube, _ = small_phantom
    with pytest.raises(ConfigError):
        build_acquisition_set(cube, 1234.5, 2)


def test_r1_set_keeps_every_band_whole(small_phantom):
    cube, _ = small_phantom
    acq = build_acquisition_set(cube, 1660.0, 1)
    bands = sorted((acq.reference,) + acq.sparse_bands, key=lambda b: b.wavenumber_cm1)
    assert tuple(bands) == cube.bands
