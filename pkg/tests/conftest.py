import numpy as np
import pytest

from src.models.image_model import BandImage, HyperCube
from src.services.phantom_service import default_phantom_spec, generate_phantom


@pytest.fixture
def rng():
    """Seeded generator for test inputs."""
    return np.random.default_rng(1234)


@pytest.fixture
def make_band():
    """Factory for float64 bands with square 0.5 um pixels by default."""
    def _make(pixels, dx: float = 0.5, dy: float = 0.5, wavenumber: float = 1660.0) -> BandImage:
        return BandImage(pixels=np.asarray(pixels, dtype=np.float64), dx_um=dx, dy_um=dy, wavenumber_cm1=wavenumber)
    return _make


@pytest.fixture
def random_cube(rng):
    data = rng.standard_normal((3, 16, 16)).astype(np.float32)
    return HyperCube.from_array(data, [1236.0, 1550.0, 1660.0], dx_um=0.5, dy_um=0.5)


@pytest.fixture(scope="session")
def small_phantom():
    """96x96 default phantom with light noise, shared across modules."""
    return generate_phantom(default_phantom_spec(seed=7, width=96, height=96, noise_sigma=0.005))


@pytest.fixture(scope="session")
def flat_phantom():
    """Noiseless, texture-free phantom: every class pixel holds its exact signature."""
    spec = default_phantom_spec(seed=11, width=96, height=96, noise_sigma=0.0)
    return generate_phantom(spec.model_copy(update={"texture_scale": None}))
