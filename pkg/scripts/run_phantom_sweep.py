import asyncio
import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from src.schemas.reconstruction_schema import FusionConfig  # noqa: E402
from src.services.evaluation_service import SweepService  # noqa: E402
from src.services.phantom_service import default_phantom_spec, generate_phantom  # noqa: E402

# Configuration
SEED = 0
SIZE = 128
FACTORS = [1, 2, 4, 6, 10, 20, 40]
REFERENCE_WAVENUMBER = 1660.0


def run_sweep():
    print(f"Generating {SIZE}x{SIZE} phantom (seed {SEED})...")
    cube, labels = generate_phantom(default_phantom_spec(seed=SEED, width=SIZE, height=SIZE))
    print(f"Phantom: {cube.n_bands} bands, classes {list(labels.classes_present())}")

    try:
        report = asyncio.run(
            SweepService().spacing_sweep([cube], REFERENCE_WAVENUMBER, FACTORS, FusionConfig())
        )
    except Exception as e:
        print(f" FAILED: {e}")
        return 1

    print(f"{'r':>4} {'dy (um)':>8} {'mse':>12} {'ssim':>8}")
    for agg in report.aggregates:
        print(f"{agg.r:>4} {agg.dy_um:>8g} {agg.mse_mean:>12.4g} {agg.ssim_mean:>8.4f}")

    means = [agg.mse_mean for agg in report.aggregates]
    if all(b >= a for a, b in zip(means, means[1:])):
        print(" SUCCESS: mean MSE grows with row spacing")
        return 0
    print(" WARNING: mean MSE is not monotone in r")
    return 1


if __name__ == "__main__":
    sys.exit(run_sweep())
