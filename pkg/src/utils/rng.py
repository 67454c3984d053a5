import numpy as np

# Stream ids keep independent consumers of one seed from sharing draws
LAYOUT_STREAM = 0
TEXTURE_STREAM = 1
FOREST_STREAM = 2
SAMPLING_STREAM = 3
NOISE_STREAM = 1000


def rng_stream(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based Philox generator for a (seed, *keys) tuple."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, keys)])))
