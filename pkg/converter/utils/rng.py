import numpy as np

# Independent draw streams derived from one run seed
STIMULUS_STREAM = 0
PIPELINE_STREAM = 1


def seeded_generator(seed: int, stream: int) -> np.random.Generator:
    """Reproducible generator for one consumer of a run seed."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(stream,)))
