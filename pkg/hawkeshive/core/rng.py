"""
Counter-based random streams keyed by (seed, stream index).
"""

import numpy as np


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Independent Philox generator for a master seed and a stream path."""
    entropy = [int(seed), *(int(s) for s in stream)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
