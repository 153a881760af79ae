"""
Deterministic random stream derivation

Every stochastic step (shuffling, Poisson spikes, noise, initialization)
draws from its own stream keyed by the run seed plus a purpose tag and
indices, so results do not depend on batching or thread count.
"""
from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    """Purpose tags keeping derived streams disjoint"""

    INIT = 1
    SHUFFLE = 2
    TRAIN_SPIKES = 3
    EVAL_SPIKES = 4
    NOISE = 5
    SUBSET = 6


def derive_rng(seed: int, stream: Stream, *keys: int) -> np.random.Generator:
    """Independent generator for (seed, stream, *keys)"""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, int(stream), *(int(k) for k in keys)]
    return np.random.default_rng(np.random.SeedSequence(entropy))
