"""
Temporal average pooling of spike trains into firing rates
"""
import numpy as np

from app.errors import InvalidInputError
from app.spiking.encoding import SpikeTrain


def temporal_avg_pool(spikes: SpikeTrain) -> np.ndarray:
    """Mean spike count per neuron over the window, shape (..., d)"""
    if spikes.T < 1:
        raise InvalidInputError("cannot pool an empty spike train")
    return spikes.bits.sum(axis=-2, dtype=float) / spikes.T
