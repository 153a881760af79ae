"""
Spiking front end of the classical branch

pixels -> Poisson spikes -> identity-coupled LIF layer (the spiking ReLU)
-> temporal average pool. Nothing here is trainable, so during
backpropagation the pooled rates are treated as fixed features.
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from app.errors import ShapeError
from app.spiking.encoding import EncoderConfig, SpikeTrain, poisson_encode
from app.spiking.lif import LIFParams, lif_run
from app.spiking.pooling import temporal_avg_pool
from app.utils.seeding import Stream, derive_rng


@dataclass(frozen=True)
class SpikingFrontEnd:
    encoder: EncoderConfig = EncoderConfig()
    lif: LIFParams = LIFParams()

    def encode(self, pixels: np.ndarray, stream: Stream, epoch: int, sample_ids: Sequence[int]) -> SpikeTrain:
        """Poisson spikes for a batch; sample i uses its own derived stream"""
        pixels = np.asarray(pixels, dtype=float)
        if pixels.ndim != 2 or pixels.shape[0] != len(sample_ids):
            raise ShapeError(
                f"pixels {pixels.shape} do not match {len(sample_ids)} sample ids"
            )
        trains = [
            poisson_encode(row, self.encoder, derive_rng(self.encoder.seed, stream, epoch, sid)).bits
            for row, sid in zip(pixels, sample_ids)
        ]
        return SpikeTrain(np.stack(trains))

    def rates(self, pixels: np.ndarray, stream: Stream, epoch: int, sample_ids: Sequence[int]) -> np.ndarray:
        """Pooled firing rates (B, d) after the LIF layer"""
        spikes = self.encode(pixels, stream, epoch, sample_ids)
        return temporal_avg_pool(lif_run(spikes, None, self.lif))
