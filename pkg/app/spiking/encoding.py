"""
Poisson rate encoding of pixel intensities into spike trains
"""
from dataclasses import dataclass

import numpy as np

from app.errors import ConfigurationError, InvalidInputError, ShapeError


@dataclass(frozen=True)
class SpikeTrain:
    """Binary spikes over discrete time, shape (..., T, d)"""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim < 2:
            raise ShapeError(f"spike train needs shape (..., T, d), got {bits.shape}")
        if bits.dtype != np.uint8:
            if np.any((bits != 0) & (bits != 1)):
                raise InvalidInputError("spike entries must be 0 or 1")
            bits = bits.astype(np.uint8)
        object.__setattr__(self, "bits", bits)

    @property
    def T(self) -> int:
        return self.bits.shape[-2]

    @property
    def d(self) -> int:
        return self.bits.shape[-1]

    @property
    def spike_count(self) -> int:
        return int(self.bits.sum())


@dataclass(frozen=True)
class EncoderConfig:
    """Poisson encoder settings; r_max is the per-step firing probability at pixel 1.0"""

    T: int = 20
    r_max: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.T <= 10000:
            raise ConfigurationError("T", f"must be in [1, 10000], got {self.T}")
        if not 0.0 < self.r_max <= 1.0:
            raise ConfigurationError("r_max", f"must be in (0, 1], got {self.r_max}")


def poisson_encode(pixels, cfg: EncoderConfig, rng: np.random.Generator) -> SpikeTrain:
    """Each step fires neuron i independently with probability pixels[i] * r_max"""
    values = np.asarray(pixels, dtype=float)
    if values.ndim != 1:
        raise ShapeError(f"expected a flat pixel vector, got shape {values.shape}")
    if np.any(values < 0.0) or np.any(values > 1.0) or not np.all(np.isfinite(values)):
        raise InvalidInputError("pixels must lie in [0, 1]")

    draws = rng.random((cfg.T, values.size))
    return SpikeTrain((draws < values * cfg.r_max).astype(np.uint8))
