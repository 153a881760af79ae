"""
Uniform and Gaussian pixel noise for robustness testing
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from app.data.dataset import Dataset
from app.errors import InvalidInputError
from app.utils.seeding import Stream, derive_rng


class NoiseKind(str, Enum):
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class NoiseSpec:
    """Uniform noise is U(-level, +level); Gaussian noise has std = level"""

    kind: NoiseKind
    level: float
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if not self.level >= 0.0:
            raise InvalidInputError(f"noise level must be >= 0, got {self.level}")


def sample_noise(shape, spec: NoiseSpec, rng: np.random.Generator) -> np.ndarray:
    """Raw additive noise before clipping"""
    if spec.kind == NoiseKind.UNIFORM:
        return rng.uniform(-spec.level, spec.level, size=shape)
    return rng.normal(0.0, spec.level, size=shape)


def add_noise(pixels, spec: NoiseSpec, rng: np.random.Generator) -> np.ndarray:
    """pixels + noise, clipped to [0, 1]; level 0 returns an unchanged copy"""
    pixels = np.asarray(pixels)
    if spec.level == 0.0:
        return pixels.copy()
    noisy = pixels + sample_noise(pixels.shape, spec, rng)
    return np.clip(noisy, 0.0, 1.0).astype(pixels.dtype)


def noisy_dataset(ds: Dataset, spec: NoiseSpec) -> Dataset:
    """Noise-corrupted copy; sample i draws from its own (seed, i) stream"""
    if spec.level == 0.0:
        return ds
    rows = [add_noise(row, spec, derive_rng(spec.seed, Stream.NOISE, i)) for i, row in enumerate(ds.images)]
    images = np.stack(rows) if rows else ds.images.copy()
    return Dataset(images, ds.labels, ds.split)
