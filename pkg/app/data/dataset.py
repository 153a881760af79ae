"""
In-memory datasets, deterministic subsetting and angle reduction
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from app.errors import InvalidInputError, ShapeError
from app.utils.seeding import Stream, derive_rng

N_CLASSES = 10


class Split(str, Enum):
    TRAIN = "train"
    TEST = "test"


@dataclass(frozen=True)
class Sample:
    pixels: np.ndarray
    label: int


@dataclass(frozen=True)
class Dataset:
    """Flattened images in [0, 1] (N, d) with integer labels (N,)"""

    images: np.ndarray
    labels: np.ndarray
    split: Split = Split.TRAIN

    def __post_init__(self):
        images = np.asarray(self.images)
        labels = np.asarray(self.labels, dtype=np.int64)
        if images.ndim != 2 or labels.shape != (images.shape[0],):
            raise ShapeError(f"images {images.shape} and labels {labels.shape} disagree")
        if images.size and (images.min() < 0.0 or images.max() > 1.0):
            raise InvalidInputError("pixels must lie in [0, 1]")
        if labels.size and (labels.min() < 0 or labels.max() >= N_CLASSES):
            raise InvalidInputError(f"labels must lie in [0, {N_CLASSES})")
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "split", Split(self.split))

    def __len__(self) -> int:
        return self.labels.shape[0]

    def __getitem__(self, index: int) -> Sample:
        return Sample(self.images[index], int(self.labels[index]))

    def take(self, indices) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(self.images[indices], self.labels[indices], self.split)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=N_CLASSES)


def subset(ds: Dataset, k: int, seed: int) -> Dataset:
    """Seeded Fisher-Yates shuffle, then the first k samples"""
    if not 1 <= k <= len(ds):
        raise InvalidInputError(f"subset size must be in [1, {len(ds)}], got {k}")
    order = derive_rng(seed, Stream.SUBSET).permutation(len(ds))
    return ds.take(order[:k])


def reduce_to_angles(pixels, n: int) -> np.ndarray:
    """Mean of n near-equal contiguous chunks, scaled to [0, pi/2]

    Works on a single flattened image (d,) or a batch (B, d).
    """
    pixels = np.asarray(pixels, dtype=float)
    d = pixels.shape[-1]
    if not 1 <= n <= d:
        raise InvalidInputError(f"angle count must be in [1, {d}], got {n}")
    # np.array_split boundaries: the first d % n chunks get one extra element
    base, extra = divmod(d, n)
    sizes = np.full(n, base)
    sizes[:extra] += 1
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    means = np.add.reduceat(pixels, starts, axis=-1) / sizes
    return np.clip(means, 0.0, 1.0) * (np.pi / 2)
