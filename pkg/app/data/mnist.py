"""
Locating the cached MNIST files on disk
"""
from pathlib import Path
from typing import Tuple, Union

from app.data.dataset import Dataset, Split
from app.data.idx import load_idx

TRAIN_IMAGES = "train-images-idx3-ubyte.gz"
TRAIN_LABELS = "train-labels-idx1-ubyte.gz"
TEST_IMAGES = "t10k-images-idx3-ubyte.gz"
TEST_LABELS = "t10k-labels-idx1-ubyte.gz"

SPLIT_FILES = {
    Split.TRAIN: (TRAIN_IMAGES, TRAIN_LABELS),
    Split.TEST: (TEST_IMAGES, TEST_LABELS),
}


def _resolve(data_dir: Path, name: str) -> Path:
    """Accept the gzipped file or its decompressed sibling"""
    for candidate in (data_dir / name, data_dir / name[: -len(".gz")]):
        if candidate.exists():
            return candidate
    raise FileNotFoundError(f"{data_dir / name} not found (run `ppf-qsnn fetch` first)")


def split_paths(data_dir: Union[str, Path], split: Split) -> Tuple[Path, Path]:
    data_dir = Path(data_dir)
    images, labels = SPLIT_FILES[Split(split)]
    return _resolve(data_dir, images), _resolve(data_dir, labels)


def has_mnist(data_dir: Union[str, Path]) -> bool:
    try:
        for split in Split:
            split_paths(data_dir, split)
    except FileNotFoundError:
        return False
    return True


def load_split(data_dir: Union[str, Path], split: Split) -> Dataset:
    images, labels = split_paths(data_dir, split)
    return load_idx(images, labels, Split(split))
