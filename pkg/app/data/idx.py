"""
IDX (MNIST) binary format reader and writer

Layout: 2 zero bytes, a type code (0x08 = unsigned byte), a dimension
count, then one big-endian uint32 per dimension, then the raw data.
Files ending in .gz or starting with the gzip magic are decompressed
transparently.
"""
import gzip
import logging
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from app.data.dataset import Dataset, Split
from app.errors import IdxFormatError, ShapeError

logger = logging.getLogger(__name__)

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801
_GZIP_MAGIC = b"\x1f\x8b"

PathLike = Union[str, Path]


def _read_bytes(path: PathLike) -> bytes:
    raw = Path(path).read_bytes()
    if raw[:2] == _GZIP_MAGIC:
        try:
            return gzip.decompress(raw)
        except (OSError, EOFError) as e:
            raise IdxFormatError(str(path), 0, f"corrupt gzip stream ({e})") from e
    return raw


def _parse(path: PathLike, raw: bytes, magic: int) -> np.ndarray:
    name = str(path)
    if len(raw) < 4:
        raise IdxFormatError(name, len(raw), "file shorter than the 4-byte magic number")
    found = int.from_bytes(raw[:4], "big")
    if found != magic:
        raise IdxFormatError(name, 0, f"magic 0x{found:08x}, expected 0x{magic:08x}")

    n_dims = magic & 0xFF
    header_end = 4 + 4 * n_dims
    if len(raw) < header_end:
        raise IdxFormatError(name, len(raw), f"truncated header, {n_dims} dimensions expected")
    dims = tuple(int(d) for d in np.frombuffer(raw, dtype=">u4", count=n_dims, offset=4))

    expected = int(np.prod(dims))
    available = len(raw) - header_end
    if available < expected:
        raise IdxFormatError(name, len(raw), f"truncated data, {expected} bytes expected after header, found {available}")
    if available > expected:
        raise IdxFormatError(name, header_end + expected, f"{available - expected} trailing bytes")
    return np.frombuffer(raw, dtype=np.uint8, count=expected, offset=header_end).reshape(dims)


def read_images(path: PathLike) -> np.ndarray:
    """uint8 array of shape (N, rows, cols)"""
    return _parse(path, _read_bytes(path), IMAGES_MAGIC)


def read_labels(path: PathLike) -> np.ndarray:
    """uint8 array of shape (N,)"""
    return _parse(path, _read_bytes(path), LABELS_MAGIC)


def load_idx(images_path: PathLike, labels_path: PathLike, split: Split = Split.TRAIN) -> Dataset:
    """Pixels scaled to [0, 1] by /255, file order preserved"""
    images = read_images(images_path)
    labels = read_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise IdxFormatError(
            str(labels_path), 4, f"{labels.shape[0]} labels for {images.shape[0]} images"
        )
    if np.any(labels > 9):
        bad = int(np.argmax(labels > 9))
        raise IdxFormatError(str(labels_path), 8 + bad, f"label {labels[bad]} outside [0, 10)")

    pixels = images.reshape(images.shape[0], -1).astype(np.float32) / np.float32(255.0)
    logger.info(f"Loaded {images.shape[0]} {split.value} samples from {images_path}")
    return Dataset(pixels, labels.astype(np.int64), split)


def _encode(array: np.ndarray, magic: int) -> bytes:
    header = magic.to_bytes(4, "big") + np.asarray(array.shape, dtype=">u4").tobytes()
    return header + np.ascontiguousarray(array, dtype=np.uint8).tobytes()


def write_idx(images: np.ndarray, labels: np.ndarray, images_path: PathLike, labels_path: PathLike) -> Tuple[Path, Path]:
    """Write uint8 images (N, rows, cols) and labels (N,); .gz paths are compressed"""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    if images.ndim != 3 or labels.shape != (images.shape[0],):
        raise ShapeError(f"need images (N, rows, cols) and N labels, got {images.shape} and {labels.shape}")
    paths = []
    for array, magic, path in ((images, IMAGES_MAGIC, images_path), (labels, LABELS_MAGIC, labels_path)):
        blob = _encode(array, magic)
        path = Path(path)
        path.write_bytes(gzip.compress(blob, mtime=0) if path.suffix == ".gz" else blob)
        paths.append(path)
    return paths[0], paths[1]
