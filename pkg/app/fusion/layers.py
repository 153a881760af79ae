"""
Dense layers and activations for the readout heads
"""
from dataclasses import dataclass

import numpy as np

from app.errors import InvalidInputError, ShapeError


@dataclass
class LinearLayer:
    """y = w x + b with w of shape (d_out, d_in)"""

    w: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if self.w.ndim != 2 or self.b.shape != (self.w.shape[0],):
            raise ShapeError(f"incompatible weight {self.w.shape} and bias {self.b.shape}")
        if not (np.all(np.isfinite(self.w)) and np.all(np.isfinite(self.b))):
            raise InvalidInputError("layer weights must be finite")

    @property
    def d_in(self) -> int:
        return self.w.shape[1]

    @property
    def d_out(self) -> int:
        return self.w.shape[0]

    @classmethod
    def glorot(cls, d_in: int, d_out: int, rng: np.random.Generator) -> "LinearLayer":
        """Uniform in +-sqrt(6 / (d_in + d_out)), zero bias"""
        limit = np.sqrt(6.0 / (d_in + d_out))
        return cls(rng.uniform(-limit, limit, size=(d_out, d_in)), np.zeros(d_out))


def linear_forward(layer: LinearLayer, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (layer.d_in,):
        raise ShapeError(f"layer expects {layer.d_in} inputs, got shape {x.shape}")
    return x @ layer.w.T + layer.b


def relu(x) -> np.ndarray:
    return np.maximum(0.0, np.asarray(x, dtype=float))


def softmax(q) -> np.ndarray:
    """Row-wise softmax with the max subtracted before exponentiation"""
    q = np.asarray(q, dtype=float)
    z = np.exp(q - np.max(q, axis=-1, keepdims=True))
    return z / np.sum(z, axis=-1, keepdims=True)
