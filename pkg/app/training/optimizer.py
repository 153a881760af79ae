"""
Stochastic gradient descent with optional heavy-ball momentum
"""
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from app.errors import ShapeError


def sgd_step(
    params: np.ndarray,
    grads: np.ndarray,
    lr: float,
    momentum: float = 0.0,
    velocity: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """v <- momentum * v + g;  p <- p - lr * v

    ``params`` is updated in place and returned with the new velocity.
    """
    grads = np.asarray(grads, dtype=float)
    if params.shape != grads.shape:
        raise ShapeError(f"gradient shape {grads.shape} does not match parameters {params.shape}")
    if velocity is None:
        velocity = np.zeros_like(grads)
    elif velocity.shape != grads.shape:
        raise ShapeError(f"velocity shape {velocity.shape} does not match parameters {params.shape}")
    velocity = momentum * velocity + grads
    params -= lr * velocity
    return params, velocity


class SGD:
    """Applies sgd_step to a dict of named parameters, keeping a velocity per name"""

    def __init__(self, lr: float, momentum: float = 0.0):
        self.lr = lr
        self.momentum = momentum
        self.velocity: Dict[str, np.ndarray] = {}

    def step(self, params: Mapping[str, np.ndarray], grads: Mapping[str, np.ndarray]):
        missing = set(params) ^ set(grads)
        if missing:
            raise ShapeError(f"parameters and gradients disagree on {sorted(missing)}")
        for name in sorted(params):
            _, self.velocity[name] = sgd_step(
                params[name], grads[name], self.lr, self.momentum, self.velocity.get(name)
            )
