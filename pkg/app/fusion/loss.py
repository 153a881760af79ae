"""
Proportional fusion of head probabilities and the NLL objective
"""
import numpy as np

from app.errors import InvalidInputError, ShapeError

N_CLASSES = 10
PROB_FLOOR = 1e-12
_SUM_TOLERANCE = 1e-9


def check_xi(xi: float) -> float:
    xi = float(xi)
    if not 0.0 <= xi <= 1.0:
        raise InvalidInputError(f"quantum proportion xi must be in [0, 1], got {xi}")
    return xi


def validate_probs(p, name: str = "probabilities") -> np.ndarray:
    """Check that every row is a probability vector"""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise InvalidInputError(f"{name} must lie in [0, 1]")
    if np.any(np.abs(p.sum(axis=-1) - 1.0) > _SUM_TOLERANCE):
        raise InvalidInputError(f"{name} must sum to 1")
    return p


def fuse(q_quantum, q_classical, xi: float) -> np.ndarray:
    """Q_h = xi Q_q + (1 - xi) Q_c"""
    xi = check_xi(xi)
    q_quantum = validate_probs(q_quantum, "quantum probabilities")
    q_classical = validate_probs(q_classical, "classical probabilities")
    if q_quantum.shape != q_classical.shape:
        raise ShapeError(f"cannot fuse {q_quantum.shape} with {q_classical.shape}")
    return xi * q_quantum + (1.0 - xi) * q_classical


def predict(q_h) -> np.ndarray:
    """Index of the largest probability; ties go to the lowest class"""
    return np.argmax(np.asarray(q_h), axis=-1)


def check_labels(labels, n: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.shape != (n,):
        raise ShapeError(f"expected {n} labels, got shape {labels.shape}")
    if not np.issubdtype(labels.dtype, np.integer):
        raise InvalidInputError("labels must be integers")
    if np.any(labels < 0) or np.any(labels >= N_CLASSES):
        raise InvalidInputError(f"labels must lie in [0, {N_CLASSES})")
    return labels


def nll_loss(batch_probs, labels) -> float:
    """-(1/N) sum log p(y_i | x_i), probabilities clamped at 1e-12"""
    probs = np.asarray(batch_probs, dtype=float)
    if probs.ndim != 2 or probs.shape[0] == 0:
        raise InvalidInputError("nll_loss needs a non-empty (N, classes) batch")
    labels = check_labels(labels, probs.shape[0])
    p_true = np.maximum(probs[np.arange(probs.shape[0]), labels], PROB_FLOOR)
    return float(0.0 - np.mean(np.log(p_true)))
