"""
Analytic gradients of the fused NLL loss

Loss = -(1/N) sum_n log Q_h[n, y_n] with Q_h = xi Q_q + (1 - xi) Q_c.
The classical branch is differentiated through softmax, the linear layers
and the ReLU; the quantum branch through softmax and the readout down to
dLoss/d<Z_k>, after which the circuit parameters use the parameter-shift
rule.
"""
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from app.errors import MissingCacheError
from app.fusion.loss import PROB_FLOOR, check_labels
from app.fusion.model import ForwardCache, HybridModel
from app.quantum.gradients import param_shift_grad

_REQUIRED = ("rates", "q_c", "angles", "expz", "q_q", "q_h")


@dataclass
class Gradients:
    params: Dict[str, np.ndarray] = field(default_factory=dict)
    d_expz: Optional[np.ndarray] = None


def _softmax_backward(probs: np.ndarray, d_probs: np.ndarray) -> np.ndarray:
    inner = np.sum(d_probs * probs, axis=-1, keepdims=True)
    return probs * (d_probs - inner)


def _check_cache(model: HybridModel, cache: Optional[ForwardCache]):
    if cache is None:
        raise MissingCacheError("the whole cache")
    for name in _REQUIRED:
        if getattr(cache, name, None) is None:
            raise MissingCacheError(name)
    if model.hidden is not None and (cache.hidden_pre is None or cache.hidden_act is None):
        raise MissingCacheError("hidden activations")


def backward(model: HybridModel, cache: ForwardCache, labels, quantum: bool = True) -> Gradients:
    """Exact gradients for every trainable array of the model

    ``quantum=False`` skips the parameter-shift pass and leaves the theta
    gradient at zero (used by finite-difference checks of the heads).
    """
    _check_cache(model, cache)
    n = cache.q_h.shape[0]
    labels = check_labels(labels, n)
    rows = np.arange(n)

    d_qh = np.zeros_like(cache.q_h)
    d_qh[rows, labels] = -1.0 / (n * np.maximum(cache.q_h[rows, labels], PROB_FLOOR))

    grads: Dict[str, np.ndarray] = {}

    # Classical branch
    d_logits_c = _softmax_backward(cache.q_c, (1.0 - model.xi) * d_qh)
    features = cache.rates if model.hidden is None else cache.hidden_act
    grads["output.w"] = d_logits_c.T @ features
    grads["output.b"] = d_logits_c.sum(axis=0)
    if model.hidden is not None:
        d_act = d_logits_c @ model.output.w
        d_pre = d_act * (cache.hidden_pre > 0)
        grads["hidden.w"] = d_pre.T @ cache.rates
        grads["hidden.b"] = d_pre.sum(axis=0)

    # Quantum branch
    d_logits_q = _softmax_backward(cache.q_q, model.xi * d_qh)
    grads["readout.w"] = d_logits_q.T @ cache.expz
    grads["readout.b"] = d_logits_q.sum(axis=0)
    d_expz = d_logits_q @ model.readout.w

    if quantum and model.xi > 0.0:
        grads["thetas"] = param_shift_grad(model.circuit, cache.angles, model.thetas, d_expz)
    else:
        grads["thetas"] = np.zeros_like(model.thetas)

    return Gradients(grads, d_expz)
