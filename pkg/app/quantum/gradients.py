"""
Parameter-shift gradients of <Z> readouts

Every trainable op is a Pauli rotation exp(-i theta P / 2), for which
d<Z>/dtheta = (<Z>(theta + pi/2) - <Z>(theta - pi/2)) / 2 exactly. A
parameter used by several ops (shared Rw angle) collects one shifted pair
per occurrence.
"""
import numpy as np

from app.errors import ShapeError
from app.quantum.circuit import CircuitSpec, Source, check_data_angles, check_params, execute

SHIFT = np.pi / 2


def parametric_positions(spec: CircuitSpec):
    """(op position, param index) for every trainable op, in circuit order"""
    return [(pos, op.index) for pos, op in enumerate(spec.ops) if op.source == Source.PARAM]


def param_shift_grad(spec: CircuitSpec, data_angles, params, upstream) -> np.ndarray:
    """Sum_k upstream_k * d<Z_k>/dtheta_j for every circuit parameter j

    With batched data angles (B, n) the upstream has shape (B, n) and the
    result is summed over the batch.
    """
    data = check_data_angles(spec, data_angles)
    thetas = check_params(spec, params)
    upstream = np.asarray(upstream, dtype=float)
    expected = data.shape[:-1] + (spec.n_qubits,)
    if upstream.shape != expected:
        raise ShapeError(f"upstream must have shape {expected}, got {upstream.shape}")

    grad = np.zeros(spec.n_params)
    if not np.any(upstream):
        return grad

    for pos, index in parametric_positions(spec):
        plus = execute(spec, data, thetas, shift=(pos, SHIFT))
        minus = execute(spec, data, thetas, shift=(pos, -SHIFT))
        grad[index] += np.sum(upstream * (plus - minus)) / 2.0
    return grad


def circuit_evaluations(spec: CircuitSpec) -> int:
    """Batched simulations needed by one forward pass plus its gradient"""
    return 1 + 2 * len(parametric_positions(spec))
