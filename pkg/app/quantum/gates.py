"""
Gate set and matrix realizations

All rotation builders broadcast over their angle arguments: a scalar angle
gives a (2, 2) matrix, an angle array of shape (B,) gives (B, 2, 2).
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from app.errors import InvalidInputError, QubitIndexError

_SQRT2_INV = 1.0 / np.sqrt(2.0)

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

CNOT_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


class GateKind(str, Enum):
    """Supported gates"""

    H = "H"
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    CNOT = "CNOT"
    ROMEGA = "ROmega"

    @property
    def n_params(self) -> int:
        return {GateKind.H: 0, GateKind.CNOT: 0, GateKind.ROMEGA: 3}.get(self, 1)


def _stack2(a00, a01, a10, a11) -> np.ndarray:
    rows = [np.stack(np.broadcast_arrays(a00, a01), axis=-1),
            np.stack(np.broadcast_arrays(a10, a11), axis=-1)]
    return np.stack(rows, axis=-2)


def rx_matrix(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta / 2).astype(complex)
    s = -1j * np.sin(theta / 2)
    return _stack2(c, s, s, c)


def ry_matrix(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta / 2).astype(complex)
    s = np.sin(theta / 2).astype(complex)
    return _stack2(c, -s, s, c)


def rz_matrix(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    zero = np.zeros_like(theta, dtype=complex)
    return _stack2(np.exp(-0.5j * theta), zero, zero, np.exp(0.5j * theta))


ROTATIONS = {
    GateKind.RX: rx_matrix,
    GateKind.RY: ry_matrix,
    GateKind.RZ: rz_matrix,
}


def romega_matrix(theta_z1, theta_x, theta_z2) -> np.ndarray:
    """Combination gate Rz(theta_z2) . Rx(theta_x) . Rz(theta_z1)"""
    return rz_matrix(theta_z2) @ rx_matrix(theta_x) @ rz_matrix(theta_z1)


@dataclass(frozen=True)
class Gate:
    """A single gate placed on the register"""

    kind: GateKind
    target: int
    control: Optional[int] = None
    params: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if len(self.params) != self.kind.n_params:
            raise InvalidInputError(
                f"{self.kind.value} takes {self.kind.n_params} angle(s), "
                f"got {len(self.params)}"
            )
        if not np.all(np.isfinite(self.params)):
            raise InvalidInputError(f"{self.kind.value} angles must be finite")
        if (self.kind == GateKind.CNOT) != (self.control is not None):
            raise InvalidInputError("a control qubit is required for CNOT and only CNOT")

    @property
    def qubits(self) -> Tuple[int, ...]:
        return (self.target,) if self.control is None else (self.control, self.target)

    def validate(self, n_qubits: int):
        """Check qubit indices against a register size"""
        for q in self.qubits:
            if not 0 <= q < n_qubits:
                raise QubitIndexError(
                    f"{self.kind.value} refers to qubit {q} on a {n_qubits}-qubit register"
                )
        if self.control is not None and self.control == self.target:
            raise QubitIndexError("CNOT control and target must differ")

    def matrix(self) -> np.ndarray:
        """2x2 matrix, or 4x4 for CNOT in (control, target) basis order"""
        if self.kind == GateKind.H:
            return HADAMARD
        if self.kind == GateKind.CNOT:
            return CNOT_MATRIX
        if self.kind == GateKind.ROMEGA:
            return romega_matrix(*self.params)
        return ROTATIONS[self.kind](self.params[0])
