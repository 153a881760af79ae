"""
Dense statevector simulation kernels

Qubit ordering is little-endian: qubit k is bit k of the amplitude index.
Kernels accept amplitude arrays with optional leading batch dimensions,
shape (..., 2**n).
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from app.config import settings
from app.errors import ConfigurationError, QubitIndexError, ShapeError
from app.quantum.gates import Gate, GateKind

NORM_TOLERANCE = 1e-10


@dataclass(frozen=True)
class StateVector:
    """Pure state of an n-qubit register"""

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != (2**self.n_qubits,):
            raise ShapeError(
                f"{self.n_qubits} qubits need {2**self.n_qubits} amplitudes, "
                f"got shape {amps.shape}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


def zero_amplitudes(n_qubits: int, batch_shape=()) -> np.ndarray:
    """|0...0> amplitudes, optionally repeated over a batch"""
    amps = np.zeros(tuple(batch_shape) + (2**n_qubits,), dtype=complex)
    amps[..., 0] = 1.0
    return amps


def new_state(n_qubits: int) -> StateVector:
    """Ground state |0...0> of an n-qubit register"""
    if not 1 <= n_qubits <= settings.max_qubits:
        raise ConfigurationError(
            "n_qubits", f"must be in [1, {settings.max_qubits}], got {n_qubits}"
        )
    return StateVector(n_qubits, zero_amplitudes(n_qubits))


def apply_single(amps: np.ndarray, matrix: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """Apply a (..., 2, 2) matrix to one qubit of (..., 2**n) amplitudes"""
    batch = amps.shape[:-1]
    view = amps.reshape(batch + (2 ** (n_qubits - 1 - qubit), 2, 2**qubit))
    out = np.einsum("...ij,...ajb->...aib", matrix, view)
    return out.reshape(out.shape[:-3] + (2**n_qubits,))


@lru_cache(maxsize=256)
def _cnot_permutation(control: int, target: int, n_qubits: int) -> np.ndarray:
    index = np.arange(2**n_qubits)
    flip = ((index >> control) & 1) << target
    return index ^ flip


def apply_cnot(amps: np.ndarray, control: int, target: int, n_qubits: int) -> np.ndarray:
    """Flip the target bit on every basis state whose control bit is set"""
    return amps[..., _cnot_permutation(control, target, n_qubits)]


@lru_cache(maxsize=64)
def z_signs(n_qubits: int) -> np.ndarray:
    """(2**n, n) matrix of Pauli-Z eigenvalues, +1 for bit 0 and -1 for bit 1"""
    index = np.arange(2**n_qubits)[:, None]
    bits = (index >> np.arange(n_qubits)[None, :]) & 1
    signs = 1.0 - 2.0 * bits
    signs.setflags(write=False)
    return signs


def z_expectations(amps: np.ndarray, n_qubits: int) -> np.ndarray:
    """<Z_k> for every qubit k, shape (..., n)"""
    probs = np.abs(amps) ** 2
    return probs @ z_signs(n_qubits)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Return the state after one gate"""
    gate.validate(state.n_qubits)
    if gate.kind == GateKind.CNOT:
        amps = apply_cnot(state.amps, gate.control, gate.target, state.n_qubits)
    else:
        amps = apply_single(state.amps, gate.matrix(), gate.target, state.n_qubits)
    return StateVector(state.n_qubits, amps)


def expval_z(state: StateVector, qubit: int) -> float:
    """Tr(rho_qubit . sigma_z) for one qubit"""
    if not 0 <= qubit < state.n_qubits:
        raise QubitIndexError(f"qubit {qubit} outside a {state.n_qubits}-qubit register")
    probs = state.probabilities
    signs = z_signs(state.n_qubits)[:, qubit]
    return float(np.clip(probs @ signs, -1.0, 1.0))
