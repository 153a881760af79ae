"""
FRQI image encoding

A 2^n x 2^n image becomes a (2n+1)-qubit state: the position register
occupies the low 2n bits and the color qubit is the most significant bit,
so the amplitude of |c>|i> sits at index c * 4^n + i.
"""
import numpy as np

from app.errors import InvalidInputError
from app.quantum.statevector import StateVector


def _position_qubits(length: int) -> int:
    if length < 1:
        raise InvalidInputError("FRQI needs at least one pixel")
    bits = length.bit_length() - 1
    if length != 1 << bits or bits % 2:
        raise InvalidInputError(f"FRQI needs a power-of-4 pixel count, got {length}")
    return bits


def frqi_encode(pixels) -> StateVector:
    """Color-angle encoding with theta_i = pixel_i * pi/2"""
    values = np.asarray(pixels, dtype=float).ravel()
    position_qubits = _position_qubits(values.size)
    if np.any(values < 0.0) or np.any(values > 1.0) or not np.all(np.isfinite(values)):
        raise InvalidInputError("FRQI pixels must lie in [0, 1]")

    theta = values * (np.pi / 2)
    scale = 1.0 / np.sqrt(values.size)  # 1 / 2^n
    amps = np.concatenate([scale * np.cos(theta), scale * np.sin(theta)]).astype(complex)
    return StateVector(position_qubits + 1, amps)
