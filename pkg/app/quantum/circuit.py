"""
Declarative circuit layouts and batched execution

The default layout is the quantum branch of the hybrid model:
Hadamard on every qubit, an RY data-encoding layer, a trainable
Rz.Rx.Rz combination gate per qubit, then a CNOT chain.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from app.errors import ConfigurationError, InvalidInputError, ShapeError
from app.quantum.gates import HADAMARD, ROTATIONS, GateKind
from app.quantum.statevector import apply_cnot, apply_single, z_expectations, zero_amplitudes

DATA_ANGLE_MAX = np.pi / 2
_ANGLE_SLACK = 1e-12


@dataclass(frozen=True)
class HadamardAll:
    """H on every qubit"""


@dataclass(frozen=True)
class DataRY:
    """RY(data_angles[slots[k]]) on qubit k"""

    slots: Tuple[int, ...]


@dataclass(frozen=True)
class ROmegaAll:
    """Rz(a) then Rx(b) then Rz(c) on qubit k, with (a, b, c) = params[k]"""

    params: Tuple[Tuple[int, int, int], ...]


@dataclass(frozen=True)
class ParamRotation:
    """Trainable single-axis rotation on qubit k with angle params[k]"""

    axis: GateKind
    params: Tuple[int, ...]


@dataclass(frozen=True)
class CnotChain:
    """CNOT q_k -> q_{k+1}; with ``ring`` also q_{n-1} -> q_0"""

    ring: bool = False


Layer = Union[HadamardAll, DataRY, ROmegaAll, ParamRotation, CnotChain]


class Source(str, Enum):
    FIXED = "fixed"
    DATA = "data"
    PARAM = "param"


@dataclass(frozen=True)
class Op:
    """One primitive gate of a compiled circuit"""

    kind: GateKind
    target: int
    source: Source = Source.FIXED
    index: int = -1
    control: Optional[int] = None


@dataclass(frozen=True)
class CircuitSpec:
    """Gate layout of an n-qubit variational circuit"""

    n_qubits: int
    layers: Tuple[Layer, ...]
    n_data_slots: int
    n_params: int
    ops: Tuple[Op, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ConfigurationError("n_qubits", f"must be >= 1, got {self.n_qubits}")
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "ops", tuple(self._compile()))

    @classmethod
    def default(cls, n_qubits: int, shared_omega: bool = False, cnot_ring: bool = False) -> "CircuitSpec":
        """HadamardAll -> DataRY -> ROmegaAll -> CnotChain"""
        if shared_omega:
            omega = tuple((k, k, k) for k in range(n_qubits))
            n_params = n_qubits
        else:
            omega = tuple((3 * k, 3 * k + 1, 3 * k + 2) for k in range(n_qubits))
            n_params = 3 * n_qubits
        layers = (
            HadamardAll(),
            DataRY(tuple(range(n_qubits))),
            ROmegaAll(omega),
            CnotChain(ring=cnot_ring),
        )
        return cls(n_qubits, layers, n_data_slots=n_qubits, n_params=n_params)

    def _compile(self) -> List[Op]:
        n = self.n_qubits
        ops: List[Op] = []

        def check(entries: Sequence, limit: int, what: str, width: int = 1):
            """One entry per qubit; an entry is an index, or a tuple of ``width`` indices"""
            if len(entries) != n:
                raise ConfigurationError("layers", f"{what} layer needs {n} entries, got {len(entries)}")
            for entry in entries:
                indices = (entry,) if width == 1 else tuple(entry)
                if len(indices) != width:
                    raise ConfigurationError("layers", f"{what} entry {entry!r} needs {width} indices")
                for i in indices:
                    if not 0 <= i < limit:
                        raise ConfigurationError("layers", f"{what} index {i} outside [0, {limit})")

        for layer in self.layers:
            if isinstance(layer, HadamardAll):
                ops.extend(Op(GateKind.H, q) for q in range(n))
            elif isinstance(layer, DataRY):
                check(layer.slots, self.n_data_slots, "data")
                ops.extend(Op(GateKind.RY, q, Source.DATA, s) for q, s in enumerate(layer.slots))
            elif isinstance(layer, ROmegaAll):
                check(layer.params, self.n_params, "param", width=3)
                for q, (z1, x, z2) in enumerate(layer.params):
                    ops.append(Op(GateKind.RZ, q, Source.PARAM, z1))
                    ops.append(Op(GateKind.RX, q, Source.PARAM, x))
                    ops.append(Op(GateKind.RZ, q, Source.PARAM, z2))
            elif isinstance(layer, ParamRotation):
                if layer.axis not in ROTATIONS:
                    raise ConfigurationError("layers", f"{layer.axis} is not a rotation axis")
                check(layer.params, self.n_params, "param")
                ops.extend(Op(layer.axis, q, Source.PARAM, p) for q, p in enumerate(layer.params))
            elif isinstance(layer, CnotChain):
                pairs = [(k, k + 1) for k in range(n - 1)]
                if layer.ring and n > 2:
                    pairs.append((n - 1, 0))
                ops.extend(Op(GateKind.CNOT, t, control=c) for c, t in pairs)
            else:
                raise ConfigurationError("layers", f"unknown layer {layer!r}")
        return ops


def check_data_angles(spec: CircuitSpec, data_angles) -> np.ndarray:
    data = np.asarray(data_angles, dtype=float)
    if data.ndim not in (1, 2) or data.shape[-1] != spec.n_data_slots:
        raise ShapeError(
            f"data angles must have shape (..., {spec.n_data_slots}), got {data.shape}"
        )
    if np.any(data < -_ANGLE_SLACK) or np.any(data > DATA_ANGLE_MAX + _ANGLE_SLACK):
        raise InvalidInputError("data angles must lie in [0, pi/2]")
    return data


def check_params(spec: CircuitSpec, params) -> np.ndarray:
    thetas = np.asarray(params, dtype=float)
    if thetas.shape != (spec.n_params,):
        raise ShapeError(f"expected {spec.n_params} circuit parameters, got shape {thetas.shape}")
    if not np.all(np.isfinite(thetas)):
        raise InvalidInputError("circuit parameters must be finite")
    return thetas


def execute(
    spec: CircuitSpec,
    data: np.ndarray,
    thetas: np.ndarray,
    shift: Optional[Tuple[int, float]] = None,
) -> np.ndarray:
    """Run validated inputs; ``shift`` = (op position, delta) perturbs one parametric op"""
    n = spec.n_qubits
    batch = data.shape[:-1]
    amps = zero_amplitudes(n, batch)
    for pos, op in enumerate(spec.ops):
        if op.kind == GateKind.CNOT:
            amps = apply_cnot(amps, op.control, op.target, n)
            continue
        if op.kind == GateKind.H:
            matrix = HADAMARD
        else:
            angle = data[..., op.index] if op.source == Source.DATA else thetas[op.index]
            if shift is not None and shift[0] == pos:
                angle = angle + shift[1]
            matrix = ROTATIONS[op.kind](angle)
        amps = apply_single(amps, matrix, op.target, n)
    return z_expectations(amps, n)


def run_circuit(spec: CircuitSpec, data_angles, params) -> np.ndarray:
    """<Z> per qubit after running the layout from |0...0>

    ``data_angles`` may be (n_data_slots,) or batched (B, n_data_slots);
    the result has the matching shape (n,) or (B, n).
    """
    data = check_data_angles(spec, data_angles)
    thetas = check_params(spec, params)
    return execute(spec, data, thetas)
