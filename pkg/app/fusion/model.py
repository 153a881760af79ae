"""
Hybrid model: spiking classical head and variational quantum head in
parallel, fused in proportion xi
"""
import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from app.errors import ConfigurationError, ShapeError
from app.fusion.layers import LinearLayer, linear_forward, relu, softmax
from app.fusion.loss import N_CLASSES, check_xi, fuse
from app.quantum.circuit import CircuitSpec, CnotChain, run_circuit
from app.spiking.encoding import EncoderConfig
from app.spiking.frontend import SpikingFrontEnd
from app.spiking.lif import LIFParams
from app.utils.seeding import Stream, derive_rng

logger = logging.getLogger(__name__)

N_PIXELS = 784
MODEL_FORMAT_VERSION = 1


@dataclass
class ForwardCache:
    """Intermediates of one batched forward pass"""

    rates: np.ndarray
    hidden_pre: Optional[np.ndarray]
    hidden_act: Optional[np.ndarray]
    q_c: np.ndarray
    angles: np.ndarray
    expz: np.ndarray
    q_q: np.ndarray
    q_h: np.ndarray


@dataclass
class HybridModel:
    """Classical head [Linear(784->h), ReLU, Linear(h->10)] (or a single
    Linear(784->10) when h = 0), quantum head {circuit, thetas,
    Linear(n_qubits->10)}, and the quantum proportion xi."""

    hidden: Optional[LinearLayer]
    output: LinearLayer
    circuit: CircuitSpec
    thetas: np.ndarray
    readout: LinearLayer
    xi: float
    frontend: SpikingFrontEnd = SpikingFrontEnd()

    def __post_init__(self):
        self.xi = check_xi(self.xi)
        self.thetas = np.asarray(self.thetas, dtype=float)
        if self.thetas.shape != (self.circuit.n_params,):
            raise ShapeError(f"circuit needs {self.circuit.n_params} thetas, got {self.thetas.shape}")
        if self.hidden is not None and self.output.d_in != self.hidden.d_out:
            raise ShapeError("hidden and output layers do not chain")
        if self.output.d_out != N_CLASSES or self.readout.d_out != N_CLASSES:
            raise ShapeError(f"both heads must emit {N_CLASSES} classes")
        if self.readout.d_in != self.circuit.n_qubits:
            raise ShapeError("quantum readout width must equal the qubit count")

    @classmethod
    def initialize(
        cls,
        *,
        n_qubits: int = 5,
        hidden: int = 100,
        xi: float = 0.8,
        seed: int = 0,
        n_inputs: int = N_PIXELS,
        frontend: Optional[SpikingFrontEnd] = None,
        shared_omega: bool = False,
        cnot_ring: bool = False,
    ) -> "HybridModel":
        """Glorot-initialized heads, thetas uniform in [-pi, pi)"""
        if hidden < 0:
            raise ConfigurationError("hidden", f"must be >= 0, got {hidden}")
        rng = derive_rng(seed, Stream.INIT)
        if hidden:
            hidden_layer = LinearLayer.glorot(n_inputs, hidden, rng)
            output = LinearLayer.glorot(hidden, N_CLASSES, rng)
        else:
            hidden_layer = None
            output = LinearLayer.glorot(n_inputs, N_CLASSES, rng)
        circuit = CircuitSpec.default(n_qubits, shared_omega=shared_omega, cnot_ring=cnot_ring)
        thetas = rng.uniform(-np.pi, np.pi, size=circuit.n_params)
        readout = LinearLayer.glorot(n_qubits, N_CLASSES, rng)
        return cls(hidden_layer, output, circuit, thetas, readout, xi, frontend or SpikingFrontEnd())

    def parameters(self) -> Dict[str, np.ndarray]:
        """Trainable arrays by name; updates through these views change the model"""
        params = {}
        if self.hidden is not None:
            params["hidden.w"] = self.hidden.w
            params["hidden.b"] = self.hidden.b
        params["output.w"] = self.output.w
        params["output.b"] = self.output.b
        params["readout.w"] = self.readout.w
        params["readout.b"] = self.readout.b
        params["thetas"] = self.thetas
        return params

    def classical_head(self, rates: np.ndarray):
        if self.hidden is None:
            return None, None, linear_forward(self.output, rates)
        pre = linear_forward(self.hidden, rates)
        act = relu(pre)
        return pre, act, linear_forward(self.output, act)

    def classical_probs(self, rates: np.ndarray) -> np.ndarray:
        """Q_c of the classical head alone"""
        return softmax(self.classical_head(rates)[2])

    def quantum_expvals(self, angles: np.ndarray) -> np.ndarray:
        return run_circuit(self.circuit, angles, self.thetas)

    def quantum_probs(self, angles: np.ndarray) -> np.ndarray:
        """Q_q of the quantum head alone"""
        return softmax(linear_forward(self.readout, self.quantum_expvals(angles)))

    def forward(self, rates: np.ndarray, angles: np.ndarray) -> ForwardCache:
        """Both heads on a batch of pooled rates (B, 784) and data angles (B, n)"""
        rates = np.asarray(rates, dtype=float)
        angles = np.asarray(angles, dtype=float)
        if rates.ndim != 2 or angles.ndim != 2 or rates.shape[0] != angles.shape[0]:
            raise ShapeError(f"batched rates {rates.shape} and angles {angles.shape} disagree")
        pre, act, logits_c = self.classical_head(rates)
        q_c = softmax(logits_c)
        expz = self.quantum_expvals(angles)
        q_q = softmax(linear_forward(self.readout, expz))
        q_h = fuse(q_q, q_c, self.xi)
        return ForwardCache(rates, pre, act, q_c, angles, expz, q_q, q_h)

    # Persistence

    def _meta(self) -> dict:
        ring = any(isinstance(layer, CnotChain) and layer.ring for layer in self.circuit.layers)
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "n_qubits": self.circuit.n_qubits,
            "shared_omega": self.circuit.n_params == self.circuit.n_qubits,
            "cnot_ring": ring,
            "xi": self.xi,
            "encoder": asdict(self.frontend.encoder),
            "lif": {k: getattr(v, "value", v) for k, v in asdict(self.frontend.lif).items()},
        }

    def save(self, path: Union[str, Path]):
        arrays = {name: value for name, value in self.parameters().items()}
        np.savez_compressed(path, meta=np.array(json.dumps(self._meta())), **arrays)
        logger.info(f"Model saved to {path}")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "HybridModel":
        with np.load(path, allow_pickle=False) as archive:
            meta = json.loads(str(archive["meta"]))
            arrays = {name: archive[name] for name in archive.files if name != "meta"}
        if meta.get("format_version") != MODEL_FORMAT_VERSION:
            raise ConfigurationError("model", f"unsupported model format {meta.get('format_version')}")
        circuit = CircuitSpec.default(
            meta["n_qubits"], shared_omega=meta["shared_omega"], cnot_ring=meta["cnot_ring"]
        )
        hidden = None
        if "hidden.w" in arrays:
            hidden = LinearLayer(arrays["hidden.w"], arrays["hidden.b"])
        frontend = SpikingFrontEnd(EncoderConfig(**meta["encoder"]), LIFParams(**meta["lif"]))
        model = cls(
            hidden,
            LinearLayer(arrays["output.w"], arrays["output.b"]),
            circuit,
            arrays["thetas"],
            LinearLayer(arrays["readout.w"], arrays["readout.b"]),
            meta["xi"],
            frontend,
        )
        logger.info(f"Model loaded from {path}")
        return model
