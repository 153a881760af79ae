"""
Discrete-time leaky integrate-and-fire dynamics

tau_m dv/dt = -(v - v_rest) + r_m I(t), integrated with forward Euler.
The input current is the weighted sum of presynaptic spikes passed
through a synaptic kernel: one-step rectangular by default, or a
first-order exponential synapse.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from app.errors import ConfigurationError, ShapeError
from app.spiking.encoding import SpikeTrain


class ResetMode(str, Enum):
    HARD = "hard"
    SOFT = "soft"


class SynapseKernel(str, Enum):
    RECTANGULAR = "rectangular"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class LIFParams:
    tau_m: float = 2.0
    v_rest: float = 0.0
    v_th: float = 1.0
    r_m: float = 2.0
    dt: float = 1.0
    reset: ResetMode = ResetMode.HARD
    synapse: SynapseKernel = SynapseKernel.RECTANGULAR
    tau_syn: float = 5.0

    def __post_init__(self):
        object.__setattr__(self, "reset", ResetMode(self.reset))
        object.__setattr__(self, "synapse", SynapseKernel(self.synapse))
        if self.tau_m <= 0:
            raise ConfigurationError("tau_m", f"must be > 0, got {self.tau_m}")
        if self.v_th <= self.v_rest:
            raise ConfigurationError("v_th", f"must exceed v_rest={self.v_rest}, got {self.v_th}")
        if self.dt <= 0:
            raise ConfigurationError("dt", f"must be > 0, got {self.dt}")
        if self.tau_syn <= 0:
            raise ConfigurationError("tau_syn", f"must be > 0, got {self.tau_syn}")


@dataclass(frozen=True)
class LIFResult:
    spikes: SpikeTrain
    membrane: np.ndarray  # (..., T, d_out), potential after each step's reset


def lif_simulate(input: SpikeTrain, weights: Optional[np.ndarray], p: LIFParams) -> LIFResult:
    """Integrate a (possibly batched) spike train and record the membrane"""
    x = input.bits.astype(float)
    d_in = input.d
    if weights is None:
        w = None
        d_out = d_in
    else:
        w = np.asarray(weights, dtype=float)
        if w.ndim != 2 or w.shape[1] != d_in:
            raise ShapeError(f"weights must be (d_out, {d_in}), got {w.shape}")
        d_out = w.shape[0]

    batch = x.shape[:-2]
    steps = input.T
    leak = p.dt / p.tau_m
    syn_decay = np.exp(-p.dt / p.tau_syn)

    v = np.full(batch + (d_out,), p.v_rest, dtype=float)
    current = np.zeros_like(v)
    spikes = np.zeros(batch + (steps, d_out), dtype=np.uint8)
    membrane = np.empty(batch + (steps, d_out), dtype=float)

    for t in range(steps):
        drive = x[..., t, :] if w is None else x[..., t, :] @ w.T
        if p.synapse == SynapseKernel.EXPONENTIAL:
            current = current * syn_decay + drive
        else:
            current = drive
        v = v + leak * (-(v - p.v_rest) + p.r_m * current)
        fired = v >= p.v_th
        if p.reset == ResetMode.HARD:
            v = np.where(fired, p.v_rest, v)
        else:
            v = np.where(fired, v - (p.v_th - p.v_rest), v)
        spikes[..., t, :] = fired
        membrane[..., t, :] = v

    return LIFResult(SpikeTrain(spikes), membrane)


def lif_run(input: SpikeTrain, weights: Optional[np.ndarray], p: LIFParams) -> SpikeTrain:
    """Output spikes of a LIF layer; ``weights=None`` means identity coupling"""
    return lif_simulate(input, weights, p).spikes
