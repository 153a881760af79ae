"""
Experiment configuration for training runs and sweeps
"""
from pydantic import BaseModel, ConfigDict, Field

from app.fusion.model import N_PIXELS, HybridModel
from app.spiking.encoding import EncoderConfig
from app.spiking.frontend import SpikingFrontEnd
from app.spiking.lif import LIFParams, ResetMode, SynapseKernel


class TrainConfig(BaseModel):
    """Everything that determines a training run, seed included"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    # Optimization
    epochs: int = Field(10, ge=1)
    batch_size: int = Field(32, ge=1)
    lr: float = Field(0.05, gt=0.0)
    momentum: float = Field(0.0, ge=0.0, lt=1.0)

    # Model
    xi: float = Field(0.8, ge=0.0, le=1.0)
    n_qubits: int = Field(5, ge=1, le=24)
    hidden: int = Field(100, ge=0)
    shared_omega: bool = False
    cnot_ring: bool = False

    # Spiking front end
    timesteps: int = Field(20, ge=1, le=10000)
    r_max: float = Field(1.0, gt=0.0, le=1.0)
    tau_m: float = Field(2.0, gt=0.0)
    v_rest: float = 0.0
    v_th: float = 1.0
    r_m: float = 2.0
    dt: float = Field(1.0, gt=0.0)
    reset: ResetMode = ResetMode.HARD
    synapse: SynapseKernel = SynapseKernel.RECTANGULAR
    tau_syn: float = Field(5.0, gt=0.0)
    freeze_spikes: bool = False

    # Data and repeats
    seed: int = Field(0, ge=0)
    train_k: int = Field(2000, ge=1)
    test_k: int = Field(1000, ge=1)
    n_seeds: int = Field(1, ge=1)

    def encoder_config(self) -> EncoderConfig:
        return EncoderConfig(T=self.timesteps, r_max=self.r_max, seed=self.seed)

    def lif_params(self) -> LIFParams:
        return LIFParams(
            tau_m=self.tau_m,
            v_rest=self.v_rest,
            v_th=self.v_th,
            r_m=self.r_m,
            dt=self.dt,
            reset=self.reset,
            synapse=self.synapse,
            tau_syn=self.tau_syn,
        )

    def frontend(self) -> SpikingFrontEnd:
        return SpikingFrontEnd(self.encoder_config(), self.lif_params())

    def build_model(self, n_inputs: int = N_PIXELS) -> HybridModel:
        """Freshly initialized model for this configuration"""
        return HybridModel.initialize(
            n_qubits=self.n_qubits,
            hidden=self.hidden,
            xi=self.xi,
            seed=self.seed,
            n_inputs=n_inputs,
            frontend=self.frontend(),
            shared_omega=self.shared_omega,
            cnot_ring=self.cnot_ring,
        )
