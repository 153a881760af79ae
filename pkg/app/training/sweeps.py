"""
Sweep harnesses: quantum proportion, qubit count and input noise
"""
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from app.data.dataset import Dataset
from app.data.noise import NoiseKind, NoiseSpec, noisy_dataset
from app.errors import ConfigurationError
from app.fusion.loss import check_xi
from app.fusion.model import HybridModel
from app.training.config import TrainConfig
from app.training.metrics import RunRecord
from app.training.trainer import EVAL_BATCH, evaluate, train
from app.utils.metrics import MetricsCollector

logger = logging.getLogger(__name__)
log = structlog.get_logger(__name__)


@dataclass(frozen=True)
class SweepPoint:
    """One training run inside a xi or qubit sweep"""

    n_qubits: int
    xi: float
    seed: int
    record: RunRecord


@dataclass(frozen=True)
class NoisePoint:
    kind: NoiseKind
    level: float
    seed: int
    accuracy: float


def repeat_seeds(cfg: TrainConfig) -> List[int]:
    """cfg.seed, cfg.seed + 1, ... one per repeat"""
    return [cfg.seed + k for k in range(cfg.n_seeds)]


def mean_std(values: Iterable[float]) -> Tuple[float, float]:
    """Mean and population standard deviation"""
    values = np.asarray(list(values), dtype=float)
    return float(values.mean()), float(values.std())


def run_once(
    cfg: TrainConfig,
    train_set: Dataset,
    test_set: Optional[Dataset] = None,
    metrics: Optional[MetricsCollector] = None,
) -> Tuple[HybridModel, RunRecord]:
    model = cfg.build_model(n_inputs=train_set.images.shape[1])
    return model, train(model, train_set, cfg, test_set, metrics)


def _require(values: Sequence, name: str):
    if len(values) == 0:
        raise ConfigurationError(name, "sweep needs at least one value")


def _point(cfg: TrainConfig, record: RunRecord) -> SweepPoint:
    final = record.final
    log.info(
        "sweep_point",
        n_qubits=cfg.n_qubits,
        xi=cfg.xi,
        seed=cfg.seed,
        train_acc=final.train_acc,
        test_acc=final.test_acc,
    )
    return SweepPoint(cfg.n_qubits, cfg.xi, cfg.seed, record)


def sweep_xi(
    cfg: TrainConfig,
    xi_values: Sequence[float],
    train_set: Dataset,
    test_set: Optional[Dataset] = None,
    metrics: Optional[MetricsCollector] = None,
) -> List[SweepPoint]:
    """One run per (xi, seed); every xi sees the same data and seeds"""
    _require(xi_values, "xi_values")
    xi_values = [check_xi(xi) for xi in xi_values]
    points = []
    for xi in xi_values:
        for seed in repeat_seeds(cfg):
            run_cfg = cfg.model_copy(update={"xi": xi, "seed": seed})
            _, record = run_once(run_cfg, train_set, test_set, metrics)
            points.append(_point(run_cfg, record))
    return points


def sweep_qubits(
    cfg: TrainConfig,
    qubit_values: Sequence[int],
    train_set: Dataset,
    test_set: Optional[Dataset] = None,
    xi_values: Optional[Sequence[float]] = None,
    metrics: Optional[MetricsCollector] = None,
) -> List[SweepPoint]:
    """xi sweep repeated for each qubit count (cfg.xi alone when no xi list is given)"""
    _require(qubit_values, "qubit_values")
    points = []
    for n_qubits in qubit_values:
        qubit_cfg = TrainConfig.model_validate({**cfg.model_dump(), "n_qubits": n_qubits})
        points.extend(sweep_xi(qubit_cfg, xi_values or [cfg.xi], train_set, test_set, metrics))
    return points


def sweep_noise(
    model: HybridModel,
    test_set: Dataset,
    kinds: Sequence[NoiseKind],
    levels: Sequence[float],
    seeds: Sequence[int] = (0,),
    batch_size: int = EVAL_BATCH,
) -> List[NoisePoint]:
    """Accuracy of a trained model on noise-corrupted copies of test_set

    Level 0 evaluates the clean set itself and so reproduces the clean
    accuracy exactly.
    """
    _require(kinds, "kinds")
    _require(levels, "levels")
    _require(seeds, "seeds")
    points = []
    for kind in kinds:
        for level in levels:
            for seed in seeds:
                spec = NoiseSpec(NoiseKind(kind), float(level), seed)
                accuracy = evaluate(model, noisy_dataset(test_set, spec), batch_size).accuracy
                log.info("sweep_point", kind=spec.kind.value, level=spec.level, seed=seed, accuracy=accuracy)
                points.append(NoisePoint(spec.kind, spec.level, seed, accuracy))
    return points


def aggregate_runs(points: Sequence[SweepPoint], metric: str = "test_acc") -> Dict[Tuple[int, float], Tuple[float, float]]:
    """(n_qubits, xi) -> (mean, std) of a final-epoch metric over seeds"""
    groups: Dict[Tuple[int, float], List[float]] = {}
    for p in points:
        value = getattr(p.record.final, metric)
        if value is not None:
            groups.setdefault((p.n_qubits, p.xi), []).append(value)
    return {key: mean_std(values) for key, values in groups.items()}


def aggregate_noise(points: Sequence[NoisePoint]) -> Dict[Tuple[NoiseKind, float], Tuple[float, float]]:
    """(kind, level) -> (mean, std) accuracy over noise seeds"""
    groups: Dict[Tuple[NoiseKind, float], List[float]] = {}
    for p in points:
        groups.setdefault((p.kind, p.level), []).append(p.accuracy)
    return {key: mean_std(values) for key, values in groups.items()}
