"""
Minibatch SGD training and evaluation of the hybrid model
"""
import logging
import time
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import structlog

from app.data.dataset import Dataset, reduce_to_angles
from app.errors import InvalidInputError, TrainingDivergedError
from app.fusion.backprop import backward
from app.fusion.loss import nll_loss, predict
from app.fusion.model import HybridModel
from app.quantum.gradients import circuit_evaluations
from app.training.config import TrainConfig
from app.training.metrics import ConfusionMatrix, EpochMetrics, RunRecord
from app.training.optimizer import SGD
from app.utils.metrics import MetricsCollector
from app.utils.seeding import Stream, derive_rng

logger = logging.getLogger(__name__)
log = structlog.get_logger(__name__)

EVAL_BATCH = 256


@dataclass(frozen=True)
class EvalResult:
    accuracy: float
    confusion: ConfusionMatrix
    loss: float
    predictions: np.ndarray


def features(
    model: HybridModel, pixels: np.ndarray, stream: Stream, epoch: int, sample_ids: Sequence[int]
) -> Tuple[np.ndarray, np.ndarray]:
    """Pooled spike rates for the classical head, data angles for the circuit"""
    rates = model.frontend.rates(pixels, stream, epoch, sample_ids)
    angles = reduce_to_angles(pixels, model.circuit.n_qubits)
    return rates, angles


def evaluate(model: HybridModel, test_set: Dataset, batch_size: int = EVAL_BATCH) -> EvalResult:
    """Accuracy, confusion matrix and mean NLL of argmax(Q_h)

    Spike trains come from the evaluation stream keyed by sample position,
    so repeated evaluations of the same set are identical.
    """
    n = len(test_set)
    if n == 0:
        raise InvalidInputError("cannot evaluate on an empty set")
    predictions = np.empty(n, dtype=np.int64)
    loss_sum = 0.0
    for start in range(0, n, batch_size):
        ids = np.arange(start, min(start + batch_size, n))
        rates, angles = features(model, test_set.images[ids], Stream.EVAL_SPIKES, 0, ids)
        q_h = model.forward(rates, angles).q_h
        predictions[ids] = predict(q_h)
        loss_sum += nll_loss(q_h, test_set.labels[ids]) * len(ids)
    confusion = ConfusionMatrix.from_predictions(test_set.labels, predictions)
    return EvalResult(confusion.accuracy, confusion, loss_sum / n, predictions)


def train(
    model: HybridModel,
    train_set: Dataset,
    cfg: TrainConfig,
    test_set: Optional[Dataset] = None,
    metrics: Optional[MetricsCollector] = None,
) -> RunRecord:
    """Train ``model`` in place and return the per-epoch record"""
    n = len(train_set)
    if n == 0:
        raise InvalidInputError("cannot train on an empty set")

    optimizer = SGD(cfg.lr, cfg.momentum)
    per_batch_circuits = circuit_evaluations(model.circuit) if model.xi > 0.0 else 1
    record = RunRecord(config=cfg.model_dump(mode="json"))
    started = time.perf_counter()

    for epoch in range(cfg.epochs):
        order = derive_rng(cfg.seed, Stream.SHUFFLE, epoch).permutation(n)
        spike_epoch = 0 if cfg.freeze_spikes else epoch
        correct = 0
        loss_sum = 0.0

        for batch_index, start in enumerate(range(0, n, cfg.batch_size)):
            batch_started = time.perf_counter()
            ids = order[start:start + cfg.batch_size]
            labels = train_set.labels[ids]
            rates, angles = features(model, train_set.images[ids], Stream.TRAIN_SPIKES, spike_epoch, ids)

            cache = model.forward(rates, angles)
            loss = nll_loss(cache.q_h, labels)
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch, batch_index, loss, cfg.lr)
            correct += int(np.sum(predict(cache.q_h) == labels))
            loss_sum += loss * len(ids)

            grads = backward(model, cache, labels)
            optimizer.step(model.parameters(), grads.params)

            if metrics:
                latency_ms = (time.perf_counter() - batch_started) * 1000
                metrics.record_batch(len(ids), per_batch_circuits, latency_ms)

        test_acc = test_loss = None
        if test_set is not None:
            result = evaluate(model, test_set)
            test_acc, test_loss = result.accuracy, result.loss
            record.confusion = result.confusion

        epoch_metrics = EpochMetrics(epoch + 1, correct / n, loss_sum / n, test_acc, test_loss)
        record.epochs.append(epoch_metrics)
        if metrics:
            metrics.record_epoch(epoch_metrics.train_acc, epoch_metrics.train_loss, test_acc)
        log.info("epoch_complete", **epoch_metrics.as_dict(), xi=model.xi, seed=cfg.seed)

    if record.confusion is None:
        record.confusion = evaluate(model, train_set).confusion
    record.wall_time_s = time.perf_counter() - started
    if metrics:
        metrics.record_run()
    logger.info(f"Training finished in {record.wall_time_s:.1f}s")
    return record
