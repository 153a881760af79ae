"""
Metrics collection for training runs and sweeps
"""
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from prometheus_client import (
    CollectorRegistry,
    Counter,
    Gauge,
    Histogram,
    generate_latest,
    write_to_textfile,
)

logger = logging.getLogger(__name__)


class MetricsCollector:
    """Collect and expose run metrics on a private registry"""

    def __init__(self, registry: Optional[CollectorRegistry] = None):
        self.registry = registry or CollectorRegistry()

        # Work counters
        self.circuit_evaluations = Counter(
            "circuit_evaluations",
            "Batched circuit simulations (forward and parameter-shift)",
            registry=self.registry,
        )
        self.samples_processed = Counter(
            "samples_processed", "Training samples seen", registry=self.registry
        )
        self.batches = Counter("batches", "Optimizer steps taken", registry=self.registry)
        self.epochs = Counter("epochs", "Completed epochs", registry=self.registry)
        self.runs = Counter("runs", "Completed training runs", registry=self.registry)

        # Latency
        self.batch_latency = Histogram(
            "batch_latency_ms",
            "Forward+backward+step latency per minibatch in milliseconds",
            buckets=(5, 10, 25, 50, 100, 250, 500, 1000, 2500, 5000),
            registry=self.registry,
        )

        # Last observed quality
        self.train_accuracy = Gauge(
            "train_accuracy", "Training accuracy of the last epoch", registry=self.registry
        )
        self.test_accuracy = Gauge(
            "test_accuracy", "Test accuracy of the last evaluation", registry=self.registry
        )
        self.train_loss = Gauge(
            "train_loss", "Mean training NLL of the last epoch", registry=self.registry
        )

    def record_batch(self, batch_size: int, circuit_runs: int, latency_ms: float):
        """Record one optimizer step"""
        self.batches.inc()
        self.samples_processed.inc(batch_size)
        self.circuit_evaluations.inc(circuit_runs)
        self.batch_latency.observe(latency_ms)

    def record_epoch(self, train_acc: float, train_loss: float, test_acc: Optional[float]):
        """Record end-of-epoch quality"""
        self.epochs.inc()
        self.train_accuracy.set(train_acc)
        self.train_loss.set(train_loss)
        if test_acc is not None:
            self.test_accuracy.set(test_acc)

    def record_run(self):
        """Record a finished training run"""
        self.runs.inc()

    def get_metrics(self) -> bytes:
        """Get Prometheus exposition text"""
        return generate_latest(self.registry)

    def write_textfile(self, path: Union[str, Path]):
        """Write the exposition text next to the other run artifacts"""
        write_to_textfile(str(path), self.registry)
        logger.debug(f"Metrics written to {path}")

    def get_summary(self) -> Dict[str, Any]:
        """Get metrics summary"""
        return {
            "runs": self.runs._value.get(),
            "epochs": self.epochs._value.get(),
            "batches": self.batches._value.get(),
            "samples_processed": self.samples_processed._value.get(),
            "circuit_evaluations": self.circuit_evaluations._value.get(),
        }
