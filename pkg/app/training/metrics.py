"""
Confusion matrices, per-epoch metrics and run records
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from app.errors import InvalidInputError, ShapeError
from app.fusion.loss import N_CLASSES

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[true, predicted]"""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (N_CLASSES, N_CLASSES):
            raise ShapeError(f"confusion matrix must be {N_CLASSES}x{N_CLASSES}, got {counts.shape}")
        if np.any(counts < 0):
            raise InvalidInputError("confusion counts must be non-negative")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_predictions(cls, labels, predictions) -> "ConfusionMatrix":
        labels = np.asarray(labels, dtype=np.int64)
        predictions = np.asarray(predictions, dtype=np.int64)
        if labels.shape != predictions.shape or labels.ndim != 1:
            raise ShapeError(f"labels {labels.shape} and predictions {predictions.shape} disagree")
        counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
        np.add.at(counts, (labels, predictions), 1)
        return cls(counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        if self.total == 0:
            raise InvalidInputError("accuracy of an empty confusion matrix")
        return int(np.trace(self.counts)) / self.total

    def class_counts(self) -> np.ndarray:
        """Row sums: how many samples of each true class were seen"""
        return self.counts.sum(axis=1)

    def per_class_accuracy(self) -> List[Optional[float]]:
        """Recall per true class; None for classes absent from the set"""
        rows = self.class_counts()
        return [
            None if rows[k] == 0 else int(self.counts[k, k]) / int(rows[k])
            for k in range(N_CLASSES)
        ]

    def to_list(self) -> List[List[int]]:
        return self.counts.tolist()


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    train_acc: float
    train_loss: float
    test_acc: Optional[float] = None
    test_loss: Optional[float] = None

    def __post_init__(self):
        for name in ("train_acc", "test_acc"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise InvalidInputError(f"{name} must be in [0, 1], got {value}")
        for name in ("train_loss", "test_loss"):
            value = getattr(self, name)
            if value is not None and not value >= 0.0:
                raise InvalidInputError(f"{name} must be >= 0, got {value}")

    def as_dict(self) -> Dict[str, Any]:
        return {
            "epoch": self.epoch,
            "train_acc": self.train_acc,
            "test_acc": self.test_acc,
            "train_loss": self.train_loss,
            "test_loss": self.test_loss,
        }


@dataclass
class RunRecord:
    """Result of one training run"""

    config: Dict[str, Any]
    epochs: List[EpochMetrics] = field(default_factory=list)
    confusion: Optional[ConfusionMatrix] = None
    wall_time_s: float = 0.0

    @property
    def final(self) -> EpochMetrics:
        if not self.epochs:
            raise InvalidInputError("run record has no epochs")
        return self.epochs[-1]

    def to_summary(self) -> Dict[str, Any]:
        """JSON-ready summary (schema_version 1)"""
        final = self.final.as_dict()
        final.pop("epoch")
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config,
            "epochs": [e.as_dict() for e in self.epochs],
            "final": final,
            "confusion": None if self.confusion is None else self.confusion.to_list(),
            "per_class_accuracy": None if self.confusion is None else self.confusion.per_class_accuracy(),
            "wall_time_s": round(self.wall_time_s, 3),
        }
