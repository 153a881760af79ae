"""
CSV, JSON and SVG artifacts for runs and sweeps

CSV files are the authoritative output and are byte-for-byte
reproducible for a fixed seed; run.json also carries the wall time.
"""
import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from app.training.metrics import ConfusionMatrix, RunRecord
from app.training.sweeps import NoisePoint, SweepPoint, aggregate_noise, aggregate_runs, mean_std
from app.utils.svg_chart import LineChart

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

EPOCH_HEADER = ["epoch", "train_acc", "test_acc", "train_loss", "test_loss"]
SWEEP_HEADER = ["n_qubits", "xi", "seed", "train_acc", "test_acc", "train_loss", "test_loss"]
NOISE_HEADER = ["kind", "level", "seed", "accuracy"]


def _fmt(value: Optional[float]) -> str:
    """Fixed repr so reruns produce identical bytes; None becomes an empty cell"""
    return "" if value is None else repr(float(value))


def _write_rows(path: Path, header: Sequence[str], rows: List[List[Any]]) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    logger.info(f"Wrote {path}")
    return path


def write_json(path: PathLike, payload: Dict[str, Any]) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path


def write_epochs_csv(path: PathLike, record: RunRecord) -> Path:
    rows = [
        [e.epoch, _fmt(e.train_acc), _fmt(e.test_acc), _fmt(e.train_loss), _fmt(e.test_loss)]
        for e in record.epochs
    ]
    return _write_rows(Path(path), EPOCH_HEADER, rows)


def write_confusion_csv(path: PathLike, confusion: ConfusionMatrix) -> Path:
    header = ["true\\pred"] + [str(k) for k in range(confusion.counts.shape[1])]
    rows = [[k] + row for k, row in enumerate(confusion.to_list())]
    return _write_rows(Path(path), header, rows)


def curves_chart(record: RunRecord) -> LineChart:
    """Accuracy and NLL per epoch, train and test"""
    chart = LineChart("Training curves", "epoch", "accuracy / NLL")
    epochs = [e.epoch for e in record.epochs]
    chart.add_series("train acc", epochs, [e.train_acc for e in record.epochs])
    chart.add_series("train NLL", epochs, [e.train_loss for e in record.epochs])
    if all(e.test_acc is not None for e in record.epochs):
        chart.add_series("test acc", epochs, [e.test_acc for e in record.epochs])
        chart.add_series("test NLL", epochs, [e.test_loss for e in record.epochs])
    return chart


def write_run_artifacts(run_dir: PathLike, record: RunRecord) -> Dict[str, Path]:
    """run.json, epochs.csv, confusion.csv and curves.svg"""
    run_dir = Path(run_dir)
    artifacts = {
        "run.json": write_json(run_dir / "run.json", record.to_summary()),
        "epochs.csv": write_epochs_csv(run_dir / "epochs.csv", record),
        "curves.svg": curves_chart(record).write(run_dir / "curves.svg"),
    }
    if record.confusion is not None:
        artifacts["confusion.csv"] = write_confusion_csv(run_dir / "confusion.csv", record.confusion)
    return artifacts


def write_sweep_csv(path: PathLike, points: Sequence[SweepPoint]) -> Path:
    rows = []
    for p in points:
        final = p.record.final
        rows.append([
            p.n_qubits, _fmt(p.xi), p.seed,
            _fmt(final.train_acc), _fmt(final.test_acc), _fmt(final.train_loss), _fmt(final.test_loss),
        ])
    return _write_rows(Path(path), SWEEP_HEADER, rows)


def sweep_chart(points: Sequence[SweepPoint], title: str) -> LineChart:
    """Mean final accuracy vs xi, one curve per qubit count, std as error bars"""
    metric = "test_acc" if all(p.record.final.test_acc is not None for p in points) else "train_acc"
    stats = aggregate_runs(points, metric)
    chart = LineChart(title, "quantum proportion xi", metric.replace("_", " "), y_range=(0.0, 1.0))
    for n_qubits in sorted({q for q, _ in stats}):
        keys = sorted(k for k in stats if k[0] == n_qubits)
        chart.add_series(
            f"{n_qubits} qubits",
            [xi for _, xi in keys],
            [stats[k][0] for k in keys],
            [stats[k][1] for k in keys],
        )
    return chart


def point_dir_name(point: SweepPoint) -> str:
    return f"q{point.n_qubits}_xi{point.xi:g}_seed{point.seed}"


def write_sweep_points(run_dir: PathLike, points: Sequence[SweepPoint]) -> List[Path]:
    """epochs.csv and confusion.csv for every run, one directory per point"""
    dirs = []
    for p in points:
        point_dir = Path(run_dir) / point_dir_name(p)
        point_dir.mkdir(parents=True, exist_ok=True)
        write_epochs_csv(point_dir / "epochs.csv", p.record)
        if p.record.confusion is not None:
            write_confusion_csv(point_dir / "confusion.csv", p.record.confusion)
        dirs.append(point_dir)
    return dirs


def sweep_curves_chart(points: Sequence[SweepPoint], quantity: str = "acc") -> LineChart:
    """Per-epoch mean over seeds, one curve per (qubits, xi); quantity is "acc" or "loss"."""
    if quantity not in ("acc", "loss"):
        raise ValueError(f"quantity must be 'acc' or 'loss', got {quantity!r}")
    split = "test" if all(e.test_acc is not None for p in points for e in p.record.epochs) else "train"
    attr = f"{split}_{quantity}"
    label = f"{split} {'accuracy' if quantity == 'acc' else 'NLL'}"
    chart = LineChart(
        f"{label.capitalize()} per epoch", "epoch", label,
        y_range=(0.0, 1.0) if quantity == "acc" else None,
    )

    groups: Dict[Tuple[int, float], List[SweepPoint]] = {}
    for p in points:
        groups.setdefault((p.n_qubits, p.xi), []).append(p)
    for (n_qubits, xi), group in sorted(groups.items()):
        n_epochs = min(len(p.record.epochs) for p in group)
        stats = [mean_std(getattr(p.record.epochs[i], attr) for p in group) for i in range(n_epochs)]
        chart.add_series(
            f"{n_qubits}q xi={xi:g}",
            [group[0].record.epochs[i].epoch for i in range(n_epochs)],
            [m for m, _ in stats],
            [s for _, s in stats],
        )
    return chart


def write_sweep_artifacts(run_dir: PathLike, prefix: str, points: Sequence[SweepPoint], title: str) -> Dict[str, Path]:
    """Summary CSV and chart, per-epoch curves, and per-point run files"""
    run_dir = Path(run_dir)
    artifacts = {
        f"{prefix}.csv": write_sweep_csv(run_dir / f"{prefix}.csv", points),
        f"{prefix}.svg": sweep_chart(points, title).write(run_dir / f"{prefix}.svg"),
    }
    for quantity, suffix in (("acc", "acc"), ("loss", "nll")):
        name = f"{prefix}_curves_{suffix}.svg"
        artifacts[name] = sweep_curves_chart(points, quantity).write(run_dir / name)
    for point_dir in write_sweep_points(run_dir, points):
        artifacts[point_dir.name] = point_dir
    return artifacts


def write_noise_csv(path: PathLike, points: Sequence[NoisePoint]) -> Path:
    rows = [[p.kind.value, _fmt(p.level), p.seed, _fmt(p.accuracy)] for p in points]
    return _write_rows(Path(path), NOISE_HEADER, rows)


def noise_chart(points: Sequence[NoisePoint]) -> LineChart:
    stats = aggregate_noise(points)
    chart = LineChart("Accuracy under input noise", "noise level", "accuracy", y_range=(0.0, 1.0))
    for kind in sorted({k for k, _ in stats}, key=lambda k: k.value):
        keys = sorted((k for k in stats if k[0] == kind), key=lambda k: k[1])
        chart.add_series(
            kind.value,
            [level for _, level in keys],
            [stats[k][0] for k in keys],
            [stats[k][1] for k in keys],
        )
    return chart
