"""
Command-line entry point for PPF-QSNN experiments
"""
import argparse
import asyncio
import json
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import yaml
from pydantic import Field, ValidationError

from app.config import settings
from app.data.dataset import Dataset, Split, subset
from app.data.mnist import load_split
from app.data.noise import NoiseKind, NoiseSpec, noisy_dataset
from app.errors import (
    ConfigurationError,
    FetchError,
    IdxFormatError,
    InvalidInputError,
    TrainingDivergedError,
)
from app.fusion.model import HybridModel
from app.training import reporting
from app.training.config import TrainConfig
from app.training.sweeps import repeat_seeds, run_once, sweep_noise, sweep_qubits, sweep_xi
from app.training.trainer import evaluate
from app.utils.logger import setup_logging
from app.utils.metrics import MetricsCollector

logger = setup_logging("app")

EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2

DEFAULT_XI_VALUES = [round(0.1 * k, 1) for k in range(11)]
DEFAULT_QUBITS = [5, 6, 7]
DEFAULT_NOISE_LEVELS = [0.0, 0.1, 0.2, 0.4]


class CliConfig(TrainConfig):
    """Training configuration plus data paths, output directory and noise spec"""

    data_dir: Path = Field(default_factory=lambda: Path(settings.data_dir))
    out: Path = Field(default_factory=lambda: Path(settings.output_dir))
    model: Optional[Path] = None
    noise: Optional[NoiseKind] = None
    noise_level: float = Field(0.0, ge=0.0)
    values: Optional[List[float]] = None
    xi_values: Optional[List[float]] = None

    def train_config(self) -> TrainConfig:
        return TrainConfig.model_validate(self.model_dump(include=set(TrainConfig.model_fields)))


# Flag name -> CliConfig field
FLAG_FIELDS = {
    "seed": "seed",
    "out": "out",
    "train_k": "train_k",
    "test_k": "test_k",
    "xi": "xi",
    "qubits": "n_qubits",
    "hidden": "hidden",
    "epochs": "epochs",
    "lr": "lr",
    "momentum": "momentum",
    "batch": "batch_size",
    "timesteps": "timesteps",
    "noise": "noise",
    "noise_level": "noise_level",
    "seeds": "n_seeds",
    "model": "model",
    "values": "values",
    "xi_values": "xi_values",
    "data_dir": "data_dir",
}


def _number_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppf-qsnn",
        description="Hybrid spiking / variational-quantum MNIST classifier experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML or JSON config file")
    common.add_argument("--data-dir", type=Path, help="Directory holding the MNIST IDX files")
    common.add_argument("--out", type=Path, help="Root directory for run outputs")
    common.add_argument("--seed", type=int)
    common.add_argument("--train-k", type=int, help="Training subset size")
    common.add_argument("--test-k", type=int, help="Test subset size")
    common.add_argument("--xi", type=float, help="Quantum proportion in [0, 1]")
    common.add_argument("--qubits", type=int)
    common.add_argument("--hidden", type=int, help="Hidden width of the classical head (0 = none)")
    common.add_argument("--epochs", type=int)
    common.add_argument("--lr", type=float)
    common.add_argument("--momentum", type=float)
    common.add_argument("--batch", type=int)
    common.add_argument("--timesteps", type=int, help="Spike train length T")
    common.add_argument("--noise", choices=[k.value for k in NoiseKind])
    common.add_argument("--noise-level", type=float)
    common.add_argument("--seeds", type=int, help="Repeats per sweep point")
    common.add_argument("--model", type=Path, help="Saved model.npz")

    sub.add_parser("fetch", parents=[common], help="Download and verify MNIST")
    sub.add_parser("train", parents=[common], help="Train one model")
    sub.add_parser("eval", parents=[common], help="Evaluate a saved model")
    for name, help_text in (
        ("sweep-xi", "Train across quantum proportions"),
        ("sweep-qubits", "Train across qubit counts"),
        ("sweep-noise", "Evaluate under input noise"),
    ):
        sweep = sub.add_parser(name, parents=[common], help=help_text)
        sweep.add_argument("--values", type=_number_list, help="Sweep values, comma separated")
        if name == "sweep-qubits":
            sweep.add_argument("--xi-values", type=_number_list, help="xi values per qubit count")
    return parser


def _flatten(document: Any, source: Path) -> Dict[str, Any]:
    """Config files may group keys in sections; sections are merged flat"""
    if document is None:
        return {}
    if not isinstance(document, dict):
        raise ConfigurationError("config", f"{source} must contain a mapping")
    flat: Dict[str, Any] = {}
    for key, value in document.items():
        if isinstance(value, dict):
            flat.update(value)
        else:
            flat[key] = value
    return flat


def load_config(args: argparse.Namespace) -> CliConfig:
    """defaults < config file < flags"""
    values: Dict[str, Any] = {}
    if args.config is not None:
        try:
            document = yaml.safe_load(args.config.read_text(encoding="utf-8"))
        except yaml.YAMLError as e:
            raise ConfigurationError("config", f"cannot parse {args.config}: {e}")
        values.update(_flatten(document, args.config))
    for flag, field_name in FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None:
            values[field_name] = value
    return CliConfig.model_validate(values)


def make_run_dir(root: Path, command: str) -> Path:
    """root/<command>-<timestamp>, suffixed on collision"""
    stamp = datetime.now().strftime("%Y%m%d-%H%M%S")
    base = root / f"{command}-{stamp}"
    candidate, k = base, 1
    while candidate.exists():
        candidate = base.with_name(f"{base.name}-{k}")
        k += 1
    candidate.mkdir(parents=True)
    return candidate


def load_data(cfg: CliConfig, train: bool = True):
    """Seeded train/test subsets of the cached MNIST splits"""
    def take(split: Split, field: str, k: int) -> Dataset:
        try:
            return subset(load_split(cfg.data_dir, split), k, cfg.seed)
        except InvalidInputError as e:
            raise ConfigurationError(field, f"{split.value} {e}") from e

    train_set: Optional[Dataset] = None
    if train:
        train_set = take(Split.TRAIN, "train_k", cfg.train_k)
    test_set = take(Split.TEST, "test_k", cfg.test_k)
    return train_set, test_set


# Commands


def cmd_fetch(cfg: CliConfig) -> int:
    from app.data.fetch import fetch_mnist

    report = asyncio.run(fetch_mnist(cfg.data_dir))
    for name in report.up_to_date:
        print(f"{name}: up to date")
    for name in report.downloaded:
        print(f"{name}: downloaded")
    return EXIT_OK


def cmd_train(cfg: CliConfig) -> int:
    train_set, test_set = load_data(cfg)
    run_dir = make_run_dir(cfg.out, "train")
    metrics = MetricsCollector()

    model, record = run_once(cfg.train_config(), train_set, test_set, metrics)
    reporting.write_run_artifacts(run_dir, record)
    model.save(run_dir / "model.npz")
    metrics.write_textfile(run_dir / "metrics.prom")

    final = record.final
    print(f"train accuracy {final.train_acc:.4f}  test accuracy {final.test_acc:.4f}")
    print(f"artifacts in {run_dir}")
    return EXIT_OK


def _noisy_test_set(cfg: CliConfig, test_set: Dataset) -> Dataset:
    if cfg.noise is None or cfg.noise_level == 0.0:
        return test_set
    return noisy_dataset(test_set, NoiseSpec(cfg.noise, cfg.noise_level, cfg.seed))


def cmd_eval(cfg: CliConfig) -> int:
    if cfg.model is None:
        raise ConfigurationError("model", "eval needs --model PATH")
    if not cfg.model.exists():
        raise FileNotFoundError(f"{cfg.model} not found")
    model = HybridModel.load(cfg.model)
    _, test_set = load_data(cfg, train=False)
    result = evaluate(model, _noisy_test_set(cfg, test_set))

    run_dir = make_run_dir(cfg.out, "eval")
    reporting.write_json(run_dir / "eval.json", {
        "schema_version": 1,
        "model": str(cfg.model),
        "noise": None if cfg.noise is None else cfg.noise.value,
        "noise_level": cfg.noise_level,
        "accuracy": result.accuracy,
        "loss": result.loss,
        "confusion": result.confusion.to_list(),
        "per_class_accuracy": result.confusion.per_class_accuracy(),
    })
    reporting.write_confusion_csv(run_dir / "confusion.csv", result.confusion)
    print(f"test accuracy {result.accuracy:.4f}")
    print(f"artifacts in {run_dir}")
    return EXIT_OK


def _sweep_values(cfg: CliConfig, default: Sequence[float]) -> List[float]:
    values = default if cfg.values is None else cfg.values
    if not values:
        raise ConfigurationError("values", "sweep needs at least one value")
    return list(values)


def cmd_sweep_xi(cfg: CliConfig) -> int:
    xi_values = _sweep_values(cfg, DEFAULT_XI_VALUES)
    for xi in xi_values:
        if not 0.0 <= xi <= 1.0:
            raise ConfigurationError("values", f"xi must be in [0, 1], got {xi}")
    train_set, test_set = load_data(cfg)
    run_dir = make_run_dir(cfg.out, "sweep-xi")
    metrics = MetricsCollector()

    points = sweep_xi(cfg.train_config(), xi_values, train_set, test_set, metrics)
    reporting.write_sweep_artifacts(run_dir, "sweep_xi", points, "Accuracy vs quantum proportion")
    metrics.write_textfile(run_dir / "metrics.prom")
    print(f"{len(points)} runs, artifacts in {run_dir}")
    return EXIT_OK


def cmd_sweep_qubits(cfg: CliConfig) -> int:
    qubit_values = _sweep_values(cfg, DEFAULT_QUBITS)
    if any(q != int(q) or not 1 <= q <= settings.max_qubits for q in qubit_values):
        raise ConfigurationError("values", f"qubit counts must be integers in [1, {settings.max_qubits}]")
    if cfg.xi_values is not None and any(not 0.0 <= xi <= 1.0 for xi in cfg.xi_values):
        raise ConfigurationError("xi_values", "xi must be in [0, 1]")
    train_set, test_set = load_data(cfg)
    run_dir = make_run_dir(cfg.out, "sweep-qubits")
    metrics = MetricsCollector()

    points = sweep_qubits(
        cfg.train_config(), [int(q) for q in qubit_values], train_set, test_set, cfg.xi_values, metrics
    )
    reporting.write_sweep_artifacts(run_dir, "sweep_qubits", points, "Accuracy by qubit count")
    metrics.write_textfile(run_dir / "metrics.prom")
    print(f"{len(points)} runs, artifacts in {run_dir}")
    return EXIT_OK


def cmd_sweep_noise(cfg: CliConfig) -> int:
    levels = _sweep_values(cfg, DEFAULT_NOISE_LEVELS)
    if any(level < 0.0 for level in levels):
        raise ConfigurationError("values", "noise levels must be >= 0")
    kinds = list(NoiseKind) if cfg.noise is None else [cfg.noise]
    run_dir = make_run_dir(cfg.out, "sweep-noise")

    if cfg.model is not None:
        if not cfg.model.exists():
            raise FileNotFoundError(f"{cfg.model} not found")
        model = HybridModel.load(cfg.model)
        _, test_set = load_data(cfg, train=False)
    else:
        train_set, test_set = load_data(cfg)
        model, record = run_once(cfg.train_config(), train_set, test_set)
        reporting.write_run_artifacts(run_dir, record)
        model.save(run_dir / "model.npz")

    points = sweep_noise(model, test_set, kinds, levels, repeat_seeds(cfg))
    reporting.write_noise_csv(run_dir / "sweep_noise.csv", points)
    reporting.noise_chart(points).write(run_dir / "sweep_noise.svg")
    print(f"{len(points)} evaluations, artifacts in {run_dir}")
    return EXIT_OK


COMMANDS = {
    "fetch": cmd_fetch,
    "train": cmd_train,
    "eval": cmd_eval,
    "sweep-xi": cmd_sweep_xi,
    "sweep-qubits": cmd_sweep_qubits,
    "sweep-noise": cmd_sweep_noise,
}


def _describe(e: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(part) for part in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    try:
        cfg = load_config(args)
    except ValidationError as e:
        print(f"error: invalid configuration: {_describe(e)}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigurationError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    effective = json.dumps(cfg.model_dump(mode="json"), indent=2, sort_keys=True)
    print(f"ppf-qsnn {args.command} with configuration:\n{effective}")
    logger.info(f"Starting {args.command}")

    try:
        return COMMANDS[args.command](cfg)
    except (ConfigurationError, InvalidInputError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, IdxFormatError, FetchError, TrainingDivergedError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
