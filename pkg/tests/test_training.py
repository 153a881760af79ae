"""
Test the optimizer, evaluation, the training loop, sweeps and reports
"""
import csv
import json
import math
import xml.etree.ElementTree as ET
from types import SimpleNamespace

import numpy as np
import pytest

from app.config import settings
from app.data.dataset import Dataset, Split, subset
from app.data.mnist import has_mnist, load_split
from app.data.noise import NoiseKind
from app.errors import ConfigurationError, InvalidInputError, ShapeError, TrainingDivergedError
from app.fusion.loss import predict
from app.quantum.gradients import circuit_evaluations
from app.training import reporting
from app.training.config import TrainConfig
from app.training.metrics import ConfusionMatrix, EpochMetrics
from app.training.optimizer import SGD, sgd_step
from app.training.sweeps import (
    aggregate_noise,
    aggregate_runs,
    mean_std,
    run_once,
    sweep_noise,
    sweep_qubits,
    sweep_xi,
)
from app.training.trainer import evaluate, features, train
from app.utils.metrics import MetricsCollector
from app.utils.seeding import Stream
from app.utils.svg_chart import LineChart


def random_dataset(n: int = 40, d: int = 16, seed: int = 0, split: Split = Split.TRAIN) -> Dataset:
    rng = np.random.default_rng(seed)
    return Dataset(rng.random((n, d)), np.arange(n) % 10, split)


def prototype_dataset(per_class: int = 4, d: int = 784, seed: int = 0) -> Dataset:
    """Binary class prototypes; pooled spike rates reproduce them exactly"""
    rng = np.random.default_rng(seed)
    prototypes = (rng.random((10, d)) < 0.5).astype(np.float32)
    labels = np.tile(np.arange(10), per_class)
    return Dataset(prototypes[labels], labels)


def small_config(**overrides) -> TrainConfig:
    values = dict(epochs=2, batch_size=8, n_qubits=3, hidden=8, timesteps=10, train_k=40, test_k=20)
    values.update(overrides)
    return TrainConfig(**values)


def snapshot(model):
    return {name: value.copy() for name, value in model.parameters().items()}


class TestSGD:
    """Test the update rule"""

    def test_zero_gradient(self):
        p = np.array([1.0, -2.0])
        updated, _ = sgd_step(p.copy(), np.zeros(2), lr=0.5, momentum=0.9, velocity=np.zeros(2))
        np.testing.assert_array_equal(updated, p)

    def test_plain_step(self):
        p, g = np.array([1.0, 2.0]), np.array([0.5, -1.0])
        updated, velocity = sgd_step(p.copy(), g, lr=1.0)
        np.testing.assert_array_equal(updated, p - g)
        np.testing.assert_array_equal(velocity, g)

    def test_two_momentum_steps(self):
        """p2 = p0 - lr g1 - lr (m g1 + g2)"""
        p0, g1, g2 = np.array([1.0]), np.array([0.2]), np.array([-0.4])
        lr, m = 0.1, 0.9
        p, v = sgd_step(p0.copy(), g1, lr, m, None)
        p, v = sgd_step(p, g2, lr, m, v)
        np.testing.assert_allclose(p, p0 - lr * g1 - lr * (m * g1 + g2), atol=1e-15)
        np.testing.assert_allclose(v, m * g1 + g2, atol=1e-15)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            sgd_step(np.zeros(3), np.zeros(2), lr=0.1)
        with pytest.raises(ShapeError):
            sgd_step(np.zeros(2), np.zeros(2), lr=0.1, velocity=np.zeros(3))

    def test_named_parameters(self):
        params = {"a": np.ones(2), "b": np.zeros(1)}
        optimizer = SGD(lr=0.5, momentum=0.5)
        optimizer.step(params, {"a": np.ones(2), "b": np.ones(1)})
        optimizer.step(params, {"a": np.ones(2), "b": np.ones(1)})
        np.testing.assert_allclose(params["a"], 1.0 - 0.5 - 0.5 * 1.5)
        with pytest.raises(ShapeError):
            optimizer.step(params, {"a": np.ones(2)})


class TestConfusionMatrix:
    """Test accounting identities"""

    def test_from_predictions(self):
        cm = ConfusionMatrix.from_predictions([0, 1, 1, 2], [0, 1, 2, 2])
        assert cm.counts[1, 2] == 1
        assert cm.total == 4
        assert cm.accuracy == 0.75
        np.testing.assert_array_equal(cm.class_counts()[:3], [1, 2, 1])

    def test_per_class_accuracy(self):
        cm = ConfusionMatrix.from_predictions([0, 1, 1], [0, 1, 0])
        per_class = cm.per_class_accuracy()
        assert per_class[0] == 1.0 and per_class[1] == 0.5
        assert per_class[5] is None

    def test_validation(self):
        with pytest.raises(ShapeError):
            ConfusionMatrix(np.zeros((9, 10)))
        with pytest.raises(InvalidInputError):
            ConfusionMatrix(-np.ones((10, 10)))
        with pytest.raises(InvalidInputError):
            ConfusionMatrix(np.zeros((10, 10))).accuracy

    def test_epoch_metric_bounds(self):
        with pytest.raises(InvalidInputError):
            EpochMetrics(1, train_acc=1.2, train_loss=0.5)
        with pytest.raises(InvalidInputError):
            EpochMetrics(1, train_acc=0.5, train_loss=-0.1)


class TestEvaluate:
    """Test evaluation on fixed models"""

    def test_certain_model_is_perfect(self, mocker):
        labels = np.arange(30) % 10
        ds = Dataset(np.eye(10)[labels], labels)
        model = small_config().build_model(n_inputs=10)
        mocker.patch("app.training.trainer.features", side_effect=lambda m, px, *a: (px, px))
        mocker.patch.object(model, "forward", side_effect=lambda rates, angles: SimpleNamespace(q_h=rates))

        result = evaluate(model, ds, batch_size=7)
        assert result.accuracy == 1.0
        np.testing.assert_array_equal(result.confusion.counts, np.diag(np.full(10, 3)))
        assert result.loss == 0.0

    def test_uniform_model_predicts_class_zero(self, mocker):
        ds = random_dataset(n=50, d=10)
        model = small_config().build_model(n_inputs=10)
        mocker.patch("app.training.trainer.features", side_effect=lambda m, px, *a: (px, px))
        mocker.patch.object(
            model, "forward",
            side_effect=lambda rates, angles: SimpleNamespace(q_h=np.full((len(rates), 10), 0.1)),
        )

        result = evaluate(model, ds)
        assert result.accuracy == pytest.approx(0.1)
        np.testing.assert_array_equal(result.predictions, 0)

    def test_row_sums_are_class_counts(self):
        ds = random_dataset(n=37, seed=3)
        model = small_config().build_model(n_inputs=16)
        result = evaluate(model, ds, batch_size=10)
        np.testing.assert_array_equal(result.confusion.class_counts(), ds.class_counts())
        assert result.confusion.total == len(ds)
        assert result.accuracy == np.trace(result.confusion.counts) / len(ds)

    def test_repeatable(self):
        ds = random_dataset(seed=4)
        model = small_config().build_model(n_inputs=16)
        a, b = evaluate(model, ds), evaluate(model, ds)
        np.testing.assert_array_equal(a.predictions, b.predictions)
        assert a.loss == b.loss

    def test_empty_set(self):
        model = small_config().build_model(n_inputs=16)
        with pytest.raises(InvalidInputError):
            evaluate(model, random_dataset(n=0))


class TestTrain:
    """Test the training loop"""

    def test_zero_learning_rate_freezes_model(self):
        cfg = small_config().model_copy(update={"lr": 0.0})
        model = cfg.build_model(n_inputs=16)
        before = snapshot(model)
        train(model, random_dataset(), cfg)
        for name, value in model.parameters().items():
            np.testing.assert_array_equal(value, before[name])

    def test_deterministic(self):
        cfg = small_config(momentum=0.5)
        train_set, test_set = random_dataset(seed=1), random_dataset(n=20, seed=2, split=Split.TEST)
        records, params = [], []
        for _ in range(2):
            model = cfg.build_model(n_inputs=16)
            records.append(train(model, train_set, cfg, test_set))
            params.append(snapshot(model))
        assert [e.as_dict() for e in records[0].epochs] == [e.as_dict() for e in records[1].epochs]
        np.testing.assert_array_equal(records[0].confusion.counts, records[1].confusion.counts)
        for name in params[0]:
            np.testing.assert_array_equal(params[0][name], params[1][name])

    def test_record_contents(self):
        cfg = small_config(epochs=3)
        record = train(cfg.build_model(n_inputs=16), random_dataset(), cfg, random_dataset(n=20, seed=5))
        assert [e.epoch for e in record.epochs] == [1, 2, 3]
        assert record.config["xi"] == cfg.xi
        for e in record.epochs:
            assert 0.0 <= e.train_acc <= 1.0 and 0.0 <= e.test_acc <= 1.0
            assert e.train_loss >= 0.0 and e.test_loss >= 0.0
        assert record.confusion.total == 20
        summary = record.to_summary()
        assert summary["schema_version"] == 1
        assert len(summary["confusion"]) == 10
        assert summary["final"]["test_acc"] == record.final.test_acc

    def test_without_test_set_confusion_on_train(self):
        cfg = small_config(epochs=1)
        record = train(cfg.build_model(n_inputs=16), random_dataset(), cfg)
        assert record.final.test_acc is None
        assert record.confusion.total == 40

    def test_nan_loss_aborts(self, mocker):
        mocker.patch("app.training.trainer.nll_loss", return_value=float("nan"))
        cfg = small_config()
        with pytest.raises(TrainingDivergedError, match="learning rate"):
            train(cfg.build_model(n_inputs=16), random_dataset(), cfg)

    def test_metrics_recorded(self):
        cfg = small_config(epochs=2, batch_size=16)
        metrics = MetricsCollector()
        model = cfg.build_model(n_inputs=16)
        train(model, random_dataset(), cfg, metrics=metrics)
        summary = metrics.get_summary()
        batches = 2 * math.ceil(40 / 16)
        assert summary["epochs"] == 2
        assert summary["runs"] == 1
        assert summary["batches"] == batches
        assert summary["samples_processed"] == 80
        assert summary["circuit_evaluations"] == batches * circuit_evaluations(model.circuit)
        assert b"batches_total 6.0" in metrics.get_metrics()

    def test_xi_zero_predictions_match_classical_head(self):
        cfg = small_config(xi=0.0)
        test_set = random_dataset(n=30, seed=6)
        model, _ = run_once(cfg, random_dataset(), test_set)
        rates, _ = features(model, test_set.images, Stream.EVAL_SPIKES, 0, np.arange(30))
        np.testing.assert_array_equal(
            evaluate(model, test_set).predictions, predict(model.classical_probs(rates))
        )

    def test_overfits_prototypes(self):
        """Loss falls and the batch is fit perfectly after enough steps"""
        ds = prototype_dataset()
        cfg = TrainConfig(epochs=60, batch_size=40, n_qubits=3, hidden=32, xi=0.5)
        record = train(cfg.build_model(), ds, cfg)
        assert record.final.train_loss < 0.8 * record.epochs[0].train_loss
        assert record.final.train_acc == 1.0

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(xi=1.5)
        with pytest.raises(ValueError):
            TrainConfig(lr=0.0)
        with pytest.raises(ValueError):
            TrainConfig(unknown_field=1)


class TestSweeps:
    """Test the sweep harnesses"""

    def test_xi_sweep_shape(self):
        cfg = small_config(epochs=1, n_seeds=2)
        points = sweep_xi(cfg, [0.0, 0.5, 1.0], random_dataset(), random_dataset(n=20, seed=7))
        assert [(p.xi, p.seed) for p in points] == [
            (0.0, 0), (0.0, 1), (0.5, 0), (0.5, 1), (1.0, 0), (1.0, 1)
        ]

    def test_xi_zero_point_equals_standalone_run(self):
        cfg = small_config(epochs=1)
        train_set, test_set = random_dataset(), random_dataset(n=20, seed=7)
        point = sweep_xi(cfg, [0.0], train_set, test_set)[0]
        _, record = run_once(small_config(epochs=1, xi=0.0), train_set, test_set)
        assert [e.as_dict() for e in point.record.epochs] == [e.as_dict() for e in record.epochs]

    def test_qubit_sweep(self):
        cfg = small_config(epochs=1)
        points = sweep_qubits(cfg, [2, 3], random_dataset(), xi_values=[0.2, 0.8])
        assert [(p.n_qubits, p.xi) for p in points] == [(2, 0.2), (2, 0.8), (3, 0.2), (3, 0.8)]

    def test_invalid_xi(self):
        with pytest.raises(InvalidInputError):
            sweep_xi(small_config(), [1.2], random_dataset())

    def test_empty_values(self):
        with pytest.raises(ConfigurationError):
            sweep_xi(small_config(), [], random_dataset())
        with pytest.raises(ConfigurationError):
            sweep_qubits(small_config(), [], random_dataset())

    def test_noise_sweep(self):
        cfg = small_config(epochs=1)
        test_set = random_dataset(n=30, seed=8)
        model, _ = run_once(cfg, random_dataset(), test_set)
        points = sweep_noise(model, test_set, list(NoiseKind), [0.0, 0.1, 0.2, 0.4])
        assert len(points) == 8
        clean = evaluate(model, test_set).accuracy
        for p in points:
            if p.level == 0.0:
                assert p.accuracy == clean

    def test_mean_std(self):
        assert mean_std([1.0, 3.0]) == (2.0, 1.0)


class TestReporting:
    """Test CSV, JSON and SVG artifacts"""

    def test_run_artifacts(self, tmp_path):
        cfg = small_config()
        record = train(cfg.build_model(n_inputs=16), random_dataset(), cfg, random_dataset(n=20, seed=9))
        written = reporting.write_run_artifacts(tmp_path, record)
        assert set(written) == {"run.json", "epochs.csv", "curves.svg", "confusion.csv"}

        with open(tmp_path / "epochs.csv", newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["epoch", "train_acc", "test_acc", "train_loss", "test_loss"]
        assert len(rows) == 1 + cfg.epochs

        with open(tmp_path / "confusion.csv", newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["true\\pred"] + [str(k) for k in range(10)]
        assert sum(int(v) for row in rows[1:] for v in row[1:]) == 20

        summary = json.loads((tmp_path / "run.json").read_text())
        assert summary["schema_version"] == 1
        assert summary["config"]["n_qubits"] == 3
        ET.fromstring((tmp_path / "curves.svg").read_text())

    def test_epochs_csv_reproducible(self, tmp_path):
        cfg = small_config()
        for name in ("a", "b"):
            record = train(cfg.build_model(n_inputs=16), random_dataset(), cfg, random_dataset(n=20, seed=9))
            reporting.write_epochs_csv(tmp_path / f"{name}.csv", record)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_sweep_csvs(self, tmp_path):
        cfg = small_config(epochs=1, n_seeds=2)
        points = sweep_xi(cfg, [0.0, 1.0], random_dataset(), random_dataset(n=20, seed=7))
        reporting.write_sweep_csv(tmp_path / "sweep_xi.csv", points)
        with open(tmp_path / "sweep_xi.csv", newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["n_qubits", "xi", "seed", "train_acc", "test_acc", "train_loss", "test_loss"]
        assert len(rows) == 5

        chart = reporting.sweep_chart(points, "xi sweep")
        assert len(chart.series) == 1
        assert len(chart.series[0].xs) == 2

    def test_sweep_keeps_per_point_runs(self, tmp_path):
        cfg = small_config(epochs=2, n_seeds=2)
        points = sweep_xi(cfg, [0.0, 1.0], random_dataset(), random_dataset(n=20, seed=7))
        written = reporting.write_sweep_artifacts(tmp_path, "sweep_xi", points, "xi sweep")

        for name in ("sweep_xi.csv", "sweep_xi.svg", "sweep_xi_curves_acc.svg", "sweep_xi_curves_nll.svg"):
            assert (tmp_path / name).exists(), name
        ET.fromstring((tmp_path / "sweep_xi_curves_acc.svg").read_text())

        for p in points:
            point_dir = tmp_path / reporting.point_dir_name(p)
            assert written[point_dir.name] == point_dir
            with open(point_dir / "epochs.csv", newline="") as f:
                rows = list(csv.reader(f))
            assert len(rows) == 1 + cfg.epochs
            assert float(rows[-1][2]) == p.record.final.test_acc
            with open(point_dir / "confusion.csv", newline="") as f:
                rows = list(csv.reader(f))
            assert sum(int(v) for row in rows[1:] for v in row[1:]) == 20
        assert len({reporting.point_dir_name(p) for p in points}) == 4

    def test_sweep_curves_average_seeds(self):
        cfg = small_config(epochs=2, n_seeds=2)
        points = sweep_xi(cfg, [0.0, 1.0], random_dataset(), random_dataset(n=20, seed=7))
        chart = reporting.sweep_curves_chart(points, "acc")
        assert [s.name for s in chart.series] == ["3q xi=0", "3q xi=1"]

        series = chart.series[0]
        assert series.xs == [1.0, 2.0]
        at_zero = [p for p in points if p.xi == 0.0]
        assert series.ys[-1] == pytest.approx(np.mean([p.record.final.test_acc for p in at_zero]))

        nll = reporting.sweep_curves_chart(points, "loss")
        assert nll.y_label == "test NLL"
        with pytest.raises(ValueError):
            reporting.sweep_curves_chart(points, "f1")

    def test_noise_csv(self, tmp_path):
        cfg = small_config(epochs=1)
        test_set = random_dataset(n=20, seed=10)
        model, _ = run_once(cfg, random_dataset(), test_set)
        points = sweep_noise(model, test_set, [NoiseKind.GAUSSIAN], [0.0, 0.3], seeds=[0, 1])
        reporting.write_noise_csv(tmp_path / "sweep_noise.csv", points)
        rows = (tmp_path / "sweep_noise.csv").read_text().splitlines()
        assert rows[0] == "kind,level,seed,accuracy"
        assert len(rows) == 5
        assert rows[1].startswith("gaussian,0.0,0,")
        assert len(reporting.noise_chart(points).series) == 1


class TestLineChart:
    """Test the SVG writer"""

    def test_well_formed_and_deterministic(self, tmp_path):
        chart = LineChart("t", "x", "y")
        chart.add_series("a", [0, 1, 2], [0.1, 0.5, 0.4], yerr=[0.01, 0.02, 0.0])
        chart.add_series("b", [0, 1, 2], [0.3, 0.2, 0.6])
        svg = chart.render()
        root = ET.fromstring(svg)
        polylines = root.findall(".//{http://www.w3.org/2000/svg}polyline")
        assert len(polylines) == 2
        assert chart.render() == svg
        assert chart.write(tmp_path / "c.svg").read_text().strip() == svg

    def test_single_point(self):
        chart = LineChart("t", "x", "y")
        chart.add_series("a", [1.0], [0.5])
        ET.fromstring(chart.render())

    def test_mismatched_series(self):
        with pytest.raises(ValueError):
            LineChart("t", "x", "y").add_series("a", [0, 1], [0.5])


@pytest.mark.slow
@pytest.mark.skipif(not has_mnist(settings.data_dir), reason="Requires MNIST downloaded")
class TestDeskScale:
    """Reference runs on a 2000/1000 MNIST subset with the default configuration"""

    def test_default_run_learns(self):
        cfg = TrainConfig()
        train_set = subset(load_split(settings.data_dir, Split.TRAIN), cfg.train_k, cfg.seed)
        test_set = subset(load_split(settings.data_dir, Split.TEST), cfg.test_k, cfg.seed)
        _, record = run_once(cfg, train_set, test_set)
        assert record.final.test_acc >= 0.80

    def test_xi_sweep_interior_not_worse_than_ends(self):
        cfg = TrainConfig(n_seeds=3)
        train_set = subset(load_split(settings.data_dir, Split.TRAIN), cfg.train_k, cfg.seed)
        test_set = subset(load_split(settings.data_dir, Split.TEST), cfg.test_k, cfg.seed)
        xi_values = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
        points = sweep_xi(cfg, xi_values, train_set, test_set)
        assert len(points) == len(xi_values) * 3

        means = {xi: mean for (_, xi), (mean, _) in aggregate_runs(points, "test_acc").items()}
        best_interior = max(means[xi] for xi in xi_values[1:-1])
        assert best_interior >= max(means[0.0], means[1.0]) - 0.01

    def test_noise_degrades_monotonically(self):
        cfg = TrainConfig()
        train_set = subset(load_split(settings.data_dir, Split.TRAIN), cfg.train_k, cfg.seed)
        test_set = subset(load_split(settings.data_dir, Split.TEST), cfg.test_k, cfg.seed)
        model, _ = run_once(cfg, train_set, test_set)
        clean = evaluate(model, test_set).accuracy

        levels = [0.0, 0.1, 0.2, 0.4]
        points = sweep_noise(model, test_set, [NoiseKind.UNIFORM, NoiseKind.GAUSSIAN], levels, seeds=[0, 1, 2])
        assert all(p.accuracy == clean for p in points if p.level == 0.0)

        stats = aggregate_noise(points)
        for kind in (NoiseKind.UNIFORM, NoiseKind.GAUSSIAN):
            means = [stats[(kind, level)][0] for level in levels]
            for lower, higher in zip(means, means[1:]):
                assert higher <= lower + 0.02, kind
