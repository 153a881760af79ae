"""
Test readout layers, proportional fusion, the NLL objective and backprop
"""
import dataclasses

import numpy as np
import pytest

from app.data.dataset import reduce_to_angles
from app.errors import InvalidInputError, MissingCacheError, ShapeError
from app.fusion.backprop import backward
from app.fusion.layers import LinearLayer, linear_forward, relu, softmax
from app.fusion.loss import fuse, nll_loss, predict
from app.fusion.model import HybridModel
from app.spiking.lif import LIFParams, ResetMode
from app.spiking.encoding import EncoderConfig
from app.spiking.frontend import SpikingFrontEnd
from app.training.optimizer import SGD
from app.utils.seeding import Stream


def small_batch(seed: int, n_inputs: int = 12, n_qubits: int = 3, batch: int = 4):
    """Frozen rates, data angles and labels for a small pipeline"""
    rng = np.random.default_rng(seed)
    pixels = rng.random((batch, n_inputs))
    rates = SpikingFrontEnd().rates(pixels, Stream.TRAIN_SPIKES, 0, range(batch))
    angles = reduce_to_angles(pixels, n_qubits)
    labels = rng.integers(0, 10, size=batch)
    return rates, angles, labels


def pipeline_loss(model: HybridModel, rates, angles, labels) -> float:
    return nll_loss(model.forward(rates, angles).q_h, labels)


def prototype_batch(n: int = 64, d: int = 784, seed: int = 0):
    """Binary class prototypes: Poisson rates equal the pixels exactly"""
    rng = np.random.default_rng(seed)
    prototypes = (rng.random((10, d)) < 0.5).astype(float)
    labels = np.arange(n) % 10
    return prototypes[labels], labels


class TestLinearLayer:
    """Test the dense layer and activations"""

    def test_identity(self):
        layer = LinearLayer(np.eye(2), np.zeros(2))
        np.testing.assert_array_equal(linear_forward(layer, [1.0, 2.0]), [1.0, 2.0])

    def test_bias_only(self):
        layer = LinearLayer(np.zeros((1, 3)), np.array([3.0]))
        np.testing.assert_array_equal(linear_forward(layer, [5.0, -1.0, 2.0]), [3.0])

    def test_matches_dot_products(self):
        rng = np.random.default_rng(0)
        layer = LinearLayer(rng.normal(size=(4, 6)), rng.normal(size=4))
        x = rng.normal(size=6)
        expected = [sum(layer.w[i, j] * x[j] for j in range(6)) + layer.b[i] for i in range(4)]
        np.testing.assert_allclose(linear_forward(layer, x), expected, atol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            linear_forward(LinearLayer(np.eye(2), np.zeros(2)), [1.0, 2.0, 3.0])

    def test_non_finite_weights(self):
        with pytest.raises(InvalidInputError):
            LinearLayer(np.array([[np.inf]]), np.zeros(1))

    def test_glorot_bounds(self):
        layer = LinearLayer.glorot(30, 10, np.random.default_rng(1))
        limit = np.sqrt(6 / 40)
        assert np.all(np.abs(layer.w) <= limit)
        assert np.all(layer.b == 0)

    def test_relu(self):
        np.testing.assert_array_equal(relu([-1.0, 0.0, 2.0]), [0.0, 0.0, 2.0])
        np.testing.assert_array_equal(relu([-3.0, -0.5]), [0.0, 0.0])
        np.testing.assert_array_equal(relu([0.5, 4.0]), [0.5, 4.0])


class TestSoftmax:
    """Test probability normalization"""

    def test_uniform(self):
        np.testing.assert_allclose(softmax([0.0, 0.0]), [0.5, 0.5])

    def test_shift_invariant(self):
        x = np.random.default_rng(2).normal(size=10)
        np.testing.assert_allclose(softmax(x + 123.4), softmax(x), atol=1e-12)

    def test_no_overflow(self):
        p = softmax([1000.0, 0.0])
        assert np.all(np.isfinite(p))
        assert p[0] == pytest.approx(1.0)
        assert p[1] == pytest.approx(0.0, abs=1e-300)

    def test_rows_sum_to_one(self):
        p = softmax(np.random.default_rng(3).normal(size=(5, 10)) * 20)
        np.testing.assert_allclose(p.sum(axis=-1), 1.0, atol=1e-12)


class TestFuse:
    """Test the convex combination of head probabilities"""

    def test_xi_zero_is_classical(self):
        q_q, q_c = softmax([1.0, 2.0, 3.0]), softmax([0.5, -1.0, 0.0])
        np.testing.assert_array_equal(fuse(q_q, q_c, 0.0), q_c)

    def test_xi_one_is_quantum(self):
        q_q, q_c = softmax([1.0, 2.0, 3.0]), softmax([0.5, -1.0, 0.0])
        np.testing.assert_array_equal(fuse(q_q, q_c, 1.0), q_q)

    def test_convex_combination(self):
        np.testing.assert_allclose(fuse([1.0, 0.0], [0.0, 1.0], 0.8), [0.8, 0.2])

    def test_result_is_distribution(self):
        rng = np.random.default_rng(4)
        q_q, q_c = softmax(rng.normal(size=(6, 10))), softmax(rng.normal(size=(6, 10)))
        for xi in np.linspace(0, 1, 11):
            fused = fuse(q_q, q_c, xi)
            assert np.all(fused >= 0) and np.all(fused <= 1)
            np.testing.assert_allclose(fused.sum(axis=-1), 1.0, atol=1e-9)

    @pytest.mark.parametrize("xi", [-0.1, 1.5])
    def test_xi_out_of_range(self, xi):
        with pytest.raises(InvalidInputError):
            fuse([1.0, 0.0], [0.0, 1.0], xi)

    def test_invalid_distribution(self):
        with pytest.raises(InvalidInputError):
            fuse([0.7, 0.7], [0.5, 0.5], 0.5)

    def test_ties_go_to_lowest_class(self):
        assert predict(np.full((1, 10), 0.1))[0] == 0
        assert predict(np.array([[0.1, 0.4, 0.4, 0.1]]))[0] == 1


class TestNLLLoss:
    """Test the negative log-likelihood"""

    def test_certain_prediction(self):
        assert nll_loss([[0.0, 1.0]], [1]) == 0.0

    def test_one_over_e(self):
        p = np.exp(-1.0)
        assert nll_loss([[p, 1 - p]], [0]) == pytest.approx(1.0, abs=1e-12)

    def test_batch_mean(self):
        p = np.exp(-2.0)
        assert nll_loss([[1.0, 0.0], [p, 1 - p]], [0, 0]) == pytest.approx(1.0, abs=1e-12)

    def test_zero_probability_clamped(self):
        assert nll_loss([[0.0, 1.0]], [0]) == pytest.approx(-np.log(1e-12))

    def test_empty_batch(self):
        with pytest.raises(InvalidInputError):
            nll_loss(np.zeros((0, 10)), np.zeros(0, dtype=int))

    def test_bad_labels(self):
        with pytest.raises(InvalidInputError):
            nll_loss([[0.5, 0.5]], [10])


class TestHybridModel:
    """Test model construction, isolated heads and persistence"""

    def test_initialize_shapes(self):
        model = HybridModel.initialize(n_qubits=5, hidden=100, seed=0)
        params = model.parameters()
        assert params["hidden.w"].shape == (100, 784)
        assert params["output.w"].shape == (10, 100)
        assert params["readout.w"].shape == (10, 5)
        assert params["thetas"].shape == (15,)
        assert np.all(params["thetas"] >= -np.pi) and np.all(params["thetas"] < np.pi)

    def test_no_hidden_layer(self):
        model = HybridModel.initialize(hidden=0)
        assert model.hidden is None
        assert model.output.w.shape == (10, 784)

    def test_same_seed_same_weights(self):
        a = HybridModel.initialize(seed=3).parameters()
        b = HybridModel.initialize(seed=3).parameters()
        for name in a:
            np.testing.assert_array_equal(a[name], b[name])

    def test_xi_validated(self):
        with pytest.raises(InvalidInputError):
            HybridModel.initialize(xi=1.5)

    @pytest.mark.parametrize("xi,head", [(0.0, "classical"), (1.0, "quantum")])
    def test_degenerate_xi_matches_isolated_head(self, xi, head):
        rates, angles, _ = small_batch(5, n_inputs=40, batch=16)
        model = HybridModel.initialize(n_qubits=3, hidden=8, xi=xi, n_inputs=40, seed=1)
        fused = predict(model.forward(rates, angles).q_h)
        alone = model.classical_probs(rates) if head == "classical" else model.quantum_probs(angles)
        np.testing.assert_array_equal(fused, predict(alone))

    def test_save_and_load(self, tmp_path):
        frontend = SpikingFrontEnd(EncoderConfig(T=12, seed=4), LIFParams(reset=ResetMode.SOFT))
        model = HybridModel.initialize(
            n_qubits=3, hidden=8, xi=0.6, n_inputs=12, seed=2, frontend=frontend, cnot_ring=True
        )
        path = tmp_path / "model.npz"
        model.save(path)
        loaded = HybridModel.load(path)

        assert loaded.xi == 0.6
        assert loaded.frontend == frontend
        assert loaded.circuit == model.circuit
        for name, value in model.parameters().items():
            np.testing.assert_array_equal(loaded.parameters()[name], value)

        rates, angles, _ = small_batch(6)
        np.testing.assert_array_equal(
            loaded.forward(rates, angles).q_h, model.forward(rates, angles).q_h
        )


class TestBackward:
    """Test analytic gradients of the fused loss"""

    def test_xi_zero_silences_quantum_head(self):
        rates, angles, labels = small_batch(7)
        model = HybridModel.initialize(n_qubits=3, hidden=6, xi=0.0, n_inputs=12)
        grads = backward(model, model.forward(rates, angles), labels).params
        for name in ("readout.w", "readout.b", "thetas"):
            np.testing.assert_array_equal(grads[name], 0.0)

    def test_xi_one_silences_classical_head(self):
        rates, angles, labels = small_batch(8)
        model = HybridModel.initialize(n_qubits=3, hidden=6, xi=1.0, n_inputs=12)
        grads = backward(model, model.forward(rates, angles), labels).params
        for name in ("hidden.w", "hidden.b", "output.w", "output.b"):
            np.testing.assert_array_equal(grads[name], 0.0)

    @pytest.mark.parametrize("hidden", [6, 0])
    def test_matches_finite_differences(self, hidden):
        """20 random instances with frozen spike trains, 1e-5 relative"""
        eps = 1e-6
        for instance in range(10):
            rates, angles, labels = small_batch(100 + instance)
            model = HybridModel.initialize(
                n_qubits=3, hidden=hidden, xi=0.3 + 0.05 * instance, n_inputs=12, seed=instance
            )
            grads = backward(model, model.forward(rates, angles), labels).params
            rng = np.random.default_rng(instance)

            for name, value in model.parameters().items():
                flat = value.reshape(-1)
                for i in rng.choice(flat.size, size=min(8, flat.size), replace=False):
                    original = flat[i]
                    flat[i] = original + eps
                    plus = pipeline_loss(model, rates, angles, labels)
                    flat[i] = original - eps
                    minus = pipeline_loss(model, rates, angles, labels)
                    flat[i] = original
                    numeric = (plus - minus) / (2 * eps)
                    analytic = grads[name].reshape(-1)[i]
                    assert analytic == pytest.approx(numeric, rel=1e-5, abs=1e-8), name

    def test_missing_cache(self):
        rates, angles, labels = small_batch(9)
        model = HybridModel.initialize(n_qubits=3, hidden=6, n_inputs=12)
        cache = model.forward(rates, angles)
        with pytest.raises(MissingCacheError):
            backward(model, None, labels)
        with pytest.raises(MissingCacheError):
            backward(model, dataclasses.replace(cache, q_c=None), labels)
        with pytest.raises(MissingCacheError):
            backward(model, dataclasses.replace(cache, hidden_act=None), labels)

    def test_overfit_smoke(self):
        """50 SGD steps at lr 0.05 on a fixed 64-sample batch cut the loss by 20%"""
        pixels, labels = prototype_batch()
        model = HybridModel.initialize(n_qubits=5, hidden=100, xi=0.8, seed=0)
        rates = model.frontend.rates(pixels, Stream.TRAIN_SPIKES, 0, range(len(labels)))
        angles = reduce_to_angles(pixels, 5)
        optimizer = SGD(lr=0.05)

        initial = pipeline_loss(model, rates, angles, labels)
        for _ in range(50):
            cache = model.forward(rates, angles)
            optimizer.step(model.parameters(), backward(model, cache, labels).params)
        final = pipeline_loss(model, rates, angles, labels)
        assert final <= 0.8 * initial
