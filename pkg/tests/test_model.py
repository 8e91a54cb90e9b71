"""Tests for the tanh perceptron and its Jacobian products."""

import numpy as np
import pytest

from ciccg import model, numkit
from ciccg.exceptions import DimensionMismatch, InvalidParameter
from ciccg.model import Batch, MlpSpec


def reference_forward(spec, w, x):
    """Independent straight-line re-evaluation of the two-layer formula."""
    d, h, p = spec.input_dim, spec.hidden, spec.output_dim
    w1 = np.reshape(w[: h * d], (h, d))
    b1 = w[h * d : h * d + h]
    w2 = np.reshape(w[h * d + h : h * d + h + p * h], (p, h))
    b2 = w[h * d + h + p * h :]
    hidden = np.tanh(w1 @ x + b1)
    return w2 @ hidden + b2


class TestSpec:
    def test_parameter_count(self):
        assert MlpSpec(3, 14, 3).n_params == 101  # 42 + 14 + 42 + 3

    def test_invalid_dims(self):
        with pytest.raises(InvalidParameter):
            MlpSpec(0, 14, 3)


class TestForward:
    def test_zero_weights_zero_output(self):
        spec = MlpSpec(3, 4, 2)
        y = model.forward(spec, np.zeros(spec.n_params), np.array([0.3, -0.7, 1.0]))
        np.testing.assert_array_equal(y, np.zeros(2))

    def test_bias_passthrough(self):
        spec = MlpSpec(3, 4, 3)
        w = np.zeros(spec.n_params)
        w[-3:] = [0.2, 1.0, 0.0]
        y = model.forward(spec, w, np.array([0.5, 0.5, 0.5]))
        np.testing.assert_allclose(y, [0.2, 1.0, 0.0])

    def test_matches_reference(self):
        spec = MlpSpec(3, 14, 3)
        rng = np.random.default_rng(4)
        for _ in range(20):
            w = rng.normal(size=spec.n_params)
            x = rng.uniform(-1, 1, 3)
            np.testing.assert_allclose(
                model.forward(spec, w, x), reference_forward(spec, w, x), rtol=1e-12
            )

    def test_batched_matches_single(self):
        spec = MlpSpec(3, 5, 2)
        rng = np.random.default_rng(5)
        w = rng.normal(size=spec.n_params)
        xs = rng.uniform(-1, 1, (7, 3))
        batched = model.forward(spec, w, xs)
        for i, x in enumerate(xs):
            np.testing.assert_allclose(batched[i], model.forward(spec, w, x))

    def test_dimension_mismatch(self):
        spec = MlpSpec(3, 4, 2)
        with pytest.raises(DimensionMismatch):
            model.forward(spec, np.zeros(spec.n_params), np.zeros(4))
        with pytest.raises(DimensionMismatch):
            model.forward(spec, np.zeros(3), np.zeros(3))


class TestResiduals:
    def test_perfect_model_zero_residuals(self):
        spec = MlpSpec(3, 5, 3)
        rng = np.random.default_rng(6)
        w = rng.normal(size=spec.n_params)
        x = rng.uniform(-1, 1, (10, 3))
        batch = Batch(x, model.forward(spec, w, x))
        np.testing.assert_allclose(model.residuals(spec, w, batch), 0.0, atol=1e-15)

    def test_zero_model_residuals_equal_targets(self):
        spec = MlpSpec(3, 5, 3)
        rng = np.random.default_rng(7)
        batch = Batch(rng.uniform(-1, 1, (10, 3)), rng.normal(size=(10, 3)))
        np.testing.assert_array_equal(
            model.residuals(spec, np.zeros(spec.n_params), batch), batch.targets
        )


class TestJacobianTransposeProduct:
    def test_zero_cotangent(self):
        spec = MlpSpec(3, 6, 3)
        rng = np.random.default_rng(8)
        w = rng.normal(size=spec.n_params)
        out = model.jacobian_transpose_product(spec, w, rng.uniform(-1, 1, 3), np.zeros(3))
        np.testing.assert_array_equal(out, np.zeros(spec.n_params))

    def test_against_finite_differences(self):
        """J^T v columns match central differences of the forward map."""
        spec = MlpSpec(3, 6, 3)
        rng = np.random.default_rng(9)
        step = 1e-6
        for _ in range(5):
            w = rng.normal(scale=0.8, size=spec.n_params)
            x = rng.uniform(-1, 1, 3)
            v = rng.normal(size=3)
            jt_v = model.jacobian_transpose_product(spec, w, x, v)
            fd = np.empty(spec.n_params)
            for i in range(spec.n_params):
                d = np.zeros(spec.n_params)
                d[i] = step
                fd[i] = v @ (model.forward(spec, w + d, x) - model.forward(spec, w - d, x))
            fd /= 2 * step
            denom = np.maximum(np.abs(jt_v), 1e-6 * np.max(np.abs(jt_v)))
            assert np.max(np.abs(jt_v - fd) / denom) <= 1e-5

    def test_directional_gradient_property(self):
        """<J^T v, h> equals the directional finite difference of v'f."""
        spec = MlpSpec(4, 5, 2)
        rng = np.random.default_rng(10)
        eps = 1e-6
        for _ in range(10):
            w = rng.normal(scale=0.7, size=spec.n_params)
            x = rng.uniform(-1, 1, 4)
            v = rng.normal(size=2)
            h = rng.normal(size=spec.n_params)
            h /= np.linalg.norm(h)
            lhs = model.jacobian_transpose_product(spec, w, x, v) @ h
            rhs = v @ (model.forward(spec, w + eps * h, x) - model.forward(spec, w - eps * h, x))
            rhs /= 2 * eps
            assert abs(lhs - rhs) <= 1e-5 * max(1e-8, abs(lhs), abs(rhs))

    def test_linearized_network_matches_analytic(self):
        """With zero first-layer biases and 1e-8-scaled inputs the network is
        effectively linear; the Jacobian product must match the linear-model
        formula to 1e-6."""
        spec = MlpSpec(3, 5, 2)
        rng = np.random.default_rng(11)
        w = rng.normal(size=spec.n_params)
        d, h, p = 3, 5, 2
        w[h * d : h * d + h] = 0.0  # zero first-layer biases keep activations tiny
        w1, b1, w2, b2 = model.unpack(spec, w)
        x = 1e-8 * rng.uniform(-1, 1, 3)
        v = rng.normal(size=2)
        got = model.jacobian_transpose_product(spec, w, x, v)
        expected = np.concatenate(
            [
                np.outer(w2.T @ v, x).ravel(),  # dW1: (W2^T v) x^T
                w2.T @ v,  # db1
                np.outer(v, w1 @ x).ravel(),  # dW2: v (W1 x)^T
                v,  # db2
            ]
        )
        np.testing.assert_allclose(got, expected, rtol=1e-6, atol=1e-12)

    def test_accumulate_matches_sum(self):
        spec = MlpSpec(3, 4, 3)
        rng = np.random.default_rng(12)
        w = rng.normal(size=spec.n_params)
        xs = rng.uniform(-1, 1, (6, 3))
        vs = rng.normal(size=(6, 3))
        total = model.accumulate_jacobian_products(spec, w, xs, vs)
        by_sample = sum(
            model.jacobian_transpose_product(spec, w, x, v) for x, v in zip(xs, vs)
        )
        np.testing.assert_allclose(total, by_sample, rtol=1e-12)


class TestInit:
    def test_deterministic_by_seed(self):
        spec = MlpSpec(3, 14, 3)
        a = model.init_parameters(spec, numkit.spawn_rng(1, 0))
        b = model.init_parameters(spec, numkit.spawn_rng(1, 0))
        np.testing.assert_array_equal(a, b)

    def test_different_seeds_differ(self):
        spec = MlpSpec(3, 14, 3)
        a = model.init_parameters(spec, numkit.spawn_rng(1, 0))
        b = model.init_parameters(spec, numkit.spawn_rng(2, 0))
        assert not np.allclose(a, b)

    def test_norm_bounded_by_fan_sizes(self):
        """Glorot bounds give |w| < sqrt(84) * sqrt(6/17) < 10 for the 3-14-3 net."""
        spec = MlpSpec(3, 14, 3)
        for seed in range(20):
            w = model.init_parameters(spec, numkit.spawn_rng(seed, 0))
            assert np.all(np.isfinite(w))
            assert np.linalg.norm(w) < 10.0

    def test_biases_zero(self):
        spec = MlpSpec(3, 14, 3)
        w = model.init_parameters(spec, numkit.spawn_rng(3, 0))
        _, b1, _, b2 = model.unpack(spec, w)
        np.testing.assert_array_equal(b1, 0.0)
        np.testing.assert_array_equal(b2, 0.0)


class TestBatch:
    def test_mismatched_lengths_rejected(self):
        with pytest.raises(DimensionMismatch):
            Batch(np.zeros((5, 3)), np.zeros((4, 3)))

    def test_nonfinite_rejected(self):
        targets = np.zeros((2, 3))
        targets[0, 0] = np.nan
        with pytest.raises(InvalidParameter):
            Batch(np.zeros((2, 3)), targets)
