"""Layer primitives: frozen hand-computed cases and finite-difference checks."""

import numpy as np
import pytest

from spinalfc.errors import ConfigError, DataError, ShapeError, StateError
from spinalfc.gradcheck import numeric_gradient, relative_error
from spinalfc.nn import Dropout, LinearLayer, Relu, init_layer, nll_loss
from spinalfc.rng import init_rng


def make_layer(in_dim, out_dim, seed=0, dtype=np.float64):
    return init_layer(in_dim, out_dim, init_rng(seed), dtype=dtype)


class TestLinearForward:
    def test_identity_layer(self):
        lyr = LinearLayer(np.eye(3), np.zeros(3))
        x = np.random.default_rng(0).standard_normal((4, 3))
        np.testing.assert_array_equal(lyr.forward(x), x)

    def test_zero_input_gives_bias_rows(self):
        lyr = LinearLayer(np.ones((2, 3)), np.array([1.0, 2.0, 3.0]))
        out = lyr.forward(np.zeros((4, 2)))
        np.testing.assert_array_equal(out, np.tile([1.0, 2.0, 3.0], (4, 1)))

    def test_hand_computed(self):
        lyr = LinearLayer(np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([1.0, 1.0]))
        np.testing.assert_array_equal(lyr.forward(np.array([[1.0, 2.0]])), [[2.0, 3.0]])

    def test_shape_error(self):
        with pytest.raises(ShapeError):
            make_layer(3, 2).forward(np.zeros((1, 4)))


class TestLinearBackward:
    def test_zero_grad_out(self):
        lyr = make_layer(3, 2)
        lyr.forward(np.ones((2, 3)))
        g_in = lyr.backward(np.zeros((2, 2)))
        np.testing.assert_array_equal(lyr.dW, np.zeros((3, 2)))
        np.testing.assert_array_equal(lyr.db, np.zeros(2))
        np.testing.assert_array_equal(g_in, np.zeros((2, 3)))

    def test_hand_outer_product(self):
        lyr = LinearLayer(np.zeros((2, 1)), np.zeros(1))
        lyr.forward(np.array([[1.0, 2.0]]))
        lyr.backward(np.array([[1.0]]))
        np.testing.assert_array_equal(lyr.dW, [[1.0], [2.0]])
        np.testing.assert_array_equal(lyr.db, [1.0])

    def test_backward_without_forward(self):
        with pytest.raises(StateError):
            make_layer(2, 2).backward(np.zeros((1, 2)))

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        lyr = make_layer(4, 3, seed=1)
        x = rng.standard_normal((2, 4))
        target = rng.standard_normal((2, 3))

        def loss_fn():
            out = lyr.forward(x)
            return float(((out - target) ** 2).sum())

        lyr.forward(x)
        lyr.zero_grads()
        lyr.backward(2.0 * (lyr.forward(x) - target))
        numeric = numeric_gradient(loss_fn, [lyr.W, lyr.b], h=1e-5)
        assert relative_error(lyr.dW, numeric[0]).max() < 1e-6
        assert relative_error(lyr.db, numeric[1]).max() < 1e-6

    def test_accumulation_starts_from_zero(self):
        lyr = make_layer(3, 2, seed=2)
        x = np.random.default_rng(4).standard_normal((2, 3))
        g = np.random.default_rng(5).standard_normal((2, 2))
        lyr.forward(x)
        lyr.backward(g)
        lyr.backward(g)
        two = lyr.dW.copy()
        lyr.zero_grads()
        lyr.backward(g)
        one = lyr.dW.copy()
        np.testing.assert_array_equal(two, 2.0 * one)
        lyr.zero_grads()
        np.testing.assert_array_equal(lyr.dW, np.zeros_like(lyr.dW))
        np.testing.assert_array_equal(lyr.db, np.zeros_like(lyr.db))


class TestRelu:
    def test_all_positive_identity(self):
        relu = Relu()
        x = np.full((2, 3), 2.5)
        np.testing.assert_array_equal(relu.forward(x), x)
        g = np.ones((2, 3))
        np.testing.assert_array_equal(relu.backward(g), g)

    def test_all_negative_zeros(self):
        relu = Relu()
        x = np.full((2, 3), -1.0)
        np.testing.assert_array_equal(relu.forward(x), np.zeros((2, 3)))
        np.testing.assert_array_equal(relu.backward(np.ones((2, 3))), np.zeros((2, 3)))

    def test_mixed_and_gradient_zero_at_zero(self):
        relu = Relu()
        out = relu.forward(np.array([[-1.0, 0.0, 2.0]]))
        np.testing.assert_array_equal(out, [[0.0, 0.0, 2.0]])
        grad = relu.backward(np.array([[1.0, 1.0, 1.0]]))
        np.testing.assert_array_equal(grad, [[0.0, 0.0, 1.0]])

    def test_backward_without_forward(self):
        with pytest.raises(StateError):
            Relu().backward(np.zeros((1, 1)))


class TestDropout:
    def test_p_zero_identity_both_modes(self):
        x = np.random.default_rng(6).standard_normal((3, 4))
        drop = Dropout(0.0)
        np.testing.assert_array_equal(drop.forward(x, init_rng(0)), x)
        drop.mode = "eval"
        np.testing.assert_array_equal(drop.forward(x), x)

    def test_eval_identity_any_p(self):
        x = np.random.default_rng(7).standard_normal((3, 4))
        drop = Dropout(0.7)
        drop.mode = "eval"
        np.testing.assert_array_equal(drop.forward(x), x)

    def test_mask_values_exact(self):
        drop = Dropout(0.25)
        drop.forward(np.ones((50, 50)), init_rng(1))
        assert set(np.unique(drop.mask)) <= {0.0, 1.0 / 0.75}

    @pytest.mark.parametrize("p", [0.2, 0.5])
    def test_expectation_preserved(self, p):
        drop = Dropout(p)
        out = drop.forward(np.ones((1000, 1000)), init_rng(2))
        assert 0.99 <= out.mean() <= 1.01

    def test_backward_reuses_forward_mask_bitwise(self):
        drop = Dropout(0.5)
        drop.forward(np.ones((20, 20)), init_rng(3))
        grad = drop.backward(np.ones((20, 20)))
        assert grad.tobytes() == drop.mask.tobytes()

    def test_p_one_rejected(self):
        with pytest.raises(ConfigError):
            Dropout(1.0)
        with pytest.raises(ConfigError):
            Dropout(-0.1)

    def test_train_mode_needs_rng(self):
        with pytest.raises(StateError):
            Dropout(0.5).forward(np.ones((2, 2)))


class TestNllLoss:
    def test_uniform_logits_is_log_classes(self):
        logits = np.zeros((4, 10))
        loss, _ = nll_loss(logits, np.array([0, 3, 5, 9]))
        assert loss == pytest.approx(np.log(10.0), rel=1e-12)

    def test_stabilized_against_huge_logits(self):
        logits = np.zeros((1, 10))
        logits[0, 2] = 1000.0
        loss, grad = nll_loss(logits, np.array([2]))
        assert loss < 1e-6
        assert np.isfinite(grad).all()

    def test_uniform_gradient_values(self):
        batch = 4
        logits = np.zeros((batch, 10))
        labels = np.array([0, 1, 2, 3])
        _, grad = nll_loss(logits, labels)
        off = 0.1 / batch
        on = (0.1 - 1.0) / batch
        for i, lab in enumerate(labels):
            for j in range(10):
                assert grad[i, j] == pytest.approx(on if j == lab else off, rel=1e-12)

    def test_gradient_rows_sum_to_zero(self):
        rng = np.random.default_rng(8)
        logits = rng.standard_normal((6, 7))
        _, grad = nll_loss(logits, rng.integers(0, 7, size=6))
        np.testing.assert_allclose(grad.sum(axis=1), 0.0, atol=1e-12)

    def test_label_out_of_range(self):
        with pytest.raises(DataError):
            nll_loss(np.zeros((2, 3)), np.array([0, 3]))
        with pytest.raises(DataError):
            nll_loss(np.zeros((2, 3)), np.array([-1, 0]))


class TestInitLayer:
    def test_bound_is_one_at_in_dim_six(self):
        assert np.sqrt(6.0 / 6) == 1.0
        lyr = make_layer(6, 50)
        assert np.abs(lyr.W).max() < 1.0

    def test_same_seed_bitwise_identical(self):
        a = make_layer(10, 10, seed=42)
        b = make_layer(10, 10, seed=42)
        assert a.W.tobytes() == b.W.tobytes()

    def test_bound_and_coverage_at_in_dim_24(self):
        # 24 x 4200 > 1e5 samples; bound sqrt(6/24) = 0.5
        lyr = make_layer(24, 4200, seed=7)
        w = lyr.W
        assert np.abs(w).max() <= 0.5
        assert w.max() > 0.5 * 0.99
        assert w.min() < -0.5 * 0.99

    def test_bias_zero(self):
        np.testing.assert_array_equal(make_layer(5, 3).b, np.zeros(3))

    def test_bad_dims(self):
        with pytest.raises(ConfigError):
            init_layer(0, 3, init_rng(0))
