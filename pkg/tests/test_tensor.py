import math

import numpy as np
import pytest

from g2p_complexity.errors import NonFiniteValue, NotScalar, ShapeMismatch, TargetOutOfRange
from g2p_complexity.tensor import (
    Tensor, concat, cross_entropy, dropout, embedding, layer_norm, matmul, precision, relu, reshape, softmax,
    transpose,
)


def numeric_grad(fn, arr: np.ndarray, h: float = 1e-6) -> np.ndarray:
    grad = np.zeros_like(arr)
    it = np.nditer(arr, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = arr[i]
        arr[i] = old + h
        up = float(fn().data)
        arr[i] = old - h
        down = float(fn().data)
        arr[i] = old
        grad[i] = (up - down) / (2 * h)
    return grad


def check_grads(fn, *tensors, tol=1e-6):
    for t in tensors:
        t.zero_grad()
    fn().backward()
    for t in tensors:
        np.testing.assert_allclose(t.grad, numeric_grad(fn, t.data), rtol=tol, atol=tol)


class TestElementwise:
    def test_broadcast_add_mul(self, rng):
        with precision(64):
            a = Tensor(rng.normal(size=(3, 4)), requires_grad=True)
            b = Tensor(rng.normal(size=(4,)), requires_grad=True)
            c = Tensor(rng.normal(size=(3, 1)), requires_grad=True)
            check_grads(lambda: ((a + b) * c).sum(), a, b, c)

    def test_relu_softmax_reshape_transpose(self, rng):
        with precision(64):
            x = Tensor(rng.normal(size=(2, 3, 4)), requires_grad=True)
            w = Tensor(rng.normal(size=(2, 4, 3)), requires_grad=True)

            def fn():
                y = softmax(relu(x) + 0.1 * x, axis=-1)
                y = reshape(transpose(y, (0, 2, 1)), (2, 4, 3))
                return (y * w).sum()
            check_grads(fn, x, w)

    def test_softmax_rows_sum_to_one_and_shift_invariance(self, rng):
        x = rng.normal(scale=5.0, size=(6, 7))
        y = softmax(Tensor(x)).data
        np.testing.assert_allclose(y.sum(axis=-1), 1.0, atol=1e-6)
        with precision(64):
            np.testing.assert_allclose(softmax(Tensor(x + 40.0)).data, softmax(Tensor(x)).data, atol=1e-12)
        np.testing.assert_allclose(softmax(Tensor(np.zeros(2))).data, [0.5, 0.5])

    def test_softmax_matches_direct_evaluation(self):
        z = math.fsum(math.exp(v) for v in (1, 2, 3))
        expected = [math.exp(v) / z for v in (1, 2, 3)]
        with precision(64):
            np.testing.assert_allclose(softmax(Tensor(np.array([1.0, 2.0, 3.0]))).data, expected, rtol=0, atol=1e-9)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            Tensor(np.ones((2, 3))) + Tensor(np.ones((4,)))

    def test_non_finite_detected(self):
        with pytest.raises(NonFiniteValue):
            Tensor(np.array([1e30], dtype=np.float32)) * Tensor(np.array([1e30], dtype=np.float32))


class TestLinearAlgebra:
    def test_matmul_2d_and_batched(self, rng):
        with precision(64):
            a = Tensor(rng.normal(size=(2, 3, 4)), requires_grad=True)
            b = Tensor(rng.normal(size=(4, 5)), requires_grad=True)
            c = Tensor(rng.normal(size=(2, 5, 2)), requires_grad=True)
            check_grads(lambda: matmul(matmul(a, b), c).sum(), a, b, c)

    def test_matmul_inner_dim_mismatch(self):
        with pytest.raises(ShapeMismatch):
            matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((4, 2))))

    def test_layer_norm(self, rng):
        with precision(64):
            x = Tensor(rng.normal(size=(2, 3, 6)), requires_grad=True)
            g = Tensor(rng.normal(size=(6,)), requires_grad=True)
            b = Tensor(rng.normal(size=(6,)), requires_grad=True)
            w = Tensor(rng.normal(size=(2, 3, 6)))
            check_grads(lambda: (layer_norm(x, g, b) * w).sum(), x, g, b)

    def test_layer_norm_output_is_standardized(self, rng):
        x = Tensor(rng.normal(3.0, 2.0, size=(4, 8)))
        y = layer_norm(x, Tensor(np.ones(8)), Tensor(np.zeros(8))).data
        np.testing.assert_allclose(y.mean(axis=-1), 0.0, atol=1e-5)
        np.testing.assert_allclose(y.std(axis=-1), 1.0, atol=1e-3)

    def test_layer_norm_constant_slice_and_zero_gain(self, rng):
        y = layer_norm(Tensor(np.full((1, 3), 5.0)), Tensor(np.ones(3)), Tensor(np.zeros(3))).data
        np.testing.assert_allclose(y, 0.0, atol=1e-6)
        bias = np.array([0.5, -1.0, 2.0, 0.0])
        y = layer_norm(Tensor(rng.normal(size=(3, 4))), Tensor(np.zeros(4)), Tensor(bias)).data
        np.testing.assert_allclose(y, np.broadcast_to(bias, (3, 4)), atol=1e-7)

    def test_layer_norm_unit_variance(self, rng):
        with precision(64):
            x = Tensor(rng.normal(1.0, 3.0, size=(5, 16)))
            y = layer_norm(x, Tensor(np.ones(16)), Tensor(np.zeros(16))).data
        assert np.abs(y.mean(axis=-1)).max() <= 1e-6
        np.testing.assert_allclose(y.var(axis=-1), 1.0, atol=1e-4)

    def test_concat(self, rng):
        with precision(64):
            a = Tensor(rng.normal(size=(2, 3)), requires_grad=True)
            b = Tensor(rng.normal(size=(2, 2)), requires_grad=True)
            w = Tensor(rng.normal(size=(2, 5)))
            check_grads(lambda: (concat([a, b], axis=-1) * w).sum(), a, b)


class TestLookupAndLoss:
    def test_embedding_scatter_adds_repeated_ids(self):
        table = Tensor(np.arange(12.0).reshape(4, 3), requires_grad=True)
        ids = np.array([[1, 1, 3]])
        embedding(table, ids).sum().backward()
        np.testing.assert_array_equal(table.grad[:, 0], [0.0, 2.0, 0.0, 1.0])

    def test_cross_entropy_matches_numeric(self, rng):
        with precision(64):
            logits = Tensor(rng.normal(size=(2, 4, 6)), requires_grad=True)
            targets = np.array([[3, 5, 2, 0], [1, 0, 0, 0]])
            check_grads(lambda: cross_entropy(logits, targets, ignore_id=0), logits)

    def test_cross_entropy_uniform_logits(self):
        logits = Tensor(np.zeros((1, 3, 5)))
        loss = cross_entropy(logits, np.array([[1, 2, 0]]), ignore_id=0)
        assert float(loss.data) == pytest.approx(np.log(5), rel=1e-5)

    def test_cross_entropy_all_ignored(self):
        logits = Tensor(np.zeros((2, 3, 5)), requires_grad=True)
        loss = cross_entropy(logits, np.zeros((2, 3), dtype=int), ignore_id=0)
        assert float(loss.data) == 0.0
        loss.backward()
        np.testing.assert_array_equal(logits.grad, 0.0)

    def test_cross_entropy_target_out_of_range(self):
        with pytest.raises(TargetOutOfRange) as err:
            cross_entropy(Tensor(np.zeros((1, 2, 5))), np.array([[1, 7]]))
        assert err.value.position == (0, 1)

    def test_dropout_eval_is_identity_and_train_rescales(self, rng):
        x = Tensor(np.ones((200, 50)))
        assert dropout(x, 0.1, rng, training=False) is x
        y = dropout(x, 0.5, rng, training=True).data
        assert set(np.unique(y)) <= {0.0, 2.0}
        assert 0.45 < (y == 0).mean() < 0.55


class TestBackward:
    def test_requires_scalar(self):
        x = Tensor(np.ones(3), requires_grad=True)
        with pytest.raises(NotScalar):
            (x * 2.0).backward()

    def test_leaves_accumulate_across_calls(self):
        x = Tensor(np.array([1.0, 2.0]), requires_grad=True)
        (x * x).sum().backward()
        (x * x).sum().backward()
        np.testing.assert_allclose(x.grad, [4.0, 8.0])
        x.zero_grad()
        np.testing.assert_array_equal(x.grad, [0.0, 0.0])

    def test_shared_subexpression(self):
        x = Tensor(np.array(3.0), requires_grad=True)
        y = x * x
        (y + y * x).backward()  # x^2 + x^3
        assert float(x.grad) == pytest.approx(2 * 3 + 3 * 9)

    def test_disconnected_parameter_has_zero_grad(self):
        x = Tensor(np.array([1.0, 2.0]), requires_grad=True)
        p = Tensor(np.ones((2, 3)), requires_grad=True)
        (x * 2.0).sum().backward()
        np.testing.assert_array_equal(p.grad, np.zeros((2, 3)))
        np.testing.assert_allclose(x.grad, [2.0, 2.0])

    def test_constants_get_no_grad(self):
        x = Tensor(np.ones(2), requires_grad=True)
        c = Tensor(np.ones(2))
        (x * c).sum().backward()
        assert c.grad is None
