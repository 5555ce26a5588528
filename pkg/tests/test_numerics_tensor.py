from __future__ import annotations

import math
import unittest

import numpy as np
import scipy.sparse as sp

from teg.numerics import tensor as T
from teg.numerics import tensor_ops
from teg.numerics.params import ParamStore
from teg.numerics.tensor import NonFiniteError, ShapeError, Tensor, backward


def _leaf(value, name):
    return Tensor(np.asarray(value, dtype=np.float64), requires_grad=True, name=name)


class KernelForwardTests(unittest.TestCase):
    def test_kernel_catalog_is_complete(self):
        ops = tensor_ops()
        for name in ("matmul", "concat", "pairwise_sqdist", "log_softmax", "scatter_rows", "sparse_matmul"):
            self.assertTrue(callable(ops[name]))

    def test_matmul_shape_mismatch_names_both_shapes(self):
        with self.assertRaises(ShapeError) as ctx:
            T.matmul(np.ones((2, 3)), np.ones((4, 2)))
        self.assertIn("(2, 3)", str(ctx.exception))
        self.assertIn("(4, 2)", str(ctx.exception))

    def test_pairwise_sqdist_matches_direct_computation(self):
        a = np.array([[0.0, 0.0], [1.0, 2.0]])
        b = np.array([[2.0, 4.0], [0.0, 1.0], [1.0, 2.0]])
        expected = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=-1)
        np.testing.assert_allclose(T.pairwise_sqdist(a, b).data, expected)

    def test_log_softmax_rows_normalise(self):
        out = T.log_softmax(np.array([[1000.0, 0.0, -1000.0], [1.0, 1.0, 1.0]]))
        np.testing.assert_allclose(np.exp(out.data).sum(axis=1), [1.0, 1.0])
        np.testing.assert_allclose(out.data[1], [-math.log(3)] * 3)

    def test_nll_of_uniform_predictions(self):
        log_probs = T.log_softmax(np.zeros((6, 3)))
        self.assertAlmostEqual(T.nll(log_probs, np.array([0, 1, 2, 0, 1, 2])).item(), 6 * math.log(3))

    def test_concat_rejects_mismatched_rows(self):
        with self.assertRaises(ShapeError):
            T.concat([np.ones((2, 3)), np.ones((3, 1))])

    def test_scatter_rows_sums_into_targets(self):
        out = T.scatter_rows(np.array([[1.0], [2.0], [4.0]]), np.array([1, 1, 0]), 3)
        np.testing.assert_array_equal(out.data, [[4.0], [3.0], [0.0]])

    def test_non_finite_output_is_reported_with_the_op(self):
        with self.assertRaisesRegex(NonFiniteError, "scale"):
            T.scale(np.array([1e308]), 10.0)

    def test_dropout_is_identity_in_eval_mode(self):
        x = Tensor(np.ones((4, 4)))
        self.assertIs(T.dropout(x, 0.5, None, train=False), x)

    def test_dropout_keeps_scaled_survivors(self):
        out = T.dropout(np.ones((50, 50)), 0.5, np.random.default_rng(0), train=True)
        self.assertEqual(set(np.unique(out.data).tolist()) - {0.0, 2.0}, set())
        self.assertAlmostEqual(out.data.mean(), 1.0, delta=0.1)

    def test_dropout_in_train_mode_needs_an_rng(self):
        with self.assertRaises(ValueError):
            T.dropout(np.ones(3), 0.5, None, train=True)


class BackwardTests(unittest.TestCase):
    def test_gradient_of_sum_of_squares(self):
        x = _leaf([1.0, -2.0, 3.0], "x")
        grads = backward(T.reduce_sum(T.square(x)))
        np.testing.assert_allclose(grads["x"], [2.0, -4.0, 6.0])

    def test_broadcast_bias_gradient_sums_over_rows(self):
        w = _leaf(np.ones((3, 2)), "w")
        b = _leaf(np.zeros(2), "b")
        x = np.arange(12.0).reshape(4, 3)
        grads = backward(T.reduce_sum(T.linear(x, w, b)))
        np.testing.assert_allclose(grads["b"], [4.0, 4.0])
        np.testing.assert_allclose(grads["w"], np.repeat(x.sum(axis=0)[:, None], 2, axis=1))

    def test_reused_tensor_accumulates_gradient(self):
        x = _leaf([3.0], "x")
        grads = backward(T.reduce_sum(T.mul(x, x) + x))
        np.testing.assert_allclose(grads["x"], [7.0])

    def test_gather_then_scatter_routes_gradients(self):
        x = _leaf(np.arange(6.0).reshape(3, 2), "x")
        picked = T.gather_rows(x, np.array([2, 2, 0]))
        grads = backward(T.reduce_sum(T.scatter_rows(picked, np.array([0, 1, 1]), 2)))
        np.testing.assert_allclose(grads["x"], [[1.0, 1.0], [0.0, 0.0], [2.0, 2.0]])

    def test_sparse_matmul_gradient_uses_the_transpose(self):
        s = sp.csr_matrix(np.array([[0.0, 2.0], [1.0, 0.0], [0.0, 3.0]]))
        x = _leaf(np.ones((2, 1)), "x")
        grads = backward(T.reduce_sum(T.sparse_matmul(s, x)))
        np.testing.assert_allclose(grads["x"], [[1.0], [5.0]])

    def test_non_scalar_loss_is_rejected(self):
        with self.assertRaisesRegex(ValueError, "scalar"):
            backward(_leaf([1.0, 2.0], "x"))

    def test_params_not_reached_get_zero_gradients(self):
        params = ParamStore(seed=0)
        params.create("used", (2, 2))
        params.create("unused", (3,))
        loss = T.reduce_sum(T.matmul(np.ones((1, 2)), params.tensor("used")))
        grads = backward(loss, params)
        self.assertEqual(set(grads), {"used", "unused"})
        np.testing.assert_array_equal(grads["unused"], np.zeros(3))

    def test_constants_record_nothing(self):
        out = T.add(np.ones(2), np.ones(2))
        self.assertFalse(out.requires_grad)
        self.assertEqual(backward(T.reduce_sum(out)), {})


if __name__ == "__main__":
    unittest.main()
