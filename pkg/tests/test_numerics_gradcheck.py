from __future__ import annotations

import unittest

import numpy as np

from teg.harness.model import toy_gradient_problem
from teg.numerics import tensor as T
from teg.numerics.gradcheck import grad_check, relative_error
from teg.numerics.params import ParamStore
from teg.numerics.tensor import Tensor


class RelativeErrorTests(unittest.TestCase):
    def test_floor_keeps_tiny_gradients_from_dominating(self):
        self.assertEqual(relative_error(0.0, 0.0), 0.0)
        self.assertAlmostEqual(relative_error(1e-9, 2e-9), 1e-9 / 1e-5)
        self.assertAlmostEqual(relative_error(1.0, 3.0), 0.5)


class GradCheckTests(unittest.TestCase):
    def test_small_mlp_loss_passes(self):
        params = ParamStore(seed=0)
        params.create("w1", (4, 6))
        params.create("w2", (6, 3))
        x = np.random.default_rng(0).standard_normal((5, 4))
        targets = np.array([0, 1, 2, 1, 0])

        def loss_fn():
            h = T.silu(T.matmul(x, params.tensor("w1")))
            return T.nll(T.log_softmax(T.matmul(h, params.tensor("w2"))), targets)

        self.assertLessEqual(grad_check(loss_fn, params, sample=30), 1e-4)

    def test_wrong_backward_is_caught(self):
        params = ParamStore(seed=0)
        params.create("w", (3,))

        def loss_fn():
            w = params.tensor("w")
            # d/dw sum(w^2) is 2w; this reports w
            return Tensor(
                np.asarray((w.data ** 2).sum()),
                requires_grad=True,
                op="broken",
                _parents=(w,),
                _backward=lambda g: (g * w.data,),
            )

        self.assertGreater(grad_check(loss_fn, params, sample=3), 0.3)

    def test_parameters_are_restored_after_probing(self):
        params = ParamStore(seed=0)
        params.create("w", (3, 3))
        before = params.checksum()
        grad_check(lambda: T.reduce_sum(T.square(params.tensor("w"))), params, sample=9)
        self.assertEqual(params.checksum(), before)

    def test_full_episode_loss_matches_central_differences(self):
        loss_fn, params = toy_gradient_problem(seed=0)
        self.assertLessEqual(grad_check(loss_fn, params, h=1e-5, sample=60, seed=1), 1e-4)

class KernelGradientTests(unittest.TestCase):
    def test_each_kernel_matches_central_differences(self):
        x = np.random.default_rng(1).standard_normal((5, 4))
        ones = Tensor(np.ones((5, 3)))
        losses = {
            "relu": lambda xw: T.reduce_sum(T.square(T.relu(xw))),
            "silu": lambda xw: T.reduce_sum(T.silu(xw)),
            "row_sum": lambda xw: T.reduce_sum(T.square(T.row_sum(xw))),
            "row_mean": lambda xw: T.reduce_sum(T.square(T.row_mean(xw))),
            "mul_sub": lambda xw: T.reduce_sum(T.mul(T.sub(xw, ones), xw)),
            "add_scale": lambda xw: T.reduce_sum(T.square(T.scale(T.add(xw, ones), -0.5))),
            "concat": lambda xw: T.reduce_sum(T.square(T.concat([xw, T.scale(xw, 2.0)]))),
            "pairwise_sqdist": lambda xw: T.reduce_sum(T.pairwise_sqdist(xw, T.gather_rows(xw, np.array([0, 3])))),
            "scatter_rows": lambda xw: T.reduce_sum(T.square(T.scatter_rows(xw, np.array([0, 1, 0, 2, 1]), 3))),
        }
        for name, head in losses.items():
            with self.subTest(kernel=name):
                params = ParamStore(seed=2)
                params.create("w", (4, 3))
                loss_fn = lambda: head(T.matmul(x, params.tensor("w")))  # noqa: E731
                self.assertLessEqual(grad_check(loss_fn, params, sample=12), 1e-5)


if __name__ == "__main__":
    unittest.main()
