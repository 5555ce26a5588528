from __future__ import annotations

import unittest

import numpy as np

from teg.embedder.egnn import EgnnConfig, egnn_layer, egnn_message, embed_task, init_egnn_params
from teg.embedder.task_graph import COMPLETE, build_task_graph, task_graph_for_sizes
from teg.numerics.params import ParamStore
from teg.numerics.tensor import NonFiniteError, Tensor
from tests.fixtures import manual_task, random_orthogonal

D_L, D_S = 16, 4


def _params(seed: int = 0, layers: int = 2) -> ParamStore:
    params = ParamStore(seed=seed)
    init_egnn_params(params, EgnnConfig(layers=layers), D_S)
    return params


def _inputs(rng: np.random.Generator, rows: int) -> tuple[np.ndarray, np.ndarray]:
    return 0.5 * rng.standard_normal((rows, D_L)), rng.uniform(0.0, 1.0, (rows, D_S))


class EgnnShapeTests(unittest.TestCase):
    def test_parameter_shapes_follow_the_architecture(self):
        params = _params(layers=1)
        shapes = {name: params[name].shape for name in params.names()}
        self.assertEqual(shapes["egnn.0.phi_m.0.weight"], (2 * D_S + 1, 64))
        self.assertEqual(shapes["egnn.0.phi_m.1.weight"], (64, 64))
        self.assertEqual(shapes["egnn.0.phi_l.2.weight"], (64, 1))
        self.assertEqual(shapes["egnn.0.phi_s.0.weight"], (D_S + 64, 64))
        self.assertEqual(shapes["egnn.0.phi_s.1.weight"], (64, D_S))
        self.assertEqual(len(shapes), 14)

    def test_embedding_keeps_row_count_and_widths(self):
        task = manual_task(3, 2, 2)
        coords, props = _inputs(np.random.default_rng(0), task.num_nodes)
        out = embed_task(task, coords, props, _params(), build_task_graph(task), EgnnConfig())
        self.assertEqual(out.coords.shape, (12, D_L))
        self.assertEqual(out.props.shape, (12, D_S))


class EgnnMessageTests(unittest.TestCase):
    def test_message_is_invariant_to_rigid_motion(self):
        rng = np.random.default_rng(1)
        params = _params()
        h = rng.standard_normal((2, D_L))
        s = rng.uniform(size=(2, D_S))
        q = random_orthogonal(D_L, rng)
        moved = h @ q + 3.5
        before = egnn_message(s[0], s[1], float(((h[0] - h[1]) ** 2).sum()), params)
        after = egnn_message(s[0], s[1], float(((moved[0] - moved[1]) ** 2).sum()), params)
        np.testing.assert_allclose(after.data, before.data, rtol=1e-10, atol=1e-12)
        self.assertEqual(before.shape, (64,))

    def test_equal_properties_give_symmetric_messages(self):
        params = _params()
        s = np.full(D_S, 0.25)
        np.testing.assert_array_equal(egnn_message(s, s, 2.0, params).data, egnn_message(s, s, 2.0, params).data)

    def test_zeroed_message_network_gives_zero_message(self):
        params = _params()
        for name in params.names():
            if ".phi_m." in name:
                params.set(name, np.zeros(params[name].shape))
        np.testing.assert_array_equal(egnn_message(np.ones(D_S), np.zeros(D_S), 4.0, params).data, np.zeros(64))

    def test_width_mismatch_is_reported(self):
        with self.assertRaisesRegex(ValueError, "dimension mismatch"):
            egnn_message(np.ones(D_S + 1), np.ones(D_S + 1), 1.0, _params())

    def test_negative_distance_is_rejected(self):
        with self.assertRaises(ValueError):
            egnn_message(np.ones(D_S), np.ones(D_S), -1.0, _params())


class EgnnLayerTests(unittest.TestCase):
    def setUp(self):
        self.task = manual_task(2, 2, 2)
        self.tg = build_task_graph(self.task, COMPLETE)
        self.rng = np.random.default_rng(3)

    def test_coincident_coordinates_stay_put(self):
        coords = np.tile(self.rng.standard_normal(D_L), (self.task.num_nodes, 1))
        _, props = _inputs(self.rng, self.task.num_nodes)
        new_coords, new_props = egnn_layer(Tensor(coords), Tensor(props), self.tg, _params(), 0)
        np.testing.assert_array_equal(new_coords.data, coords)
        self.assertFalse(np.array_equal(new_props.data, props))

    def test_zero_coordinate_weights_freeze_coordinates_only(self):
        params = _params()
        params.set("egnn.0.phi_l.2.weight", np.zeros((64, 1)))
        params.set("egnn.0.phi_l.2.bias", np.zeros(1))
        coords, props = _inputs(self.rng, self.task.num_nodes)
        new_coords, new_props = egnn_layer(Tensor(coords), Tensor(props), self.tg, params, 0)
        np.testing.assert_array_equal(new_coords.data, coords)
        self.assertFalse(np.array_equal(new_props.data, props))

    def test_two_layers_equal_manual_composition(self):
        params = _params()
        coords, props = _inputs(self.rng, self.task.num_nodes)
        c1, s1 = egnn_layer(Tensor(coords), Tensor(props), self.tg, params, 0)
        c2, s2 = egnn_layer(c1, s1, self.tg, params, 1)
        out = embed_task(self.task, coords, props, params, self.tg, EgnnConfig(layers=2))
        np.testing.assert_array_equal(out.coords.data, c2.data)
        np.testing.assert_array_equal(out.props.data, s2.data)

    def test_zero_layers_is_the_identity(self):
        coords, props = _inputs(self.rng, self.task.num_nodes)
        out = embed_task(self.task, coords, props, _params(), self.tg, EgnnConfig(layers=0))
        np.testing.assert_array_equal(out.coords.data, coords)
        np.testing.assert_array_equal(out.props.data, props)

    def test_duplicated_node_gets_identical_embeddings(self):
        coords, props = _inputs(self.rng, self.task.num_nodes)
        coords[5], props[5] = coords[1], props[1]
        out = embed_task(self.task, coords, props, _params(), self.tg)
        np.testing.assert_allclose(out.coords.data[5], out.coords.data[1], rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(out.props.data[5], out.props.data[1], rtol=1e-12, atol=1e-12)

    def test_permuting_task_nodes_permutes_outputs(self):
        tg = task_graph_for_sizes(6, 4, COMPLETE)
        task = manual_task(2, 3, 2)
        coords, props = _inputs(self.rng, 10)
        perm = self.rng.permutation(10)
        base = embed_task(task, coords, props, _params(), tg)
        permuted = embed_task(task, coords[perm], props[perm], _params(), tg)
        np.testing.assert_allclose(permuted.coords.data, base.coords.data[perm], rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(permuted.props.data, base.props.data[perm], rtol=1e-10, atol=1e-12)

    def test_exploding_coordinates_raise(self):
        coords, props = _inputs(self.rng, self.task.num_nodes)
        with self.assertRaises(NonFiniteError):
            egnn_layer(Tensor(coords * 1e200), Tensor(props), self.tg, _params(), 0)

    def test_row_count_must_match_the_task(self):
        coords, props = _inputs(self.rng, self.task.num_nodes + 1)
        with self.assertRaises(ValueError):
            embed_task(self.task, coords, props, _params(), self.tg)


class EquivarianceSuiteTests(unittest.TestCase):
    """Random episodes and random rigid motions: Z(hQ + g) == Z(h)Q + g."""

    def test_coordinates_are_equivariant_and_properties_invariant(self):
        rng = np.random.default_rng(2023)
        stores = [_params(seed) for seed in range(4)]
        shapes = [(2, 1, 1), (2, 3, 2), (3, 1, 2), (3, 2, 3), (4, 1, 1), (5, 1, 2)]
        worst_coords = worst_props = worst_dist = 0.0
        for episode in range(100):
            task = manual_task(*shapes[episode % len(shapes)])
            tg = build_task_graph(task, COMPLETE)
            params = stores[episode % len(stores)]
            coords, props = _inputs(rng, task.num_nodes)
            reference = embed_task(task, coords, props, params, tg)
            z, s = reference.coords.data, reference.props.data
            ref_dist = ((z[:, None, :] - z[None, :, :]) ** 2).sum(-1)
            for _ in range(10):
                q = random_orthogonal(D_L, rng)
                lam = rng.uniform(-5.0, 5.0)
                moved = embed_task(task, coords @ q + lam, props, params, tg)
                expected = z @ q + lam
                worst_coords = max(worst_coords, np.abs(moved.coords.data - expected).max() / np.abs(expected).max())
                worst_props = max(worst_props, np.abs(moved.props.data - s).max())
                zm = moved.coords.data
                dist = ((zm[:, None, :] - zm[None, :, :]) ** 2).sum(-1)
                worst_dist = max(worst_dist, np.abs(dist - ref_dist).max() / ref_dist.max())

        self.assertLessEqual(worst_coords, 1e-5)
        self.assertLessEqual(worst_props, 1e-8)
        self.assertLessEqual(worst_dist, 1e-6)

    def test_bipartite_mode_is_equivariant_too(self):
        rng = np.random.default_rng(7)
        task = manual_task(3, 2, 2)
        tg = build_task_graph(task, "bipartite")
        coords, props = _inputs(rng, task.num_nodes)
        params = _params(1)
        q = random_orthogonal(D_L, rng)
        z = embed_task(task, coords, props, params, tg).coords.data
        moved = embed_task(task, coords @ q - 2.0, props, params, tg).coords.data
        np.testing.assert_allclose(moved, z @ q - 2.0, rtol=0, atol=1e-9 * np.abs(z).max() + 1e-9)


if __name__ == "__main__":
    unittest.main()
