from __future__ import annotations

import unittest

import networkx as nx
import numpy as np

from teg.graph.model import Graph
from teg.graph.synthetic import generate_components
from teg.structural.anchors import (
    AnchorSet,
    anchor_degrees,
    attach_anchors,
    augmented_adjacency,
    bfs_distances,
    build_structural_features,
    graph_anchor_features,
    zero_ratio,
)
from tests.fixtures import labeled_graph


def _random_graph(n: int, p: float, seed: int) -> Graph:
    g = nx.gnp_random_graph(n, p, seed=seed)
    edges = np.array(list(g.edges()), dtype=np.int64).reshape(-1, 2)
    return Graph(num_nodes=n, edges=edges, features=np.zeros((n, 1)), labels=np.zeros(n, dtype=np.int64))


class AttachAnchorsTests(unittest.TestCase):
    def test_same_seed_gives_the_same_anchors(self):
        graph = labeled_graph([50, 50])
        self.assertEqual(attach_anchors(graph, 6, seed=1), attach_anchors(graph, 6, seed=1))
        self.assertNotEqual(attach_anchors(graph, 6, seed=1), attach_anchors(graph, 6, seed=2))

    def test_anchor_degrees_halve_with_each_anchor(self):
        graph = labeled_graph([4000])
        degrees = anchor_degrees(attach_anchors(graph, 4, seed=0))
        for i, degree in enumerate(degrees, start=1):
            expected = 4000 * 2.0 ** -i
            sigma = np.sqrt(4000 * 2.0 ** -i * (1 - 2.0 ** -i))
            self.assertLess(abs(degree - expected), 4 * sigma, f"anchor {i}")

    def test_zero_anchors_gives_an_empty_feature_matrix(self):
        graph = labeled_graph([5])
        features = build_structural_features(graph, attach_anchors(graph, 0, seed=0))
        self.assertEqual(features.matrix.shape, (5, 0))
        with self.assertRaisesRegex(ValueError, "no anchors"):
            zero_ratio(features)


class ShortestPathTests(unittest.TestCase):
    def test_inverse_distance_and_zero_for_unreachable(self):
        # path 0-1-2, isolated node 3, one anchor linked to node 0 only
        graph = labeled_graph([4], edges=[[0, 1], [1, 2]])
        anchors = AnchorSet(num_nodes=4, adjacency=np.array([[True, False, False, False]]), seed=0)
        np.testing.assert_array_equal(bfs_distances(graph, anchors, 0), [1.0, 2.0, 3.0, np.inf])
        features = build_structural_features(graph, anchors)
        np.testing.assert_allclose(features.matrix[:, 0], [1 / 2, 1 / 3, 1 / 4, 0.0])
        self.assertAlmostEqual(zero_ratio(features), 0.25)

    def test_anchor_index_out_of_range(self):
        graph = labeled_graph([3])
        with self.assertRaises(IndexError):
            bfs_distances(graph, attach_anchors(graph, 2, seed=0), 2)

    def test_bfs_matches_floyd_warshall_on_random_augmented_graphs(self):
        rng = np.random.default_rng(2024)
        for trial in range(50):
            n = int(rng.integers(2, 185))
            graph = _random_graph(n, float(rng.uniform(0.0, 0.08)), seed=trial)
            anchors = attach_anchors(graph, int(rng.integers(1, 16)), seed=trial)
            adjacency = augmented_adjacency(graph, anchors)
            oracle = nx.floyd_warshall_numpy(nx.from_scipy_sparse_array(adjacency))
            for i in range(anchors.k):
                np.testing.assert_array_equal(
                    bfs_distances(graph, anchors, i, adjacency),
                    oracle[n + i, :n],
                    err_msg=f"trial {trial} anchor {i}",
                )

    def test_in_graph_anchor_features_use_the_original_graph(self):
        graph = labeled_graph([4], edges=[[0, 1], [1, 2]])
        features = graph_anchor_features(graph, 4, seed=0)
        self.assertEqual(features.kind, "in-graph")
        # every node is an anchor: the isolated node reaches only itself
        self.assertEqual(np.count_nonzero(features.matrix == 0.0), 6)


class ZeroRatioTests(unittest.TestCase):
    def test_virtual_anchors_reach_across_components(self):
        virtual, connected, in_graph = [], [], []
        for seed in range(5):
            graph = generate_components(10, 100, p=0.05, feature_dim=2, seed=seed)
            anchors = attach_anchors(graph, 16, seed=seed)
            features = build_structural_features(graph, anchors)
            virtual.append(zero_ratio(features))
            connected.append(zero_ratio(features, np.flatnonzero(anchor_degrees(anchors))))
            in_graph.append(zero_ratio(graph_anchor_features(graph, 16, seed=seed)))

        self.assertLessEqual(np.mean(connected), 0.05)
        self.assertGreaterEqual(np.mean(in_graph), 0.50)
        self.assertLess(np.mean(virtual), 0.5 * np.mean(in_graph))


if __name__ == "__main__":
    unittest.main()
