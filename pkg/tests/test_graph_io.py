from __future__ import annotations

import tempfile
import unittest
from pathlib import Path

import numpy as np

from teg.graph.io import GraphFormatError, load_graph, save_graph
from teg.graph.model import Graph
from teg.graph.synthetic import SbmConfig, generate_sbm


class LoadGraphTests(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self._tmp.cleanup)
        self.dir = Path(self._tmp.name)

    def _write(self, text: str) -> Path:
        path = self.dir / "graph.txt"
        path.write_text(text, encoding="utf-8")
        return path

    def test_reads_nodes_features_labels_and_edges(self):
        path = self._write(
            "nodes=3 features=2 classes=2\n"
            "0 0.5 1.0\n"
            "1 -1.0 2.5\n"
            "1 0.0 0.0\n"
            "edges=2\n"
            "0 1\n"
            "2 1\n"
        )
        graph = load_graph(path)

        self.assertEqual(graph.num_nodes, 3)
        self.assertEqual(graph.num_edges, 2)
        np.testing.assert_array_equal(graph.edges, [[0, 1], [1, 2]])
        np.testing.assert_array_equal(graph.labels, [0, 1, 1])
        np.testing.assert_array_equal(graph.features[1], [-1.0, 2.5])
        np.testing.assert_array_equal(graph.degrees(), [1, 2, 1])

    def test_reversed_and_repeated_edge_lines_collapse(self):
        path = self._write("nodes=2 features=1 classes=1\n0 1.0\n0 2.0\nedges=3\n0 1\n1 0\n0 1\n")
        self.assertEqual(load_graph(path).num_edges, 1)

    def test_dimension_mismatch_names_the_line(self):
        path = self._write("nodes=2 features=2 classes=1\n0 1.0 2.0\n0 1.0\nedges=0\n")
        with self.assertRaises(GraphFormatError) as ctx:
            load_graph(path)
        self.assertTrue(str(ctx.exception).startswith("line 3:"))
        self.assertIn("dimension mismatch", str(ctx.exception))
        self.assertEqual(ctx.exception.line_no, 3)

    def test_endpoint_out_of_range_is_rejected(self):
        path = self._write("nodes=2 features=1 classes=1\n0 1.0\n0 2.0\nedges=1\n0 5\n")
        with self.assertRaisesRegex(GraphFormatError, r"line 5: endpoint out of range"):
            load_graph(path)

    def test_label_out_of_range_is_rejected(self):
        path = self._write("nodes=1 features=1 classes=2\n2 1.0\nedges=0\n")
        with self.assertRaisesRegex(GraphFormatError, "label out of range"):
            load_graph(path)

    def test_self_loop_is_rejected(self):
        path = self._write("nodes=2 features=1 classes=1\n0 1.0\n0 2.0\nedges=1\n1 1\n")
        with self.assertRaisesRegex(GraphFormatError, "self-loop"):
            load_graph(path)

    def test_non_finite_feature_is_rejected(self):
        path = self._write("nodes=1 features=1 classes=1\n0 nan\nedges=0\n")
        with self.assertRaisesRegex(GraphFormatError, "non-finite"):
            load_graph(path)

    def test_edge_count_mismatch_is_rejected(self):
        path = self._write("nodes=2 features=1 classes=1\n0 1.0\n0 2.0\nedges=2\n0 1\n")
        with self.assertRaisesRegex(GraphFormatError, "edge count mismatch"):
            load_graph(path)

    def test_unused_class_ids_are_densified_and_kept_as_names(self):
        path = self._write("nodes=3 features=1 classes=5\n0 1.0\n3 2.0\n3 3.0\nedges=0\n")
        graph = load_graph(path)
        np.testing.assert_array_equal(graph.labels, [0, 1, 1])
        self.assertEqual(graph.class_names, ("0", "3"))
        self.assertEqual(graph.num_classes, 2)


class SaveGraphTests(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self._tmp.cleanup)
        self.path = Path(self._tmp.name) / "graph.txt"

    def test_saved_synthetic_graph_loads_back_identical(self):
        graph = generate_sbm(SbmConfig(num_classes=4, nodes_per_class=15, feature_dim=6, seed=3))
        save_graph(graph, self.path)
        self.assertEqual(load_graph(self.path), graph)

    def test_class_names_survive_a_second_save(self):
        graph = Graph(
            num_nodes=3,
            edges=np.array([[0, 2]]),
            features=np.array([[0.1], [0.2], [1 / 3]]),
            labels=np.array([0, 1, 1]),
            class_names=("0", "3"),
        )
        save_graph(graph, self.path)
        loaded = load_graph(self.path)
        self.assertEqual(loaded, graph)
        self.assertTrue(self.path.read_text(encoding="utf-8").startswith("nodes=3 features=1 classes=4\n"))

    def test_random_graphs_load_back_identical(self):
        rng = np.random.default_rng(11)
        for trial in range(40):
            n = int(rng.integers(0, 12))
            n_features = int(rng.integers(0, 4))
            id_range = int(rng.integers(1, 8))
            labels = rng.integers(0, id_range, size=n)
            pairs = rng.integers(0, max(n, 1), size=(int(rng.integers(0, 20)), 2))
            pairs = pairs[pairs[:, 0] != pairs[:, 1]] if n > 1 else np.zeros((0, 2), dtype=np.int64)
            features = rng.standard_normal((n, n_features)) * 10.0 ** rng.integers(-8, 8)
            with self.subTest(trial=trial):
                graph = Graph(num_nodes=n, edges=pairs, features=features, labels=labels)
                save_graph(graph, self.path)
                self.assertEqual(load_graph(self.path), graph)

    def test_unused_class_id_survives_the_round_trip(self):
        graph = Graph(num_nodes=3, edges=np.zeros((0, 2)), features=np.zeros((3, 1)), labels=np.array([1, 1, 2]))
        save_graph(graph, self.path)
        loaded = load_graph(self.path)
        self.assertEqual(loaded, graph)
        self.assertEqual(loaded.class_names, ("1", "2"))


class GraphClassNameTests(unittest.TestCase):
    def _graph(self, labels, class_names=()):
        labels = np.asarray(labels)
        return Graph(
            num_nodes=labels.size,
            edges=np.zeros((0, 2)),
            features=np.zeros((labels.size, 1)),
            labels=labels,
            class_names=class_names,
        )

    def test_unused_ids_are_dropped_and_names_keep_the_original_id(self):
        graph = self._graph([1, 1, 2])
        np.testing.assert_array_equal(graph.labels, [0, 0, 1])
        self.assertEqual(graph.class_names, ("1", "2"))

    def test_given_names_follow_the_used_classes(self):
        graph = self._graph([0, 2, 2], class_names=("0", "4", "7"))
        np.testing.assert_array_equal(graph.labels, [0, 1, 1])
        self.assertEqual(graph.class_names, ("0", "7"))

    def test_non_numeric_names_are_rejected(self):
        with self.assertRaisesRegex(ValueError, "not a non-negative integer id"):
            self._graph([0, 1], class_names=("cs", "math"))

    def test_padded_names_are_rejected(self):
        with self.assertRaisesRegex(ValueError, "not a non-negative integer id"):
            self._graph([0, 1], class_names=("0", "01"))

    def test_names_out_of_order_are_rejected(self):
        with self.assertRaisesRegex(ValueError, "strictly increasing"):
            self._graph([0, 1], class_names=("3", "1"))

    def test_empty_graph_has_no_classes(self):
        self.assertEqual(self._graph([]).num_classes, 0)


if __name__ == "__main__":
    unittest.main()
