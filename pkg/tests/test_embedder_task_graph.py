from __future__ import annotations

import unittest

import numpy as np

from teg.embedder.task_graph import BIPARTITE, COMPLETE, build_task_graph, task_graph_for_sizes
from tests.fixtures import manual_task


class TaskGraphTests(unittest.TestCase):
    def test_complete_two_way_one_shot_is_k4(self):
        tg = build_task_graph(manual_task(2, 1, 1), COMPLETE)
        self.assertEqual(tg.num_nodes, 4)
        self.assertEqual(tg.num_edges, 12)
        for i in range(4):
            self.assertEqual(tg.neighbors(i), set(range(4)) - {i})

    def test_bipartite_queries_only_see_support(self):
        tg = build_task_graph(manual_task(2, 1, 1), BIPARTITE)
        self.assertEqual(tg.neighbors(2), {0, 1})
        self.assertEqual(tg.neighbors(3), {0, 1})
        self.assertEqual(tg.neighbors(0), {1, 2, 3})

    def test_five_way_five_shot_five_query_counts(self):
        tg = build_task_graph(manual_task(5, 5, 5), COMPLETE)
        self.assertEqual(tg.num_nodes, 50)
        self.assertEqual(len(tg.neighbors(17)), 49)
        self.assertEqual(tg.normalizer, 49)

    def test_no_self_edges_in_either_mode(self):
        for mode in (COMPLETE, BIPARTITE):
            tg = task_graph_for_sizes(6, 4, mode)
            self.assertFalse(np.any(tg.receivers == tg.senders))

    def test_normalizer_ignores_the_mode(self):
        self.assertEqual(task_graph_for_sizes(4, 6, BIPARTITE).normalizer, 9)

    def test_singleton_task_is_rejected(self):
        with self.assertRaisesRegex(ValueError, "at least 2 nodes"):
            task_graph_for_sizes(1, 0)

    def test_unknown_mode_is_rejected(self):
        with self.assertRaisesRegex(ValueError, "unknown task-graph mode"):
            task_graph_for_sizes(2, 2, "star")


if __name__ == "__main__":
    unittest.main()
