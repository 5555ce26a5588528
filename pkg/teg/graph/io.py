"""
Text graph format.

    nodes=<n> features=<F> classes=<C>
    <label> <f_1> ... <f_F>        (n lines)
    edges=<m>
    <u> <v>                        (m lines)

Labels are integer class ids in [0, C). Ids that no node uses are dropped
and the rest densified to [0, C'); the original id is kept as the class name.
Duplicate and reversed edge lines collapse into one undirected edge.
"""
from __future__ import annotations

import logging
import re
from pathlib import Path

import numpy as np

from teg.graph.model import Graph

logger = logging.getLogger(__name__)

_HEADER_RE = re.compile(r"^nodes=(\d+)\s+features=(\d+)\s+classes=(\d+)$")
_EDGES_RE = re.compile(r"^edges=(\d+)$")


class GraphFormatError(ValueError):
    """Malformed graph file; the message starts with the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _parse_int(token: str, line_no: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise GraphFormatError(line_no, f"{what} is not an integer: {token!r}") from None


def load_graph(path: str | Path) -> Graph:
    """Read and validate a graph file."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    # Ignore trailing blank lines only; blank lines in the body are errors
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise GraphFormatError(1, "empty file")

    header = _HEADER_RE.match(lines[0].strip())
    if not header:
        raise GraphFormatError(1, "expected header 'nodes=<n> features=<F> classes=<C>'")
    n, n_features, n_classes = (int(g) for g in header.groups())

    if len(lines) < n + 2:
        raise GraphFormatError(len(lines), f"expected {n} node lines followed by 'edges=<m>'")

    features = np.zeros((n, n_features), dtype=np.float64)
    raw_labels = np.zeros(n, dtype=np.int64)
    for i in range(n):
        line_no = i + 2
        tokens = lines[i + 1].split()
        if len(tokens) != n_features + 1:
            raise GraphFormatError(
                line_no, f"dimension mismatch: expected 1 label + {n_features} features, got {len(tokens)} fields"
            )
        label = _parse_int(tokens[0], line_no, "label")
        if not 0 <= label < n_classes:
            raise GraphFormatError(line_no, f"label out of range: {label} not in [0, {n_classes})")
        raw_labels[i] = label
        try:
            features[i] = [float(t) for t in tokens[1:]]
        except ValueError as e:
            raise GraphFormatError(line_no, f"bad feature value: {e}") from None
        if not np.isfinite(features[i]).all():
            raise GraphFormatError(line_no, "non-finite feature value")

    edge_line_no = n + 2
    edges_header = _EDGES_RE.match(lines[n + 1].strip())
    if not edges_header:
        raise GraphFormatError(edge_line_no, "expected 'edges=<m>'")
    m = int(edges_header.group(1))
    if len(lines) != n + 2 + m:
        raise GraphFormatError(
            len(lines), f"edge count mismatch: header says {m}, file has {len(lines) - n - 2} edge lines"
        )

    pairs = np.zeros((m, 2), dtype=np.int64)
    for j in range(m):
        line_no = edge_line_no + j + 1
        tokens = lines[n + 2 + j].split()
        if len(tokens) != 2:
            raise GraphFormatError(line_no, f"edge line needs 2 node ids, got {len(tokens)}")
        u = _parse_int(tokens[0], line_no, "endpoint")
        v = _parse_int(tokens[1], line_no, "endpoint")
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(line_no, f"endpoint out of range: {u} {v} with nodes={n}")
        if u == v:
            raise GraphFormatError(line_no, f"self-loop on node {u}")
        pairs[j] = (u, v)

    graph = Graph(
        num_nodes=n,
        edges=pairs,
        features=features,
        labels=raw_labels,
        class_names=tuple(str(c) for c in range(n_classes)),
    )
    if graph.num_edges != m:
        logger.info("load_graph %s: merged %d duplicate edge lines", path, m - graph.num_edges)
    return graph


def save_graph(graph: Graph, path: str | Path) -> None:
    """Write a graph so that load_graph(path) == graph.

    Graph keeps its class names as increasing original ids, so each node is
    written with its original id and the header counts up to the largest.
    """
    names = graph.class_names
    tokens = [names[c] for c in graph.labels]
    n_classes = int(names[-1]) + 1 if names else 0
    out = [f"nodes={graph.num_nodes} features={graph.num_features} classes={n_classes}"]
    for i in range(graph.num_nodes):
        row = " ".join(repr(float(x)) for x in graph.features[i])
        out.append(f"{tokens[i]} {row}" if row else tokens[i])
    out.append(f"edges={graph.num_edges}")
    out.extend(f"{int(u)} {int(v)}" for u, v in graph.edges)
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")
