"""Finite weighted graphs with a measure, a root and an optional boundary.

Vertices are dense integers ``0..n-1``.  Real-valued functions on the
vertex set are plain float arrays of length ``n``; :func:`vertex_function`
validates them against a graph.

An infinite graph is represented by an exact ball ``B_R(o)`` whose outer
sphere is marked as ``boundary``.  Operators are only ever evaluated at
interior vertices, where the full neighbourhood is stored.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DisconnectedGraph,
    DuplicateEdge,
    MisalignedFunction,
    NonpositiveMeasure,
    NonpositiveWeight,
    ParseError,
    RadiusExceedsGraph,
    SelfLoop,
)

__all__ = [
    "WeightedGraph",
    "BoundaryDecomposition",
    "build_graph",
    "ball_decomposition",
    "vertex_function",
    "read_graph",
    "write_graph",
    "graph_to_dict",
    "graph_from_dict",
]


class WeightedGraph:
    """Immutable symmetric weighted graph ``(b, m)`` rooted at ``root``.

    Use :func:`build_graph` rather than calling the constructor directly.

    Attributes
    ----------
    n : int
        Number of vertices.
    measure : ndarray
        Vertex measure ``m(x) > 0``.
    root : int
        The distinguished vertex ``o``.
    depth : ndarray of int
        Combinatorial distance ``|x|`` to the root.
    edge_x, edge_y, edge_b : ndarray
        Edge list, one row per unordered pair with ``edge_x < edge_y``,
        sorted lexicographically.
    degree : ndarray
        Weighted degree ``sum_y b(x, y)``.
    boundary : frozenset of int
        Vertices where operators are not evaluated.
    """

    def __init__(self, measure, edge_x, edge_y, edge_b, root, depth, boundary,
                 labels):
        self.n = len(measure)
        self.measure = _frozen(np.asarray(measure, dtype=float))
        self.edge_x = _frozen(np.asarray(edge_x, dtype=np.int64))
        self.edge_y = _frozen(np.asarray(edge_y, dtype=np.int64))
        self.edge_b = _frozen(np.asarray(edge_b, dtype=float))
        self.root = int(root)
        self.depth = _frozen(np.asarray(depth, dtype=np.int64))
        self.boundary = frozenset(int(v) for v in boundary)
        self.labels = tuple(labels)

        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        wts: list[list[float]] = [[] for _ in range(self.n)]
        for x, y, b in zip(self.edge_x.tolist(), self.edge_y.tolist(),
                           self.edge_b.tolist()):
            nbrs[x].append(y)
            wts[x].append(b)
            nbrs[y].append(x)
            wts[y].append(b)
        self._nbrs = []
        self._wts = []
        for x in range(self.n):
            order = np.argsort(nbrs[x], kind="stable")
            self._nbrs.append(_frozen(np.asarray(nbrs[x], dtype=np.int64)[order]))
            self._wts.append(_frozen(np.asarray(wts[x], dtype=float)[order]))
        self.degree = _frozen(np.array([w.sum() for w in self._wts]))
        mask = np.ones(self.n, dtype=bool)
        mask[list(self.boundary)] = False
        self.interior_mask = _frozen(mask)

    # -- adjacency -------------------------------------------------------
    def neighbors(self, x: int) -> np.ndarray:
        """Neighbours of ``x`` in ascending id order."""
        return self._nbrs[x]

    def weights(self, x: int) -> np.ndarray:
        """Edge weights ``b(x, y)`` aligned with :meth:`neighbors`."""
        return self._wts[x]

    def weight(self, x: int, y: int) -> float:
        nb = self._nbrs[x]
        i = np.searchsorted(nb, y)
        if i < len(nb) and nb[i] == y:
            return float(self._wts[x][i])
        return 0.0

    @property
    def n_edges(self) -> int:
        return len(self.edge_b)

    @property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(self.interior_mask)

    @property
    def radius(self) -> int:
        return int(self.depth.max())

    def sphere(self, r: int) -> np.ndarray:
        return np.flatnonzero(self.depth == r)

    def is_interior(self, x: int) -> bool:
        return x not in self.boundary

    def with_boundary(self, boundary: Iterable[int]) -> "WeightedGraph":
        return WeightedGraph(self.measure, self.edge_x, self.edge_y,
                             self.edge_b, self.root, self.depth, boundary,
                             self.labels)

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return (self.n == other.n and self.root == other.root
                and self.boundary == other.boundary
                and self.labels == other.labels
                and np.array_equal(self.measure, other.measure)
                and np.array_equal(self.edge_x, other.edge_x)
                and np.array_equal(self.edge_y, other.edge_y)
                and np.array_equal(self.edge_b, other.edge_b))

    __hash__ = None

    def __repr__(self):
        return (f"WeightedGraph(n={self.n}, edges={self.n_edges}, "
                f"root={self.root}, radius={self.radius}, "
                f"boundary={len(self.boundary)})")


@dataclass(frozen=True)
class BoundaryDecomposition:
    interior: frozenset
    boundary: frozenset


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _bfs_depth(n: int, adj: list[list[int]], root: int) -> np.ndarray:
    depth = np.full(n, -1, dtype=np.int64)
    depth[root] = 0
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if depth[y] < 0:
                depth[y] = depth[x] + 1
                queue.append(y)
    return depth


def build_graph(edges: Iterable[tuple[int, int, float]],
                measures: Sequence[float],
                root: int = 0,
                boundary: Iterable[int] = (),
                labels: Sequence[str | None] | None = None) -> WeightedGraph:
    """Validate an edge list and measure and return a :class:`WeightedGraph`.

    Each unordered pair may appear once, in either orientation.
    """
    m = np.asarray(measures, dtype=float)
    n = len(m)
    if n == 0:
        raise ParseError("graph needs at least one vertex")
    if not np.all(np.isfinite(m)) or np.any(m <= 0):
        bad = int(np.flatnonzero(~(m > 0) | ~np.isfinite(m))[0])
        raise NonpositiveMeasure(f"m({bad}) = {m[bad]} is not positive")
    if not 0 <= root < n:
        raise ParseError(f"root {root} is not a vertex")

    seen = {}
    adj: list[list[int]] = [[] for _ in range(n)]
    for x, y, b in edges:
        x, y, b = int(x), int(y), float(b)
        if not (0 <= x < n and 0 <= y < n):
            raise ParseError(f"edge ({x}, {y}) references unknown vertex")
        if x == y:
            raise SelfLoop(f"self loop at vertex {x}")
        if not (b > 0 and np.isfinite(b)):
            raise NonpositiveWeight(f"b({x}, {y}) = {b} is not positive")
        key = (min(x, y), max(x, y))
        if key in seen:
            raise DuplicateEdge(f"edge {key} listed twice")
        seen[key] = b
        adj[x].append(y)
        adj[y].append(x)

    depth = _bfs_depth(n, adj, root)
    if np.any(depth < 0):
        missing = int(np.flatnonzero(depth < 0)[0])
        raise DisconnectedGraph(f"vertex {missing} unreachable from root {root}")

    keys = sorted(seen)
    ex = [k[0] for k in keys]
    ey = [k[1] for k in keys]
    eb = [seen[k] for k in keys]
    boundary = frozenset(int(v) for v in boundary)
    if any(not 0 <= v < n for v in boundary):
        raise ParseError("boundary references unknown vertex")
    if labels is None:
        labels = [None] * n
    elif len(labels) != n:
        raise ParseError("labels must align with measures")
    return WeightedGraph(m, ex, ey, eb, root, depth, boundary, labels)


def ball_decomposition(g: WeightedGraph, radius: int) -> BoundaryDecomposition:
    """Split an exact ball ``B_radius(o)`` into interior and outer sphere."""
    if radius < 1:
        raise RadiusExceedsGraph("radius must be at least 1")
    if g.radius < radius:
        raise RadiusExceedsGraph(
            f"radius {radius} exceeds graph depth {g.radius}")
    if g.radius > radius:
        raise RadiusExceedsGraph(
            f"graph has vertices beyond radius {radius}; build it as an exact ball")
    interior = frozenset(np.flatnonzero(g.depth < radius).tolist())
    boundary = frozenset(np.flatnonzero(g.depth == radius).tolist())
    return BoundaryDecomposition(interior, boundary)


def vertex_function(g: WeightedGraph, values) -> np.ndarray:
    """Return ``values`` as a float array after checking it fits ``g``."""
    f = np.asarray(values, dtype=float)
    if f.shape != (g.n,):
        raise MisalignedFunction(f"expected {g.n} values, got shape {f.shape}")
    if not np.all(np.isfinite(f)):
        raise MisalignedFunction("vertex functions must be finite")
    return f


# -- JSON ---------------------------------------------------------------

def graph_to_dict(g: WeightedGraph) -> dict:
    vertices = []
    for i in range(g.n):
        v = {"id": i, "m": float(g.measure[i])}
        if g.labels[i] is not None:
            v["label"] = g.labels[i]
        vertices.append(v)
    edges = [{"x": int(x), "y": int(y), "b": float(b)}
             for x, y, b in zip(g.edge_x, g.edge_y, g.edge_b)]
    doc = {"vertices": vertices, "edges": edges, "root": g.root}
    if g.boundary:
        doc["boundary"] = sorted(g.boundary)
    return doc


def graph_from_dict(doc: dict) -> WeightedGraph:
    try:
        verts = sorted(doc["vertices"], key=lambda v: int(v["id"]))
        ids = [int(v["id"]) for v in verts]
        if ids != list(range(len(ids))):
            raise ParseError("vertex ids must be dense integers 0..n-1")
        measures = [float(v["m"]) for v in verts]
        labels = [v.get("label") for v in verts]
        edges = [(int(e["x"]), int(e["y"]), float(e["b"])) for e in doc["edges"]]
        root = int(doc.get("root", 0))
        boundary = [int(v) for v in doc.get("boundary", [])]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed graph document: {exc!r}") from exc
    return build_graph(edges, measures, root=root, boundary=boundary,
                       labels=labels)


def dumps_graph(g: WeightedGraph) -> str:
    return json.dumps(graph_to_dict(g), indent=1, sort_keys=True) + "\n"


def read_graph(path) -> WeightedGraph:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return graph_from_dict(doc)


def write_graph(g: WeightedGraph, path) -> None:
    Path(path).write_text(dumps_graph(g))
