"""Undirected connected topologies and the distances the checkers rely on.

Graphs are described by short spec strings::

    ring:8  path:8  complete:6  grid:3x3  tree:10:SEED  gnp:10:0.4[:SEED]  file:PATH

Edge-list files hold one ``u v`` pair per line (0-indexed); ``#`` starts a
comment and blank lines are ignored.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable

import networkx as nx
import numpy as np

GNP_RETRIES = 1000


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    """Immutable simple connected graph with sorted adjacency lists."""

    n: int
    adj: tuple[tuple[int, ...], ...]
    name: str = ""

    def __post_init__(self):
        if self.n < 2:
            raise GraphError("a graph needs at least 2 nodes")
        if len(self.adj) != self.n:
            raise GraphError("adjacency length does not match n")
        for v, nbrs in enumerate(self.adj):
            if list(nbrs) != sorted(set(nbrs)):
                raise GraphError(f"adjacency of {v} is not sorted or has duplicates")
            for u in nbrs:
                if not 0 <= u < self.n:
                    raise GraphError(f"edge {v}-{u} leaves the node range")
                if u == v:
                    raise GraphError(f"self-loop at {v}")
                if v not in self.adj[u]:
                    raise GraphError(f"edge {v}-{u} is not symmetric")
        if min(bfs_distances(self, 0)) < 0:
            raise GraphError(f"graph {self.name or '<unnamed>'} is not connected")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], name: str = "") -> "Graph":
        nbrs = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge {u}-{v} leaves the node range 0..{n - 1}")
            if u == v:
                raise GraphError(f"self-loop at {u}")
            if v in nbrs[u]:
                raise GraphError(f"duplicate edge {u}-{v}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs), name)

    @classmethod
    def from_networkx(cls, g: nx.Graph, name: str = "") -> "Graph":
        g = nx.convert_node_labels_to_integers(g, ordering="sorted")
        return cls.from_edges(g.number_of_nodes(), g.edges(), name)

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.adj[u] if u < v]

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` arrays of the adjacency lists."""
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(a) for a in self.adj])
        indices = np.array([u for a in self.adj for u in a], dtype=np.int64)
        return indptr, indices

    @cached_property
    def distances(self) -> np.ndarray:
        """All-pairs hop distances, shape ``(n, n)``."""
        return np.array([bfs_distances(self, s) for s in range(self.n)], dtype=np.int64)

    def eccentricity(self, v: int) -> int:
        return int(self.distances[v].max())

    @property
    def diameter(self) -> int:
        return int(self.distances.max())


def bfs_distances(g: Graph, source: int) -> list[int]:
    """Hop distances from ``source``; unreachable nodes get -1."""
    if not 0 <= source < g.n:
        raise GraphError(f"node {source} out of range")
    dist = [-1] * g.n
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for u in g.adj[v]:
            if dist[u] < 0:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def eccentricity(g: Graph, v: int) -> int:
    return g.eccentricity(v)


def diameter(g: Graph) -> int:
    return g.diameter


def ring(n: int) -> Graph:
    if n < 3:
        raise GraphError("a ring needs at least 3 nodes")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], f"ring:{n}")


def path(n: int) -> Graph:
    if n < 2:
        raise GraphError("a path needs at least 2 nodes")
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)], f"path:{n}")


def complete(n: int) -> Graph:
    if n < 2:
        raise GraphError("a complete graph needs at least 2 nodes")
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)], f"complete:{n}")


def grid(rows: int, cols: int) -> Graph:
    if rows * cols < 2 or rows < 1 or cols < 1:
        raise GraphError("a grid needs at least 2 nodes")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph.from_edges(rows * cols, edges, f"grid:{rows}x{cols}")


def random_tree(n: int, seed: int) -> Graph:
    """Uniform labelled tree from a seeded Prüfer sequence."""
    if n < 2:
        raise GraphError("a tree needs at least 2 nodes")
    if n == 2:
        return Graph.from_edges(2, [(0, 1)], f"tree:2:{seed}")
    rng = np.random.default_rng(seed)
    seq = [int(x) for x in rng.integers(0, n, size=n - 2)]
    return Graph.from_networkx(nx.from_prufer_sequence(seq), f"tree:{n}:{seed}")


def gnp(n: int, p: float, seed: int = 0) -> Graph:
    """Erdős–Rényi graph conditioned on connectivity by resampling."""
    if n < 2:
        raise GraphError("a graph needs at least 2 nodes")
    if not 0 <= p <= 1:
        raise GraphError("edge probability must lie in [0, 1]")
    for attempt in range(GNP_RETRIES):
        g = nx.gnp_random_graph(n, p, seed=seed * GNP_RETRIES + attempt)
        if nx.is_connected(g):
            return Graph.from_networkx(g, f"gnp:{n}:{p}:{seed}")
    raise GraphError(f"no connected gnp({n}, {p}) sample after {GNP_RETRIES} tries")


def read_edge_list(path) -> Graph:
    edges = []
    nodes = set()
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            u, v = (int(x) for x in parts)
        except ValueError:
            raise GraphError(f"{path}:{lineno}: expected 'u v', got {line!r}") from None
        if u < 0 or v < 0:
            raise GraphError(f"{path}:{lineno}: negative node id")
        edges.append((u, v))
        nodes.update((u, v))
    if not nodes:
        raise GraphError(f"{path}: no edges")
    return Graph.from_edges(max(nodes) + 1, edges, f"file:{path}")


def write_edge_list(g: Graph, path) -> None:
    lines = [f"# {g.name or 'graph'} n={g.n}"] + [f"{u} {v}" for u, v in g.edges()]
    Path(path).write_text("\n".join(lines) + "\n")


def _int(s: str, spec: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise GraphError(f"bad integer {s!r} in graph spec {spec!r}") from None


def generate(spec: str) -> Graph:
    """Build a graph from a spec string such as ``ring:8`` or ``gnp:10:0.4:7``."""
    kind, _, rest = spec.partition(":")
    if kind == "file":
        if not rest:
            raise GraphError("file: spec needs a path")
        return read_edge_list(rest)
    args = rest.split(":") if rest else []
    if kind in ("ring", "path", "complete"):
        if len(args) != 1:
            raise GraphError(f"{kind} spec takes one argument: {spec!r}")
        return {"ring": ring, "path": path, "complete": complete}[kind](_int(args[0], spec))
    if kind == "grid":
        dims = args[0].split("x") if len(args) == 1 else []
        if len(dims) != 2:
            raise GraphError(f"grid spec must look like grid:RxC, got {spec!r}")
        return grid(_int(dims[0], spec), _int(dims[1], spec))
    if kind == "tree":
        if len(args) != 2:
            raise GraphError(f"tree spec must look like tree:N:SEED, got {spec!r}")
        return random_tree(_int(args[0], spec), _int(args[1], spec))
    if kind == "gnp":
        if len(args) not in (2, 3):
            raise GraphError(f"gnp spec must look like gnp:N:P[:SEED], got {spec!r}")
        try:
            p = float(args[1])
        except ValueError:
            raise GraphError(f"bad probability in {spec!r}") from None
        seed = _int(args[2], spec) if len(args) == 3 else 0
        return gnp(_int(args[0], spec), p, seed)
    raise GraphError(f"unknown graph kind {kind!r} in {spec!r}")
