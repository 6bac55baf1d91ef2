"""Initial configurations chosen by an adversary.

Modes:

``uniform``
    every field of every node drawn independently over its full domain,
    including empty stations (``leaderless=True`` conditions on no leader);
``no-leader-coherent``
    no leaders, stations filled with a layered train pattern so complete
    trains exist from round 0;
``all-leaders``
    every node freshly made a leader;
``near-overflow``
    coherent marked trains whose counters sit ``overflow_gap`` below ``2**N``;
``colliding-marked``
    two marked train fronts emitted from the ends of a diameter, meeting
    in the middle;
``from-file``
    exact snapshot restore.

Generation is deterministic in ``(spec, graph, params)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .analysis import min_train_value
from .engine import Configuration
from .graphs import Graph
from .protocol import NodeState, ProtocolParams, Wagon, new_leader
from .records import read_snapshot

MODES = ("uniform", "no-leader-coherent", "all-leaders", "near-overflow",
         "colliding-marked", "from-file")


class InfeasibleSpec(ValueError):
    """The requested mode cannot be realised on the given graph."""


@dataclass(frozen=True)
class FuzzSpec:
    mode: str
    seed: int = 0
    overflow_gap: int = 2
    leaderless: bool = False
    path: Optional[str] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown init mode {self.mode!r}; choose from {', '.join(MODES)}")
        if self.mode == "from-file" and not self.path:
            raise ValueError("from-file mode needs a path")

    @classmethod
    def parse(cls, text: str, default_seed: int = 0) -> "FuzzSpec":
        """Parse ``MODE[:SEED]`` or ``from-file:PATH``."""
        if text.startswith("from-file:"):
            return cls("from-file", default_seed, path=text[len("from-file:"):])
        mode, sep, tail = text.rpartition(":")
        if sep and tail.lstrip("-").isdigit():
            return cls(mode, int(tail))
        return cls(text, default_seed)


def _rng(spec: FuzzSpec) -> np.random.Generator:
    return np.random.default_rng([spec.seed & 0xFFFFFFFFFFFFFFFF, MODES.index(spec.mode)])


def _uniform(g: Graph, params: ProtocolParams, rng, leaderless: bool) -> list[NodeState]:
    N = params.N
    per_station = 8 * N + 1

    def station():
        code = int(rng.integers(per_station))
        if code == 0:
            return None
        code -= 1
        return Wagon(code // 8, code & 1, (code >> 1) & 1, (code >> 2) & 1)

    states = []
    for _ in range(g.n):
        rand, leader = (int(b) for b in rng.integers(2, size=2))
        F, L = station(), station()
        states.append(NodeState(rand, 0 if leaderless else leader, F, L))
    return states


def _cycle_order(g: Graph) -> Optional[list[int]]:
    """Nodes in walking order if ``g`` is a single cycle."""
    if g.n < 3 or any(len(a) != 2 for a in g.adj):
        return None
    order, prev = [0], None
    while len(order) < g.n:
        cur = order[-1]
        nxt = [u for u in g.adj[cur] if u != prev][0]
        if nxt == 0:
            return None
        prev = cur
        order.append(nxt)
    return order


def _positions(g: Graph, params: ProtocolParams, root: int) -> tuple[list[int], Optional[int]]:
    """Per-node position along the layered pattern, plus the period for cycles.

    On a cycle whose ``2n`` stations hold a whole number of trains, wagons
    can circulate forever without any node missing a successor.
    """
    order = _cycle_order(g)
    if order is not None and (2 * g.n) % params.N == 0:
        pos = [0] * g.n
        start = order.index(root)
        for k in range(g.n):
            pos[order[(start + k) % g.n]] = k
        return pos, 2 * g.n
    return [int(d) for d in g.distances[root]], None


def _layered(g: Graph, params: ProtocolParams, root: int, head_idx: int,
             wagon_at: Callable[[int, int, int], Wagon]) -> list[NodeState]:
    """Fill node ``v`` with layers ``2p`` (L) and ``2p+1`` (F), ``p`` its position.

    Layer ``j`` holds index ``(head_idx - j) % N``; ``wagon_at(j, idx, group)``
    builds the wagon, ``group`` numbering the train the layer belongs to.
    """
    N = params.N
    pos, period = _positions(g, params, root)

    def wagon(j):
        idx = (head_idx - j) % N
        group = (j - head_idx - 1) // N
        if period is not None:
            group %= period // N
        return wagon_at(j, idx, group)

    return [NodeState(0, 0, wagon(2 * p + 1), wagon(2 * p)) for p in pos]


def _no_leader_coherent(g, params, rng) -> list[NodeState]:
    N = params.N
    # prefer a root deep enough for a complete train, and place one head at
    # a layer that has N-1 layers behind it
    ecc = g.distances.max(axis=1).astype(int)
    deep = [v for v in range(g.n) if 2 * ecc[v] + 1 >= N - 1]
    pool = deep or list(range(g.n))
    root = pool[int(rng.integers(len(pool)))]
    top = 2 * g.n - 1 if _positions(g, params, root)[1] else 2 * int(ecc[root]) + 1
    head_idx = int(rng.integers(N - 1, top + 1)) % N if top >= N - 1 else int(rng.integers(N))
    flags = {}

    def wagon_at(j, idx, group):
        if group not in flags:
            flags[group] = int(rng.integers(2))
        bit = int(rng.integers(2))
        carry = 0 if idx == N - 1 else int(rng.integers(2))
        return Wagon(idx, bit, carry, flags[group])

    return _layered(g, params, root, head_idx, wagon_at)


def _diameter_ends(g: Graph) -> tuple[int, int]:
    ecc = g.distances.max(axis=1)
    a = int(np.argmax(ecc))
    b = int(np.argmax(g.distances[a]))
    return a, b


def _near_overflow(g, params, rng, gap: int) -> list[NodeState]:
    N = params.N
    if not 1 <= gap <= 2 ** N:
        raise InfeasibleSpec(f"overflow gap must lie in [1, {2 ** N}]")
    target = 2 ** N - gap
    ends = [v for v in range(g.n) if g.eccentricity(v) == g.diameter]
    root = ends[int(rng.integers(len(ends)))]
    # the root resets its stations at round 1, so the head goes to layer N+1:
    # the train then clears the root's layers and still has room to advance
    head_idx = min(N + 1, 2 * g.diameter + 1) % N
    states = _layered(g, params, root, head_idx,
                      lambda j, idx, group: Wagon(idx, (target >> idx) & 1, 0, 1))
    if min_train_value(Configuration(tuple(states)), g, params, 1) is None:
        raise InfeasibleSpec(f"{g.name or 'graph'} is too shallow to hold a complete train")
    return states


def _colliding_marked(g, params) -> list[NodeState]:
    if g.diameter < 2:
        raise InfeasibleSpec("colliding trains need a graph of diameter >= 2")
    N = params.N
    a, b = _diameter_ends(g)
    da, db = g.distances[a], g.distances[b]
    side = [a if da[v] <= db[v] else b for v in range(g.n)]
    depth = {r: max(int(g.distances[r][v]) for v in range(g.n) if side[v] == r) for r in (a, b)}
    states = []
    for v in range(g.n):
        r = side[v]
        p = int(g.distances[r][v])
        head_idx = (2 * depth[r] + 1) % N
        F = Wagon((head_idx - 2 * p - 1) % N, 0, 0, 1)
        L = Wagon((head_idx - 2 * p) % N, 0, 0, 1)
        states.append(NodeState(0, int(v == r), F, L))
    return states


def generate_config(spec: FuzzSpec, graph: Graph, params: ProtocolParams) -> Configuration:
    rng = _rng(spec)
    if spec.mode == "uniform":
        states = _uniform(graph, params, rng, spec.leaderless)
    elif spec.mode == "all-leaders":
        states = [new_leader(int(rng.integers(2)) & int(rng.integers(2))) for _ in range(graph.n)]
    elif spec.mode == "no-leader-coherent":
        states = _no_leader_coherent(graph, params, rng)
    elif spec.mode == "near-overflow":
        states = _near_overflow(graph, params, rng, spec.overflow_gap)
    elif spec.mode == "colliding-marked":
        states = _colliding_marked(graph, params)
    else:
        cfg = read_snapshot(spec.path, params)
        if cfg.n != graph.n:
            raise InfeasibleSpec(f"snapshot has {cfg.n} nodes, graph has {graph.n}")
        return cfg
    cfg = Configuration(tuple(states), 0)
    cfg.check(graph, params)
    return cfg
