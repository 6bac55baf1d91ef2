"""Executable checkers over configuration snapshots.

Trains, layers around a root, the legitimacy predicate and the per-round
metrics that the verification campaigns track.  Everything is recomputed from a
single snapshot; nothing is maintained across rounds.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional, Sequence

from .engine import Configuration
from .graphs import Graph
from .protocol import ProtocolParams, Station, Wagon, err

EXPANSION_BUDGET = 1_000_000


class ExpansionBudgetExceeded(RuntimeError):
    pass


def train_value(wagons: Sequence[Wagon]) -> int:
    """Counter value of consecutive wagons, least significant (lowest idx) first.

    Computed relative to the first wagon's index, so a partial train
    starting at index ``k1`` is valued as if it started at 0.
    """
    return sum((w.bit + 2 * w.carry) << j for j, w in enumerate(wagons))


@dataclass(frozen=True)
class TrainView:
    wagons: tuple[Wagon, ...]
    carriers: tuple[tuple[int, str], ...]
    complete: bool = True

    @property
    def flag(self) -> int:
        return self.wagons[0].flag

    @property
    def value(self) -> int:
        return train_value(self.wagons)


def _station(config: Configuration, node: int, which: str) -> Station:
    s = config.states[node]
    return s.F if which == "F" else s.L


def extract_trains(config: Configuration, graph: Graph, params: ProtocolParams,
                   flag: Optional[int] = None, budget: int = EXPANSION_BUDGET) -> list[TrainView]:
    """All complete trains, found by extending every head wagon station by station.

    A train runs ``F`` then ``L`` inside one node and ``L`` then a
    neighbour's ``F`` between nodes; it starts at either station type.
    Results are sorted by carrier sequence.
    """
    N = params.N
    memo: dict[tuple[int, str, int, int], list[tuple[tuple[int, str], ...]]] = {}
    expansions = 0

    def suffixes(node: int, which: str, idx: int, fl: int):
        # carrier sequences of wagons idx..N-1 starting at (node, which)
        nonlocal expansions
        key = (node, which, idx, fl)
        if key in memo:
            return memo[key]
        expansions += 1
        if expansions > budget:
            raise ExpansionBudgetExceeded(f"train extraction exceeded {budget} expansions")
        w = _station(config, node, which)
        out = []
        if w is not None and w.idx == idx and w.flag == fl:
            if idx == N - 1:
                out.append(((node, which),))
            else:
                nxt = [(node, "L")] if which == "F" else [(u, "F") for u in graph.adj[node]]
                for u, wh in nxt:
                    for tail in suffixes(u, wh, idx + 1, fl):
                        out.append(((node, which),) + tail)
        memo[key] = out
        return out

    trains = []
    for v in range(graph.n):
        for which in ("F", "L"):
            head = _station(config, v, which)
            if head is None or head.idx != 0 or (flag is not None and head.flag != flag):
                continue
            for carriers in suffixes(v, which, 0, head.flag):
                wagons = tuple(_station(config, u, wh) for u, wh in carriers)
                trains.append(TrainView(wagons, carriers))
    trains.sort(key=lambda t: t.carriers)
    return trains


def min_train_value(config: Configuration, graph: Graph, params: ProtocolParams,
                    flag: int) -> Optional[int]:
    values = [t.value for t in extract_trains(config, graph, params, flag)]
    return min(values) if values else None


def layers(config: Configuration, graph: Graph, root: int) -> list[list[Station]]:
    """Layer ``2i`` holds the L stations at distance ``i``; layer ``2i+1`` their F stations."""
    dist = graph.distances[root]
    ecc = int(dist.max())
    out: list[list[Station]] = [[] for _ in range(2 * ecc + 2)]
    for v in range(graph.n):
        d = int(dist[v])
        out[2 * d].append(config.states[v].L)
        out[2 * d + 1].append(config.states[v].F)
    return out


def layer_wagon(layer: list[Station]) -> Optional[Wagon]:
    """The common wagon of a layer whose stations are all filled and identical."""
    if not layer or layer[0] is None or any(w != layer[0] for w in layer[1:]):
        return None
    return layer[0]


def partial_train_value(B: Sequence[Wagon], k: int, params: ProtocolParams) -> Optional[int]:
    """Value of ``B[k], B[k-1], ..., B[k-m]`` with ``m = min(k, N-1-B[k].idx)``.

    ``None`` when those wagons are not a partial train (broken index run or
    mixed flags).
    """
    head = B[k]
    m = min(k, params.N - 1 - head.idx)
    run = [B[k - j] for j in range(m + 1)]
    if any(w.idx != head.idx + j or w.flag != head.flag for j, w in enumerate(run)):
        return None
    return train_value(run)


def _layer_clauses(L: list[list[Station]], upto: int, params: ProtocolParams) -> tuple[list[Wagon], list[str]]:
    """Check singleton layers, the index relation and train values for layers ``0..upto``."""
    problems = []
    B: list[Wagon] = []
    for i in range(upto + 1):
        w = layer_wagon(L[i])
        if w is None:
            problems.append(f"layer {i} is not a single filled wagon")
            return B, problems
        B.append(w)
    N = params.N
    for i, w in enumerate(B):
        if (w.idx + i) % N != B[0].idx:
            problems.append(f"layer {i} index {w.idx} breaks the index relation")
    if problems:
        return B, problems
    for k in range(upto + 1):
        value = partial_train_value(B, k, params)
        expected = k >> B[k].idx
        if value is None:
            problems.append(f"layer {k} does not start a partial train")
        elif value != expected:
            problems.append(f"layer {k} partial train value {value} != {expected}")
    return B, problems


def legitimacy_problems(config: Configuration, graph: Graph,
                        params: ProtocolParams) -> tuple[Optional[int], list[str]]:
    """``(root, problems)``; the configuration is legitimate iff ``problems`` is empty."""
    leaders = config.leaders()
    if len(leaders) != 1:
        return None, [f"{len(leaders)} leaders"]
    root = leaders[0]
    L = layers(config, graph, root)
    _, problems = _layer_clauses(L, len(L) - 1, params)
    return root, problems


def is_legitimate(config: Configuration, graph: Graph, params: ProtocolParams) -> Optional[int]:
    """The unique leader of a legitimate configuration, else ``None``."""
    root, problems = legitimacy_problems(config, graph, params)
    return None if problems else root


def layer_table(config: Configuration, graph: Graph, root: int,
                params: ProtocolParams) -> list[dict]:
    """Per-layer rows (index, wagon, partial-train value, expected value) for reporting."""
    L = layers(config, graph, root)
    B = [layer_wagon(layer) for layer in L]
    rows = []
    for k, w in enumerate(B):
        row = {"layer": k, "idx": None, "flag": None, "value": None, "expected": None}
        if w is not None:
            row.update(idx=w.idx, flag=w.flag, expected=k >> w.idx)
            if all(b is not None for b in B[:k + 1]):
                row["value"] = partial_train_value(B, k, params)
        rows.append(row)
    return rows


def leg_grow_problems(config: Configuration, graph: Graph, params: ProtocolParams,
                      root: int, k: int) -> list[str]:
    """Conditions that should hold ``k`` rounds after ``root`` emits a lone marked head.

    (i) no other leader within distance ``k/2``; (ii)/(iii) layers ``0..k``
    are singletons with the index relation and exact partial-train values;
    (iv) no marked wagon beyond layer ``k``; (v) layer ``k`` holds the marked
    head.
    """
    problems = []
    dist = graph.distances[root]
    for u in range(graph.n):
        if u != root and 2 * dist[u] <= k and config.states[u].leader:
            problems.append(f"(i) node {u} at distance {dist[u]} is a leader")
    if not config.states[root].leader:
        problems.append(f"(i) root {root} is no longer a leader")
    L = layers(config, graph, root)
    if k >= len(L):
        return problems + [f"k={k} exceeds the last layer {len(L) - 1}"]
    B, clause = _layer_clauses(L, k, params)
    problems += ["(ii/iii) " + p for p in clause]
    for i in range(k + 1, len(L)):
        if any(w is not None and w.flag == 1 for w in L[i]):
            problems.append(f"(iv) marked wagon in layer {i}")
    if len(B) > k and not (B[k].idx == 0 and B[k].flag == 1):
        problems.append(f"(v) layer {k} holds {B[k]} instead of a marked head")
    return problems


@dataclass
class RoundMetrics:
    round: int
    leader_count: int
    marked_wagon_count: int
    min_unmarked_train_value: Optional[int]
    min_marked_train_value: Optional[int]
    err_trigger_count: int
    is_legitimate: bool
    legitimate_leader: Optional[int]

    def to_dict(self) -> dict:
        return asdict(self)


def marked_wagon_count(config: Configuration) -> int:
    return sum(1 for s in config.states for w in (s.F, s.L) if w is not None and w.flag == 1)


def collect_metrics(config: Configuration, graph: Graph, params: ProtocolParams) -> RoundMetrics:
    trains = extract_trains(config, graph, params)
    unmarked = [t.value for t in trains if t.flag == 0]
    marked = [t.value for t in trains if t.flag == 1]
    root = is_legitimate(config, graph, params)
    return RoundMetrics(
        round=config.round,
        leader_count=len(config.leaders()),
        marked_wagon_count=marked_wagon_count(config),
        min_unmarked_train_value=min(unmarked) if unmarked else None,
        min_marked_train_value=min(marked) if marked else None,
        err_trigger_count=sum(
            err(config.states[v], config.neighbors(graph, v), params) for v in range(graph.n)),
        is_legitimate=root is not None,
        legitimate_leader=root,
    )
