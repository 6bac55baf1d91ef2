"""Synchronous scheduler: snapshot, simultaneous transition, commit."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .graphs import Graph
from .protocol import NodeState, ProtocolParams, update_state
from .rng import RandomSource

log = logging.getLogger(__name__)

Observer = Callable[["Configuration"], Optional[str]]


@dataclass(frozen=True)
class Configuration:
    states: tuple[NodeState, ...]
    round: int = 0

    def __post_init__(self):
        if not isinstance(self.states, tuple):
            object.__setattr__(self, "states", tuple(self.states))
        if self.round < 0:
            raise ValueError("round must be non-negative")

    @property
    def n(self) -> int:
        return len(self.states)

    def check(self, graph: Graph, params: ProtocolParams) -> None:
        if self.n != graph.n:
            raise ValueError(f"configuration has {self.n} nodes, graph has {graph.n}")
        for s in self.states:
            s.check(params)

    def neighbors(self, graph: Graph, v: int) -> list[NodeState]:
        return [self.states[u] for u in graph.adj[v]]

    def leaders(self) -> list[int]:
        return [i for i, s in enumerate(self.states) if s.leader]


class RunError(RuntimeError):
    """An observer failed (typically trace I/O); the run was aborted."""


@dataclass
class RunResult:
    final: Configuration
    reason: str
    stop_round: int
    bits_drawn: int


def step(config: Configuration, graph: Graph, rng: RandomSource,
         params: ProtocolParams) -> Configuration:
    """Apply the transition function at every node against the same snapshot.

    Every node draws its two random bits whether or not its branch reads them.
    """
    states = config.states
    t = config.round
    new = []
    for v in range(graph.n):
        x = rng.draw(v, t)
        new.append(update_state(states[v], [states[u] for u in graph.adj[v]], x, params))
    return Configuration(tuple(new), t + 1)


def run(initial: Configuration, graph: Graph, rng: RandomSource, params: ProtocolParams,
        max_rounds: int, observers: Sequence[Observer] = ()) -> RunResult:
    """Step until ``max_rounds`` or until an observer returns a stop reason.

    Observers see the initial configuration and every configuration produced
    afterwards.  ``max_rounds`` counts rounds executed by this call.
    """
    if max_rounds < 0:
        raise ValueError("max_rounds must be non-negative")
    initial.check(graph, params)
    bits0 = rng.bits_drawn

    def notify(cfg):
        reason = None
        for obs in observers:
            try:
                r = obs(cfg)
            except OSError as exc:
                raise RunError(f"observer failed at round {cfg.round}: {exc}") from exc
            reason = reason or r
        return reason

    cfg = initial
    reason = notify(cfg)
    executed = 0
    while reason is None and executed < max_rounds:
        cfg = step(cfg, graph, rng, params)
        executed += 1
        reason = notify(cfg)
    if rng.bits_drawn - bits0 != 2 * graph.n * executed:
        raise RunError("random bit accounting mismatch")
    return RunResult(cfg, reason or "cap", cfg.round, rng.bits_drawn - bits0)
