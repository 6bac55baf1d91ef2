"""Round callbacks for :func:`stabletrains.engine.run`.

An observer is any callable taking the configuration just produced and
returning ``None`` or a stop reason.  It is also shown the initial
configuration.
"""

from __future__ import annotations

from typing import Optional, TextIO

from .analysis import collect_metrics, extract_trains, is_legitimate, marked_wagon_count
from .engine import Configuration
from .graphs import Graph
from .protocol import ProtocolParams, encode_state, local_error_flags, state_bit_budget
from .records import config_record, dumps, node_token, parse_node_token

MAX_FINDINGS = 20


class ConvergenceDetector:
    """Stops once a legitimate configuration has kept its leader for ``window`` rounds.

    A change of leader or a loss of legitimacy inside the window is a
    closure violation; the detector records it and waits for the next
    legitimate round.
    """

    def __init__(self, graph: Graph, params: ProtocolParams, window: int = 1000):
        self.graph, self.params, self.window = graph, params, window
        self.first_legitimate: Optional[int] = None
        self.leader: Optional[int] = None
        self.start: Optional[int] = None
        self.violations: list[str] = []

    def __call__(self, cfg: Configuration) -> Optional[str]:
        root = is_legitimate(cfg, self.graph, self.params) if len(cfg.leaders()) == 1 else None
        if self.start is not None and root != self.leader:
            self.violations.append(
                f"round {cfg.round}: legitimacy with leader {self.leader} "
                f"not preserved (now {root})")
            self.start = None
        if self.start is None and root is not None:
            self.start, self.leader = cfg.round, root
            if self.first_legitimate is None:
                self.first_legitimate = cfg.round
        if self.start is not None and cfg.round - self.start >= self.window:
            return "converged"
        return None


class InvariantChecker:
    """Per-round protocol invariants that hold from round 1 on.

    Records nodes showing a local error, last wagons holding a carry, and
    states whose encoding exceeds the per-node bit budget.
    """

    def __init__(self, params: ProtocolParams, from_round: int = 1):
        self.params = params
        self.from_round = from_round
        self.budget = state_bit_budget(params)
        self.count = 0
        self.findings: list[str] = []
        self.carry_findings = 0
        self.budget_violations = 0

    def _note(self, msg: str) -> None:
        self.count += 1
        if len(self.findings) < MAX_FINDINGS:
            self.findings.append(msg)

    def __call__(self, cfg: Configuration) -> None:
        N = self.params.N
        for v, s in enumerate(cfg.states):
            if encode_state(s, self.params).bit_length() > self.budget:
                self.budget_violations += 1
            if cfg.round < self.from_round:
                continue
            bad = [k for k, on in local_error_flags(s, self.params).items() if on]
            if bad:
                self._note(f"round {cfg.round} node {v}: {'+'.join(bad)}")
            for name, w in (("F", s.F), ("L", s.L)):
                if w is not None and w.idx == N - 1 and w.carry == 1:
                    self.carry_findings += 1
                    self._note(f"round {cfg.round} node {v}: carry on last wagon in {name}")
        return None


class TrainIncrementChecker:
    """Minimum train value must rise by at least one while no leader holds that flag.

    For each flag ``i`` and consecutive rounds ``(t, t+1)`` such that no
    leader at ``t+1`` carries a wagon of flag ``i`` and both rounds contain
    complete trains of flag ``i``, the minimum value must grow by one.
    ``require_clean`` additionally restricts to rounds ``t`` free of local
    errors.
    """

    def __init__(self, graph: Graph, params: ProtocolParams, require_clean: bool = True):
        self.graph, self.params = graph, params
        self.require_clean = require_clean
        self.prev: Optional[tuple[int, dict[int, Optional[int]], bool]] = None
        self.events = 0
        self.violations: list[str] = []

    def _mins(self, cfg):
        mins: dict[int, Optional[int]] = {0: None, 1: None}
        for t in extract_trains(cfg, self.graph, self.params):
            if mins[t.flag] is None or t.value < mins[t.flag]:
                mins[t.flag] = t.value
        return mins

    def __call__(self, cfg: Configuration) -> None:
        mins = self._mins(cfg)
        clean = not any(any(local_error_flags(s, self.params).values()) for s in cfg.states)
        if self.prev is not None and self.prev[0] == cfg.round - 1:
            _, prev_mins, prev_clean = self.prev
            for i in (0, 1):
                leader_holds = any(
                    s.leader and any(w.flag == i for w in s.wagons()) for s in cfg.states)
                if leader_holds or prev_mins[i] is None or mins[i] is None:
                    continue
                if self.require_clean and not prev_clean:
                    continue
                self.events += 1
                if mins[i] < prev_mins[i] + 1:
                    self.violations.append(
                        f"round {cfg.round - 1}->{cfg.round} flag {i}: "
                        f"min value {prev_mins[i]} -> {mins[i]}")
        self.prev = (cfg.round, mins, clean)
        return None


class MarkedTracker:
    """Last round at which any marked wagon was present."""

    def __init__(self):
        self.last_marked: Optional[int] = None

    def __call__(self, cfg: Configuration) -> None:
        if marked_wagon_count(cfg):
            self.last_marked = cfg.round
        return None


class LeaderTracker:
    """First round with at least one leader."""

    def __init__(self):
        self.first_leader: Optional[int] = None

    def __call__(self, cfg: Configuration) -> None:
        if self.first_leader is None and cfg.leaders():
            self.first_leader = cfg.round
        return None


class TraceWriter:
    """Writes one configuration record per round, optionally with metrics.

    Every node token is parsed back and re-encoded to confirm it stays
    within the per-node bit budget.
    """

    def __init__(self, fh: TextIO, graph: Graph, params: ProtocolParams,
                 with_metrics: bool = False, metrics_fh: Optional[TextIO] = None):
        self.fh, self.graph, self.params = fh, graph, params
        self.with_metrics = with_metrics
        self.metrics_fh = metrics_fh
        self.budget = state_bit_budget(params)
        self.records = 0
        self.oversized_tokens = 0

    def __call__(self, cfg: Configuration) -> None:
        for s in cfg.states:
            tok = node_token(s)
            if encode_state(parse_node_token(tok, self.params), self.params).bit_length() > self.budget:
                self.oversized_tokens += 1
        metrics = None
        if self.with_metrics or self.metrics_fh is not None:
            metrics = collect_metrics(cfg, self.graph, self.params).to_dict()
        if self.fh is not None:
            self.fh.write(dumps(config_record(cfg, metrics if self.with_metrics else None)) + "\n")
        if self.metrics_fh is not None:
            self.metrics_fh.write(dumps(metrics) + "\n")
        self.records += 1
        return None
