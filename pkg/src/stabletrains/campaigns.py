"""Seeded verification campaigns, one suite per property of the protocol.

Each suite runs ``runs`` independent seeded executions per graph and
returns a :class:`CampaignReport`.  A report is deterministic in its
arguments: rows are ordered by (graph, seed) and carry no timings.

Suites
------
closure            legitimate rounds stay legitimate with the same leader
leader-creation    leaderless starts get a leader within ``2**N + N`` rounds
marked-vanish      with X forced to 0, no marked wagon from ``N + 2**N + 2N - 2`` on
train-incr         minimum train value grows while no leader holds that flag
leg-grow           a lone marked emission builds the legitimate layers around its emitter
convergence        seeded runs reach a legitimate configuration within the cap
local-error-purge  no local error and no carry on a last wagon from round 1 on
"""

from __future__ import annotations

import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

from .analysis import is_legitimate, leg_grow_problems, marked_wagon_count
from .engine import Configuration, RunError, run, step
from .fuzz import FuzzSpec, InfeasibleSpec, generate_config
from .graphs import Graph, generate
from .observers import (
    ConvergenceDetector, InvariantChecker, LeaderTracker, MarkedTracker, TrainIncrementChecker,
)
from .protocol import ProtocolParams
from .records import dumps
from .rng import RandomSource

SUITES = ("closure", "leader-creation", "marked-vanish", "train-incr", "leg-grow",
          "convergence", "local-error-purge")

DEFAULT_CAP = 1_000_000
WORKERS_ENV = "STABLETRAINS_WORKERS"


class CampaignError(ValueError):
    pass


@dataclass
class RunRow:
    graph: str
    seed: int
    N: int
    init: str
    outcome: str
    rounds: Optional[int]
    violations: list[str] = field(default_factory=list)
    events: int = 0
    local_error_findings: int = 0
    carry_findings: int = 0
    budget_violations: int = 0
    finding_samples: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class CampaignReport:
    suite: str
    rows: list[RunRow]
    min_converged_fraction: Optional[float] = None

    @property
    def violation_count(self) -> int:
        return sum(len(r.violations) for r in self.rows)

    @property
    def converged_fraction(self) -> float:
        return sum(r.outcome == "converged" for r in self.rows) / max(1, len(self.rows))

    @property
    def passed(self) -> bool:
        if self.violation_count:
            return False
        if self.min_converged_fraction is not None:
            return self.converged_fraction >= self.min_converged_fraction
        return True

    def summary(self) -> dict:
        rounds = [r.rounds for r in self.rows if r.rounds is not None and r.outcome == "converged"]
        return {
            "suite": self.suite,
            "runs": len(self.rows),
            "passed": self.passed,
            "runs_with_violations": sum(bool(r.violations) for r in self.rows),
            "violations": self.violation_count,
            "converged": sum(r.outcome == "converged" for r in self.rows),
            "converged_fraction": round(self.converged_fraction, 6),
            "median_rounds": statistics.median(rounds) if rounds else None,
            "max_rounds": max(rounds) if rounds else None,
            "events": sum(r.events for r in self.rows),
            "local_error_findings": sum(r.local_error_findings for r in self.rows),
            "carry_findings": sum(r.carry_findings for r in self.rows),
            "budget_violations": sum(r.budget_violations for r in self.rows),
        }

    def lines(self) -> list[str]:
        out = [dumps({"suite": self.suite, "row": r.to_dict()}) for r in self.rows]
        out.append(dumps({"summary": self.summary()}))
        return out

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("\n".join(self.lines()) + "\n")


def _setup(graph_spec: str, N: int) -> tuple[Graph, ProtocolParams]:
    g = generate(graph_spec)
    params = ProtocolParams(N)
    params.check_graph_size(g.n)
    return g, params


def _row(graph_spec, seed, params, init, outcome, rounds, violations, inv: InvariantChecker,
         events=0) -> RunRow:
    return RunRow(graph_spec, seed, params.N, init, outcome, rounds, list(violations), events,
                  inv.count - inv.carry_findings, inv.carry_findings, inv.budget_violations,
                  list(inv.findings[:5]))


def _convergence_run(graph_spec, seed, N, window, cap, inits=("uniform", "all-leaders")):
    g, params = _setup(graph_spec, N)
    init = inits[seed % len(inits)]
    cfg = generate_config(FuzzSpec(init, seed), g, params)
    det = ConvergenceDetector(g, params, window)
    inv = InvariantChecker(params)
    res = run(cfg, g, RandomSource.seeded(seed), params, cap, [det, inv])
    outcome = "converged" if res.reason == "converged" else "cap"
    return _row(graph_spec, seed, params, init, outcome, det.first_legitimate, det.violations, inv)


def run_closure(graph_spec, seed, N, window=5000, cap=DEFAULT_CAP):
    return _convergence_run(graph_spec, seed, N, window, cap)


def run_convergence(graph_spec, seed, N, window=1000, cap=DEFAULT_CAP, init=None):
    inits = (init,) if init else ("uniform", "all-leaders")
    return _convergence_run(graph_spec, seed, N, window, cap, inits)


def run_leader_creation(graph_spec, seed, N):
    g, params = _setup(graph_spec, N)
    bound = 2 ** N + N
    if seed % 2 == 0:
        init, spec = "no-leader-coherent", FuzzSpec("no-leader-coherent", seed)
    else:
        init, spec = "uniform-leaderless", FuzzSpec("uniform", seed, leaderless=True)
    cfg = generate_config(spec, g, params)
    tracker, inv = LeaderTracker(), InvariantChecker(params)
    incr = TrainIncrementChecker(g, params)
    run(cfg, g, RandomSource.seeded(seed), params, bound - 1, [tracker, inv, incr])
    violations = []
    if cfg.leaders():
        violations.append("initial configuration already has a leader")
    if tracker.first_leader is None:
        violations.append(f"no leader in rounds 0..{bound - 1}")
    violations += incr.violations
    return _row(graph_spec, seed, params, init, "ok" if not violations else "violated",
                tracker.first_leader, violations, inv, incr.events)


MARKED_INITS = ("uniform", "no-leader-coherent", "colliding-marked", "near-overflow")


def _fuzzed(mode, seed, g, params):
    try:
        return mode, generate_config(FuzzSpec(mode, seed), g, params)
    except InfeasibleSpec:
        return "uniform", generate_config(FuzzSpec("uniform", seed), g, params)


def run_marked_vanish(graph_spec, seed, N):
    g, params = _setup(graph_spec, N)
    bound = N + 2 ** N + 2 * N - 2
    init, cfg = _fuzzed(MARKED_INITS[seed % len(MARKED_INITS)], seed, g, params)
    tracker, inv = MarkedTracker(), InvariantChecker(params)
    incr = TrainIncrementChecker(g, params)
    run(cfg, g, RandomSource.forced(0), params, 2 * bound, [tracker, inv, incr])
    violations = []
    if tracker.last_marked is not None and tracker.last_marked >= bound:
        violations.append(f"marked wagon still present at round {tracker.last_marked} >= {bound}")
    violations += incr.violations
    return _row(graph_spec, seed, params, init, "ok" if not violations else "violated",
                tracker.last_marked, violations, inv, incr.events)


TRAIN_INCR_INITS = ("near-overflow", "no-leader-coherent", "uniform", "all-leaders")


def run_train_incr(graph_spec, seed, N, horizon=None, init=None):
    g, params = _setup(graph_spec, N)
    horizon = horizon if horizon is not None else 2 * (2 ** N + N)
    mode = init or TRAIN_INCR_INITS[seed % len(TRAIN_INCR_INITS)]
    init, cfg = _fuzzed(mode, seed, g, params)
    incr, inv = TrainIncrementChecker(g, params), InvariantChecker(params)
    run(cfg, g, RandomSource.seeded(seed), params, horizon, [incr, inv])
    violations = list(incr.violations)
    if init == "near-overflow" and incr.events == 0:
        violations.append("no qualifying round pair observed")
    return _row(graph_spec, seed, params, init, "ok" if not violations else "violated",
                horizon, violations, inv, incr.events)


def run_local_error_purge(graph_spec, seed, N, horizon=200):
    g, params = _setup(graph_spec, N)
    modes = ("uniform", "all-leaders", "no-leader-coherent", "colliding-marked", "near-overflow")
    init, cfg = _fuzzed(modes[seed % len(modes)], seed, g, params)
    inv = InvariantChecker(params)
    run(cfg, g, RandomSource.seeded(seed), params, horizon, [inv])
    violations = list(inv.findings) + (
        [f"... {inv.count - len(inv.findings)} more"] if inv.count > len(inv.findings) else [])
    if inv.budget_violations:
        violations.append(f"{inv.budget_violations} states over the bit budget")
    return _row(graph_spec, seed, params, init, "ok" if not violations else "violated",
                horizon, violations, inv)


def leg_grow_scenario(g: Graph, params: ProtocolParams, seed: int, max_wait: Optional[int] = None):
    """Drive a fuzzed start to a lone marked emission and record the following rounds.

    Returns ``(emitter, emission_round, configs)`` where ``configs[k]`` is
    the configuration ``k`` rounds after the emission, for
    ``k = 0 .. 2*ecc(emitter)+1``.  Raises :class:`CampaignError` when no
    leader is about to start a train within ``max_wait`` rounds.
    """
    N = params.N
    init = "uniform" if seed % 2 == 0 else "all-leaders"
    cfg = generate_config(FuzzSpec(init, seed), g, params)
    # flush adversarial marks: no leader can mark with X forced to 0
    zero = RandomSource.forced(0)
    flush = 2 * N + 2 ** N + 2 * N - 2
    cfg = run(cfg, g, zero, params, flush).final
    max_wait = max_wait if max_wait is not None else 4 * (2 ** N + 2 * N)
    chosen = None
    for _ in range(max_wait):
        wrapping = [v for v in cfg.leaders() if cfg.states[v].L is not None
                    and cfg.states[v].L.idx == N - 1]
        if wrapping and marked_wagon_count(cfg) == 0:
            chosen = wrapping[seed % len(wrapping)]
            break
        cfg = step(cfg, g, zero, params)
    if chosen is None:
        raise CampaignError(f"no leader about to start a train on {g.name} within {max_wait} rounds")
    s = cfg.round
    # X = 1 for one full phase of the chosen leader makes its next train marked
    script = {(r, chosen): 1 for r in range(s, s + N)}
    rng = RandomSource.scripted(script)
    for _ in range(N + 1):
        cfg = step(cfg, g, rng, params)
    emission = cfg.round
    L = cfg.states[chosen].L
    if not (cfg.states[chosen].leader and L.idx == 0 and L.flag == 1):
        raise CampaignError(f"scripted emission failed on {g.name}: {cfg.states[chosen]}")
    configs = [cfg]
    for _ in range(2 * g.eccentricity(chosen) + 1):
        configs.append(step(configs[-1], g, rng, params))
    return chosen, emission, configs


def sweep_allowance(N: int, diameter: int) -> int:
    """Rounds allowed between a lone marked emission and legitimacy."""
    return (2 ** (N + 2) + N) + (2 ** N + 2 * N) + 2 * diameter + 1


def run_leg_grow(graph_spec, seed, N):
    g, params = _setup(graph_spec, N)
    v, emission, configs = leg_grow_scenario(g, params, seed)
    violations = []
    for k, cfg in enumerate(configs):
        violations += [f"k={k}: {p}" for p in leg_grow_problems(cfg, g, params, v, k)]
    final = configs[-1]
    root = is_legitimate(final, g, params)
    if root != v:
        violations.append(f"round {final.round}: not legitimate around emitter {v} (got {root})")
    if len(configs) - 1 > sweep_allowance(N, g.diameter):
        violations.append("legitimacy took longer than the convergence window")
    inv = InvariantChecker(params, from_round=0)
    for cfg in configs:
        inv(cfg)
    return _row(graph_spec, seed, params, "scripted", "converged" if not violations else "violated",
                len(configs) - 1, violations, inv, len(configs))


RUNNERS = {
    "closure": run_closure,
    "leader-creation": run_leader_creation,
    "marked-vanish": run_marked_vanish,
    "train-incr": run_train_incr,
    "leg-grow": run_leg_grow,
    "convergence": run_convergence,
    "local-error-purge": run_local_error_purge,
}


def _task(args):
    suite, graph_spec, seed, N, opts = args
    return RUNNERS[suite](graph_spec, seed, N, **opts)


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def run_campaign(suite: str, graphs: list[str], N: int, runs: int, seed0: int = 0,
                 workers: Optional[int] = None, **opts) -> CampaignReport:
    """Run ``runs`` seeds ``seed0, seed0+1, ...`` of ``suite`` on every graph."""
    if suite not in RUNNERS:
        raise CampaignError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    for spec in graphs:
        _setup(spec, N)
    tasks = [(suite, spec, seed0 + k, N, opts) for spec in graphs for k in range(runs)]
    workers = workers or default_workers()
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_task, tasks))
    else:
        rows = [_task(t) for t in tasks]
    fraction = 0.95 if suite == "convergence" else None
    return CampaignReport(suite, rows, fraction)
