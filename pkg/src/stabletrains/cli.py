"""``stabletrains`` command line: simulate, check and campaign.

Exit codes: 0 converged / legitimate / campaign clean, 1 usage or I/O
error, 2 round cap reached, 3 snapshot not legitimate, 4 campaign
violations.
"""

from __future__ import annotations

import argparse
import sys
from contextlib import ExitStack
from typing import Optional, Sequence

from .analysis import is_legitimate, layer_table, legitimacy_problems, marked_wagon_count
from .campaigns import SUITES, CampaignError, run_campaign
from .engine import RunError, run
from .fuzz import FuzzSpec, InfeasibleSpec, generate_config
from .graphs import GraphError, generate
from .observers import ConvergenceDetector, MarkedTracker, TraceWriter
from .protocol import InvalidState, ProtocolParams
from .records import RecordError, dumps, read_snapshot
from .rng import RandomSource

EXIT_OK, EXIT_ERROR, EXIT_CAP, EXIT_NOT_LEGITIMATE, EXIT_VIOLATIONS = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which here means "round cap"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _params(bign: int, n: int, allow_small: bool = False) -> tuple[ProtocolParams, bool]:
    try:
        params = ProtocolParams(bign)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not params.covers(n):
        if not allow_small:
            raise UsageError(
                f"--bign {bign} is below 1+ceil(log2 n) for n={n}; pass --allow-small-N to run anyway")
        return params, False
    return params, True


def _rng(text: str, seed: int) -> RandomSource:
    if text == "seeded":
        return RandomSource.seeded(seed)
    if text in ("zero", "one"):
        return RandomSource.forced(int(text == "one"))
    if text.startswith("script:"):
        return RandomSource.from_script_file(text[len("script:"):])
    raise UsageError(f"bad --rng {text!r}; use seeded, zero, one or script:PATH")


def cmd_simulate(args) -> int:
    g = generate(args.graph)
    params, in_regime = _params(args.bign, g.n, args.allow_small_N)
    spec = FuzzSpec.parse(args.init, args.seed)
    rng = _rng(args.rng, args.seed)
    if args.max_rounds < 0:
        raise UsageError("--max-rounds must be non-negative")
    cfg = generate_config(spec, g, params)
    detector = ConvergenceDetector(g, params, args.verify_window)
    marked = MarkedTracker()
    with ExitStack() as stack:
        trace = stack.enter_context(open(args.trace, "w")) if args.trace else None
        metrics = stack.enter_context(open(args.metrics, "w")) if args.metrics else None
        writer = TraceWriter(trace, g, params, metrics_fh=metrics)
        res = run(cfg, g, rng, params, args.max_rounds, [writer, detector, marked])
        final = res.final
        leader = is_legitimate(final, g, params)
        summary = {
            "reason": res.reason,
            "stop_round": res.stop_round,
            "legitimate": leader is not None,
            "leader": leader,
            "leader_count": len(final.leaders()),
            "first_legitimate": detector.first_legitimate,
            "closure_violations": len(detector.violations),
            "marked_wagon_count": marked_wagon_count(final),
            "marked_free_from": 0 if marked.last_marked is None else marked.last_marked + 1,
            "bits_drawn": res.bits_drawn,
            "oversized_tokens": writer.oversized_tokens,
            "graph": args.graph,
            "n": g.n,
            "N": params.N,
            "seed": args.seed,
            "init": args.init,
            "rng": args.rng,
            "regime": "in-regime" if in_regime else "out-of-regime",
        }
        line = dumps({"summary": summary})
        if trace is not None:
            trace.write(line + "\n")
    print(line)
    return EXIT_OK if res.reason == "converged" else EXIT_CAP


def cmd_check(args) -> int:
    g = generate(args.graph)
    params, _ = _params(args.bign, g.n, allow_small=True)
    cfg = read_snapshot(args.snapshot, params)
    if cfg.n != g.n:
        raise UsageError(f"snapshot has {cfg.n} nodes but {args.graph} has {g.n}")
    cfg.check(g, params)
    root, problems = legitimacy_problems(cfg, g, params)
    if problems:
        print("not legitimate")
        for p in problems:
            print(f"  {p}")
        return EXIT_NOT_LEGITIMATE
    print(f"legitimate, leader {root}")
    print(f"{'layer':>5} {'idx':>3} {'flag':>4} {'value':>5} {'expected':>8}")
    for row in layer_table(cfg, g, root, params):
        cells = ["-" if row[k] is None else str(row[k]) for k in ("layer", "idx", "flag", "value", "expected")]
        print(f"{cells[0]:>5} {cells[1]:>3} {cells[2]:>4} {cells[3]:>5} {cells[4]:>8}")
    return EXIT_OK


def cmd_campaign(args) -> int:
    graphs = [s for s in args.graphs.split(",") if s]
    if not graphs:
        raise UsageError("--graphs needs at least one graph spec")
    report = run_campaign(args.suite, graphs, args.bign, args.runs, args.seed, args.workers)
    if args.report:
        report.write(args.report)
    print(dumps({"summary": report.summary()}))
    return EXIT_OK if report.passed else EXIT_VIOLATIONS


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="stabletrains", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run one simulation")
    s.add_argument("--graph", required=True)
    s.add_argument("--bign", type=int, default=5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--init", default="uniform", help="MODE[:SEED] or from-file:PATH")
    s.add_argument("--max-rounds", type=int, default=1_000_000)
    s.add_argument("--trace")
    s.add_argument("--metrics")
    s.add_argument("--rng", default="seeded", help="seeded, zero, one or script:PATH")
    s.add_argument("--verify-window", type=int, default=1000)
    s.add_argument("--allow-small-N", action="store_true")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("check", help="check a snapshot for legitimacy")
    c.add_argument("--snapshot", required=True)
    c.add_argument("--graph", required=True)
    c.add_argument("--bign", type=int, default=5)
    c.set_defaults(func=cmd_check)

    k = sub.add_parser("campaign", help="run a verification suite")
    k.add_argument("--suite", required=True, choices=SUITES)
    k.add_argument("--graphs", required=True, help="comma-separated graph specs")
    k.add_argument("--bign", type=int, default=5)
    k.add_argument("--runs", type=int, default=10)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--report")
    k.add_argument("--workers", type=int, default=None)
    k.set_defaults(func=cmd_campaign)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, GraphError, RecordError, InvalidState, InfeasibleSpec, CampaignError,
            RunError, OSError, ValueError) as exc:
        print(f"stabletrains: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
