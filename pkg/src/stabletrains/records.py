"""Line-delimited trace, snapshot and report records.

One JSON object per line with a fixed key order.  A configuration record
looks like::

    {"round":3,"nodes":["0,1,0:1:0:0,1:0:0:0","1,0,-,4:1:0:1"],"metrics":{...}}

Each node token is ``rand,leader,F,L`` where a station is ``-`` when empty
and ``idx:bit:carry:flag`` otherwise.  A snapshot file is a configuration
record without metrics; the final line of a simulation trace is a
``{"summary": {...}}`` object.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator, Optional, TextIO

from .engine import Configuration
from .protocol import InvalidState, NodeState, ProtocolParams, Station, Wagon


class RecordError(ValueError):
    """Malformed trace, snapshot or node token."""


def station_token(w: Station) -> str:
    return "-" if w is None else f"{w.idx}:{w.bit}:{w.carry}:{w.flag}"


def node_token(v: NodeState) -> str:
    return f"{v.rand},{v.leader},{station_token(v.F)},{station_token(v.L)}"


def _bit(s: str, what: str) -> int:
    if s not in ("0", "1"):
        raise RecordError(f"{what} must be 0 or 1, got {s!r}")
    return int(s)


def parse_station(tok: str, params: ProtocolParams) -> Station:
    if tok == "-":
        return None
    parts = tok.split(":")
    if len(parts) != 4 or not parts[0].isdigit():
        raise RecordError(f"bad station token {tok!r}")
    w = Wagon(int(parts[0]), _bit(parts[1], "bit"), _bit(parts[2], "carry"), _bit(parts[3], "flag"))
    try:
        w.check(params)
    except InvalidState as exc:
        raise RecordError(str(exc)) from None
    return w


def parse_node_token(tok: str, params: ProtocolParams) -> NodeState:
    parts = tok.split(",")
    if len(parts) != 4:
        raise RecordError(f"bad node token {tok!r}")
    return NodeState(_bit(parts[0], "rand"), _bit(parts[1], "leader"),
                     parse_station(parts[2], params), parse_station(parts[3], params))


def config_record(config: Configuration, metrics: Optional[dict] = None) -> dict:
    rec = {"round": config.round, "nodes": [node_token(s) for s in config.states]}
    if metrics is not None:
        rec["metrics"] = metrics
    return rec


def parse_config_record(rec: dict, params: ProtocolParams) -> Configuration:
    try:
        rnd = rec["round"]
        tokens = rec["nodes"]
    except (KeyError, TypeError):
        raise RecordError("configuration record needs 'round' and 'nodes'") from None
    if not isinstance(rnd, int) or rnd < 0 or not isinstance(tokens, list):
        raise RecordError("bad 'round' or 'nodes' field")
    return Configuration(tuple(parse_node_token(t, params) for t in tokens), rnd)


def dumps(rec: dict) -> str:
    return json.dumps(rec, separators=(",", ":"))


def loads(line: str) -> dict:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise RecordError(f"malformed record: {exc}") from None
    if not isinstance(rec, dict):
        raise RecordError("record is not an object")
    return rec


def iter_records(path) -> Iterator[dict]:
    with open(path) as fh:
        for line in fh:
            if line.strip():
                yield loads(line)


def read_snapshot(path, params: ProtocolParams) -> Configuration:
    """Last configuration record of a snapshot or trace file."""
    last = None
    for rec in iter_records(path):
        if "summary" not in rec:
            last = rec
    if last is None:
        raise RecordError(f"{path}: no configuration record")
    return parse_config_record(last, params)


def write_snapshot(config: Configuration, path) -> None:
    Path(path).write_text(dumps(config_record(config)) + "\n")


def write_records(records: Iterable[dict], fh: TextIO) -> None:
    for rec in records:
        fh.write(dumps(rec) + "\n")
