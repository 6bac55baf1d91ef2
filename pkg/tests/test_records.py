import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stabletrains.engine import Configuration
from stabletrains.protocol import NodeState, ProtocolParams, Wagon
from stabletrains.records import (
    RecordError, config_record, dumps, loads, node_token, parse_config_record, parse_node_token,
    read_snapshot, write_snapshot,
)

P = ProtocolParams(5)

stations = st.one_of(st.none(), st.builds(Wagon, st.integers(0, 4), st.integers(0, 1),
                                          st.integers(0, 1), st.integers(0, 1)))
node_states = st.builds(NodeState, st.integers(0, 1), st.integers(0, 1), stations, stations)


def test_token_grammar():
    s = NodeState(0, 1, Wagon(0, 1, 0, 0), None)
    assert node_token(s) == "0,1,0:1:0:0,-"
    assert parse_node_token("1,0,-,4:1:0:1", P) == NodeState(1, 0, None, Wagon(4, 1, 0, 1))


@settings(max_examples=200)
@given(st.lists(node_states, min_size=1, max_size=12), st.integers(0, 10**9))
def test_record_roundtrip(states, rnd):
    cfg = Configuration(tuple(states), rnd)
    line = dumps(config_record(cfg))
    assert parse_config_record(loads(line), P) == cfg
    assert dumps(config_record(parse_config_record(loads(line), P))) == line


def test_fixed_key_order():
    cfg = Configuration((NodeState(0, 0, None, None),) * 2, 3)
    line = dumps(config_record(cfg, {"b": 1, "a": 2}))
    assert line == '{"round":3,"nodes":["0,0,-,-","0,0,-,-"],"metrics":{"b":1,"a":2}}'


@pytest.mark.parametrize("tok", [
    "0,1,0:1:0:0",        # missing station
    "2,0,-,-",            # rand out of range
    "0,0,5:0:0:0,-",      # idx >= N
    "0,0,1:0:0,-",        # short station
    "0,0,x:0:0:0,-",
    "0,0,1:0:2:0,-",
])
def test_bad_tokens(tok):
    with pytest.raises(RecordError):
        parse_node_token(tok, P)


@pytest.mark.parametrize("line", ["{", "[1,2]", '{"round":-1,"nodes":[]}', '{"nodes":[]}'])
def test_bad_records(line):
    with pytest.raises(RecordError):
        parse_config_record(loads(line), P)


def test_snapshot_skips_summary(tmp_path):
    cfg = Configuration((NodeState(1, 1, Wagon(0, 1), Wagon(1)),) * 3, 17)
    f = tmp_path / "snap.jsonl"
    write_snapshot(cfg, f)
    with open(f, "a") as fh:
        fh.write(json.dumps({"summary": {"reason": "cap"}}) + "\n")
    assert read_snapshot(f, P) == cfg
    (tmp_path / "empty").write_text("")
    with pytest.raises(RecordError):
        read_snapshot(tmp_path / "empty", P)
