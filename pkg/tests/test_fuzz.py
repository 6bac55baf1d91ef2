import pytest

from stabletrains.analysis import extract_trains, marked_wagon_count, min_train_value
from stabletrains.fuzz import MODES, FuzzSpec, InfeasibleSpec, generate_config
from stabletrains.graphs import generate
from stabletrains.protocol import NodeState, ProtocolParams, Wagon, error_breakdown
from stabletrains.records import write_snapshot

P = ProtocolParams(5)
GRAPHS = ["ring:8", "ring:10", "path:8", "grid:3x3", "gnp:8:0.4", "complete:6", "tree:12:4"]


def test_all_leaders_values():
    for spec in GRAPHS:
        cfg = generate_config(FuzzSpec("all-leaders", 3), generate(spec), P)
        for s in cfg.states:
            assert (s.leader, s.F, s.L) == (1, Wagon(0, 1, 0, 0), Wagon(1, 0, 0, 0))


@pytest.mark.parametrize("mode", [m for m in MODES if m != "from-file"])
@pytest.mark.parametrize("spec", GRAPHS)
def test_generation_is_deterministic_and_valid(mode, spec):
    g = generate(spec)
    try:
        a = generate_config(FuzzSpec(mode, 17), g, P)
    except InfeasibleSpec:
        pytest.skip(f"{mode} infeasible on {spec}")
    b = generate_config(FuzzSpec(mode, 17), g, P)
    assert a == b and a.round == 0
    a.check(g, P)


def test_seeds_differ():
    g = generate("ring:8")
    assert generate_config(FuzzSpec("uniform", 1), g, P) != generate_config(FuzzSpec("uniform", 2), g, P)


def test_near_overflow_value():
    for spec in ["path:8", "ring:8", "grid:3x3", "ring:10"]:
        g = generate(spec)
        cfg = generate_config(FuzzSpec("near-overflow", 5, overflow_gap=2), g, P)
        assert min_train_value(cfg, g, P, 1) == 2 ** P.N - 2 == 30
        assert not cfg.leaders()
    g = generate("path:8")
    cfg = generate_config(FuzzSpec("near-overflow", 5, overflow_gap=7), g, P)
    assert min_train_value(cfg, g, P, 1) == 25


@pytest.mark.parametrize("mode, spec", [("colliding-marked", "complete:2"),
                                        ("colliding-marked", "complete:6"),
                                        ("near-overflow", "complete:2")])
def test_infeasible(mode, spec):
    with pytest.raises(InfeasibleSpec):
        generate_config(FuzzSpec(mode, 0), generate(spec), P)


def test_no_leader_coherent_has_trains():
    for spec in GRAPHS:
        g = generate(spec)
        for seed in range(5):
            cfg = generate_config(FuzzSpec("no-leader-coherent", seed), g, P)
            assert not cfg.leaders()
            if g.diameter >= 2:
                assert extract_trains(cfg, g, P)


def test_uniform_leaderless():
    g = generate("ring:8")
    for seed in range(20):
        assert not generate_config(FuzzSpec("uniform", seed, leaderless=True), g, P).leaders()


def test_colliding_marked_fronts():
    g = generate("path:8")
    cfg = generate_config(FuzzSpec("colliding-marked", 0), g, P)
    assert cfg.leaders() == [0, 7]
    assert marked_wagon_count(cfg) == 16
    assert extract_trains(cfg, g, P, flag=1)


def test_from_file_restore(tmp_path):
    g = generate("ring:6")
    cfg = generate_config(FuzzSpec("uniform", 4), g, P)
    f = tmp_path / "snap.jsonl"
    write_snapshot(cfg, f)
    assert generate_config(FuzzSpec.parse(f"from-file:{f}"), g, P) == cfg
    with pytest.raises(InfeasibleSpec):
        generate_config(FuzzSpec("from-file", path=str(f)), generate("ring:7"), P)


def test_spec_parsing():
    assert FuzzSpec.parse("uniform:9") == FuzzSpec("uniform", 9)
    assert FuzzSpec.parse("all-leaders", 4) == FuzzSpec("all-leaders", 4)
    assert FuzzSpec.parse("from-file:/a:b/c.jsonl").path == "/a:b/c.jsonl"
    with pytest.raises(ValueError):
        FuzzSpec.parse("chaos:1")
    with pytest.raises(ValueError):
        FuzzSpec("from-file")


def test_uniform_covers_every_error_predicate():
    g = generate("ring:4")
    seen = set()
    for seed in range(10_000):
        cfg = generate_config(FuzzSpec("uniform", seed), g, P)
        for v in range(g.n):
            flags = error_breakdown(cfg.states[v], cfg.neighbors(g, v), P)
            seen.update(k for k, on in flags.items() if on)
    assert seen == {"err1", "err2", "err3", "err4", "err5",
                    "err_successor", "err_overflow_L", "err_overflow_F"}


def test_uniform_empty_station_rate():
    g = generate("ring:8")
    empties = total = 0
    for seed in range(500):
        for s in generate_config(FuzzSpec("uniform", seed), g, P).states:
            empties += (s.F is None) + (s.L is None)
            total += 2
    # 1/(8N+1) = 1/41 per station; 8000 stations
    assert abs(empties / total - 1 / 41) < 0.01
