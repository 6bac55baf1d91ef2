"""Watch one election on a ring of eight nodes.

Every node starts as a leader.  Leaders keep emitting unmarked trains;
once in a while one of them emits a marked train, which strips every
leader it reaches that is still carrying unmarked wagons.  The run stops
after the surviving leader has held a legitimate configuration for 1000
rounds.
"""

from stabletrains import FuzzSpec, ProtocolParams, RandomSource, generate, generate_config, run
from stabletrains.analysis import is_legitimate, layer_table
from stabletrains.observers import ConvergenceDetector

params = ProtocolParams(5)
graph = generate("ring:8")
start = generate_config(FuzzSpec("all-leaders", seed=1), graph, params)

history = []


def leader_count(cfg):
    history.append(len(cfg.leaders()))


detector = ConvergenceDetector(graph, params, window=1000)
result = run(start, graph, RandomSource.seeded(1), params, 1_000_000, [leader_count, detector])

print(f"stopped: {result.reason} at round {result.stop_round}")
print(f"first legitimate round: {detector.first_legitimate}")
drops = [(t, c) for t, c in enumerate(history) if t == 0 or c != history[t - 1]]
print("leader count changes (round, leaders):")
for t, c in drops[:20]:
    print(f"  {t:>6} {c}")

root = is_legitimate(result.final, graph, params)
print(f"\nfinal leader: node {root}")
print("layers around it: one wagon per layer, and the partial train starting at layer k is worth k >> idx")
for row in layer_table(result.final, graph, root, params):
    print(f"  layer {row['layer']:>2}  idx {row['idx']}  value {row['value']}  expected {row['expected']}")
