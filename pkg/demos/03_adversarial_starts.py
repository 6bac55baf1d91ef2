"""What the protocol does with hostile initial configurations.

Three adversarial starts on a 3x3 grid:

* trains without any leader, which must produce a leader within 2^N + N rounds;
* marked trains that are two increments from overflowing, which the
  overflow check turns into new leaders;
* arbitrary states under an RNG that never marks, where every marked
  wagon must be gone after N + 2^N + 2N - 2 rounds.
"""

from stabletrains import FuzzSpec, ProtocolParams, RandomSource, generate, generate_config, run
from stabletrains.analysis import min_train_value
from stabletrains.observers import LeaderTracker, MarkedTracker

params = ProtocolParams(5)
N = params.N
graph = generate("grid:3x3")

print("leaderless coherent trains")
for seed in range(5):
    cfg = generate_config(FuzzSpec("no-leader-coherent", seed), graph, params)
    tracker = LeaderTracker()
    run(cfg, graph, RandomSource.seeded(seed), params, 2 ** N + N, [tracker])
    print(f"  seed {seed}: first leader at round {tracker.first_leader} (bound {2 ** N + N})")

print("\nnear-overflow marked trains")
cfg = generate_config(FuzzSpec("near-overflow", 0), graph, params)
seen = []
run(cfg, graph, RandomSource.forced(0), params, 4, [seen.append])
for c in seen:
    print(f"  round {c.round}: min marked train value {min_train_value(c, graph, params, 1)}, "
          f"leaders {c.leaders()}")

print("\nforced-zero RNG from uniform garbage")
for seed in range(5):
    cfg = generate_config(FuzzSpec("uniform", seed), graph, params)
    tracker = MarkedTracker()
    run(cfg, graph, RandomSource.forced(0), params, 100, [tracker])
    print(f"  seed {seed}: last marked wagon at round {tracker.last_marked} "
          f"(bound {N + 2 ** N + 2 * N - 2})")
