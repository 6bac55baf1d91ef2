"""A marked train sweeping outward from a single emitter.

The leg-grow scenario: after a forced-zero flush, one leader is made to
draw X = 1 for a full phase so that its next train is marked.  Each
round after the emission, the layers around the emitter up to the marked
head are exact, and no other leader survives within reach of the head.
"""

from stabletrains import ProtocolParams, generate
from stabletrains.analysis import layer_wagon, layers, leg_grow_problems
from stabletrains.campaigns import leg_grow_scenario

params = ProtocolParams(5)
graph = generate("path:8")
emitter, emission, configs = leg_grow_scenario(graph, params, seed=3)
print(f"node {emitter} emitted a marked head at round {emission}\n")


def glyph(layer):
    w = layer_wagon(layer)
    if w is None:
        return " ~ " if any(s is not None for s in layer) else " . "
    return f"{w.idx}{'*' if w.flag else ' '}{w.bit}"


for k, cfg in enumerate(configs):
    row = " ".join(glyph(layer) for layer in layers(cfg, graph, emitter))
    leaders = cfg.leaders()
    status = "ok" if not leg_grow_problems(cfg, graph, params, emitter, k) else "BROKEN"
    print(f"k={k:>2}  leaders={leaders!s:<14} {row}  {status}")

print("\nEach cell is one layer (L then F per distance): idx, '*' if marked, bit.")
print("'~' is a layer whose stations disagree, '.' an empty one.")
