"""Per-node, per-round random bits.

Each node draws two raw bits per round; their conjunction is the
Bernoulli(1/4) variable ``X`` consumed by leaders.  In seeded mode the bits
for node ``i`` at round ``t`` come from a stateless hash of ``(seed, i, t)``,
so a run can be replayed, resumed or evaluated in any node order without
perturbing the outcome.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_NODE_MUL = 0xD1B54A32D192ED03
_ROUND_MUL = 0x8CB92BA72F3D8DD7


def splitmix64(x: int) -> int:
    """Finaliser of the SplitMix64 generator."""
    x = (x + _GOLDEN) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def raw_bits(seed: int, node: int, rnd: int) -> tuple[int, int]:
    key = (seed & MASK64) ^ ((node * _NODE_MUL) & MASK64) ^ ((rnd * _ROUND_MUL) & MASK64)
    h = splitmix64(splitmix64(key))
    return h & 1, (h >> 1) & 1


MODES = ("seeded", "zero", "one", "scripted")


@dataclass
class RandomSource:
    """Source of the two raw bits per node and round.

    ``mode`` is one of ``seeded``, ``zero`` (X always 0), ``one`` (X always
    1) or ``scripted``, where ``script`` maps ``(round, node)`` to X and
    unlisted entries draw 0.  ``bits_drawn`` counts every raw bit handed out.
    """

    mode: str = "seeded"
    seed: int = 0
    script: Mapping[tuple[int, int], int] = field(default_factory=dict)
    bits_drawn: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown rng mode {self.mode!r}")

    @classmethod
    def seeded(cls, seed: int) -> "RandomSource":
        return cls("seeded", seed)

    @classmethod
    def forced(cls, x: int) -> "RandomSource":
        return cls("one" if x else "zero")

    @classmethod
    def scripted(cls, script: Mapping[tuple[int, int], int]) -> "RandomSource":
        return cls("scripted", script=dict(script))

    @classmethod
    def from_script_file(cls, path) -> "RandomSource":
        """Read ``round node x`` lines; ``#`` starts a comment."""
        script = {}
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'round node x'")
            rnd, node, x = (int(p) for p in parts)
            if x not in (0, 1):
                raise ValueError(f"{path}:{lineno}: x must be 0 or 1")
            script[(rnd, node)] = x
        return cls.scripted(script)

    def bits(self, node: int, rnd: int) -> tuple[int, int]:
        self.bits_drawn += 2
        if self.mode == "seeded":
            return raw_bits(self.seed, node, rnd)
        if self.mode == "zero":
            return 0, 0
        if self.mode == "one":
            return 1, 1
        x = self.script.get((rnd, node), 0)
        return x, x

    def draw(self, node: int, rnd: int) -> int:
        """The Bernoulli(1/4) variable of ``node`` at round ``rnd``."""
        b1, b2 = self.bits(node, rnd)
        return b1 & b2
