"""Node states and the per-node transition function of the train protocol.

A node holds two stations, ``F`` (first) and ``L`` (last), each either empty
(``None``) or a :class:`Wagon`.  Wagons with consecutive indices and a common
flag spread across adjacent stations form a *train*, which behaves as a
travelling binary counter.  Leaders emit one wagon per round; a train is
marked (flag 1) with probability ``4**-N`` and marked heads strip leaders
carrying unmarked trains.

Everything here is a pure function of its arguments.  Neighbour views are
plain sequences of :class:`NodeState`; results never depend on their order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

__all__ = [
    "ProtocolParams",
    "Wagon",
    "Station",
    "NodeState",
    "InvalidState",
    "next_index",
    "succ_is_marked",
    "succ_set",
    "add_into",
    "wagon_update",
    "local_error_flags",
    "local_errors",
    "global_error_flags",
    "global_errors",
    "error_breakdown",
    "err",
    "is_eliminated",
    "new_leader",
    "wagon_creation",
    "update_state",
    "state_bit_budget",
    "encode_state",
    "decode_state",
]


class InvalidState(ValueError):
    """Raised when a wagon or node state is outside its encoding domain."""


@dataclass(frozen=True)
class ProtocolParams:
    """Train length ``N`` shared by all nodes."""

    N: int

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 5:
            raise ValueError(f"N must be an integer >= 5, got {self.N!r}")

    @staticmethod
    def min_N_for(n: int) -> int:
        """Smallest train length covering a graph of ``n`` nodes."""
        return max(5, 1 + math.ceil(math.log2(n)))

    def covers(self, n: int) -> bool:
        return self.N >= 1 + math.ceil(math.log2(n))

    def check_graph_size(self, n: int) -> None:
        if not self.covers(n):
            raise ValueError(
                f"N={self.N} is too small for n={n} nodes "
                f"(need N >= {1 + math.ceil(math.log2(n))})"
            )


@dataclass(frozen=True)
class Wagon:
    idx: int
    bit: int = 0
    carry: int = 0
    flag: int = 0

    def __post_init__(self):
        if self.idx < 0:
            raise InvalidState(f"negative wagon index {self.idx}")
        for name in ("bit", "carry", "flag"):
            if getattr(self, name) not in (0, 1):
                raise InvalidState(f"wagon {name} must be 0 or 1")

    def check(self, params: ProtocolParams) -> None:
        if self.idx >= params.N:
            raise InvalidState(f"wagon index {self.idx} >= N={params.N}")

    @property
    def is_head(self) -> bool:
        return self.idx == 0


Station = Optional[Wagon]


@dataclass(frozen=True)
class NodeState:
    rand: int = 0
    leader: int = 0
    F: Station = None
    L: Station = None

    def __post_init__(self):
        if self.rand not in (0, 1) or self.leader not in (0, 1):
            raise InvalidState("rand and leader must be 0 or 1")

    def check(self, params: ProtocolParams) -> None:
        for w in (self.F, self.L):
            if w is not None:
                w.check(params)

    def wagons(self):
        return [w for w in (self.F, self.L) if w is not None]


def next_index(w: Wagon, params: ProtocolParams) -> int:
    return (w.idx + 1) % params.N


def _is_marked_head(w: Station) -> bool:
    return w is not None and w.flag == 1 and w.idx == 0


def succ_is_marked(v: NodeState, nbrs: Sequence[NodeState], params: ProtocolParams) -> bool:
    """True when ``v`` expects its next wagon to be marked."""
    L = v.L
    if L is not None and L.flag == 1 and L.idx != params.N - 1:
        return True
    return any(_is_marked_head(u.F) for u in nbrs)


def succ_set(v: NodeState, nbrs: Sequence[NodeState], marked: bool,
             params: ProtocolParams) -> list[int]:
    """Positions in ``nbrs`` whose F station carries a correct next wagon for ``v``.

    Empty when ``v.L`` is empty.
    """
    L = v.L
    if L is None:
        return []
    nxt = next_index(L, params)
    out = []
    for pos, u in enumerate(nbrs):
        w = u.F
        if w is None:
            continue
        if marked:
            if w.flag == 1 and ((L.flag == 1 and w.idx == nxt) or (L.flag == 0 and w.idx == 0)):
                out.append(pos)
        elif w.flag == 0 and w.idx == nxt:
            out.append(pos)
    return out


def add_into(target: Station, source: Wagon) -> Wagon:
    """Move ``source`` into a station holding ``target``, adding one bit.

    The result carries the source's index and flag.  A head wagon is
    incremented by one; any other wagon absorbs the carry left in the
    target station (an empty target leaves no carry).
    """
    if source.idx == 0:
        s = source.bit + 1
    else:
        s = source.bit + (target.carry if target is not None else 0)
    return Wagon(source.idx, s % 2, int(s == 2), source.flag)


def _best_successor(nbrs: Sequence[NodeState], positions: list[int]) -> Wagon:
    # smallest position among the maximal bits; any maximiser gives the same result
    best = positions[0]
    for pos in positions[1:]:
        if nbrs[pos].F.bit > nbrs[best].F.bit:
            best = pos
    return nbrs[best].F


def wagon_update(v: NodeState, nbrs: Sequence[NodeState],
                 params: ProtocolParams) -> tuple[Station, Wagon]:
    """New ``(F, L)`` stations of a non-leader.

    Requires ``v.L`` non-empty and a non-empty successor set; the transition
    function routes every other case to leader creation first.
    """
    L = v.L
    marked = succ_is_marked(v, nbrs, params)
    if marked and not (L.flag == 1 or L.idx == params.N - 1):
        new_F = None
    else:
        new_F = add_into(v.F, L)
    succ = succ_set(v, nbrs, marked, params)
    if not succ:
        raise ValueError("wagon_update called without a successor")
    new_L = add_into(L, _best_successor(nbrs, succ))
    return new_F, new_L


def local_error_flags(v: NodeState, params: ProtocolParams) -> dict[str, bool]:
    """Individual local error predicates ``err1`` .. ``err5``.

    When ``v.L`` is empty only ``err1`` is evaluated; the rest report False.
    """
    F, L = v.F, v.L
    N = params.N
    if L is None:
        return {"err1": True, "err2": False, "err3": False, "err4": False, "err5": False}
    both = F is not None
    return {
        "err1": False,
        "err2": both and L.idx != (F.idx + 1) % N,
        "err3": both and L.idx != 0 and L.flag != F.flag,
        "err4": F is not None and F.idx == N - 1 and F.carry == 1,
        "err5": L.idx == N - 1 and L.carry == 1,
    }


def local_errors(v: NodeState, params: ProtocolParams) -> bool:
    return any(local_error_flags(v, params).values())


def global_error_flags(v: NodeState, nbrs: Sequence[NodeState],
                       params: ProtocolParams) -> dict[str, bool]:
    """``err_successor``, ``err_overflow_L`` and ``err_overflow_F``; needs ``v.L``."""
    F, L = v.F, v.L
    N = params.N
    marked = succ_is_marked(v, nbrs, params)
    succ = succ_set(v, nbrs, marked, params)
    max_bit = max((nbrs[p].F.bit for p in succ), default=0)
    return {
        "err_successor": not succ,
        "err_overflow_L": (L.idx == N - 2 and L.carry == 1 and bool(succ)
                           and max_bit == 1 and L.flag == int(marked)),
        "err_overflow_F": (F is not None and F.idx == N - 2 and F.carry == 1
                           and L.bit == 1),
    }


def global_errors(v: NodeState, nbrs: Sequence[NodeState], params: ProtocolParams) -> bool:
    return any(global_error_flags(v, nbrs, params).values())


def error_breakdown(v: NodeState, nbrs: Sequence[NodeState],
                    params: ProtocolParams) -> dict[str, bool]:
    """Every error predicate of ``v``, ignoring the leader exemption."""
    flags = local_error_flags(v, params)
    if v.L is not None:
        flags.update(global_error_flags(v, nbrs, params))
    else:
        flags.update(err_successor=False, err_overflow_L=False, err_overflow_F=False)
    return flags


def err(v: NodeState, nbrs: Sequence[NodeState], params: ProtocolParams) -> bool:
    if v.leader:
        return False
    if local_errors(v, params):
        return True
    return global_errors(v, nbrs, params)


def is_eliminated(v: NodeState, nbrs: Sequence[NodeState]) -> bool:
    """A node with an unmarked last wagon that sees a marked head."""
    return v.L is not None and v.L.flag == 0 and any(_is_marked_head(u.F) for u in nbrs)


NEW_LEADER_F = Wagon(0, 1, 0, 0)
NEW_LEADER_L = Wagon(1, 0, 0, 0)


def new_leader(x: int) -> NodeState:
    return NodeState(rand=x, leader=1, F=NEW_LEADER_F, L=NEW_LEADER_L)


def wagon_creation(v: NodeState, x: int, params: ProtocolParams) -> NodeState:
    """Emit the next wagon of a leader and update its random variable.

    A leader with an empty ``L`` (only possible in an initial configuration)
    restarts its emission at a head wagon, as if it had just wrapped.
    """
    L = v.L
    if L is None:
        return NodeState(rand=x, leader=1, F=None, L=Wagon(0, 0, 0, v.rand))
    new_F = add_into(v.F, L)
    if L.idx == params.N - 1:
        return NodeState(rand=x, leader=1, F=new_F, L=Wagon(0, 0, 0, v.rand))
    return NodeState(rand=v.rand * x, leader=1, F=new_F, L=Wagon(L.idx + 1, 0, 0, L.flag))


def update_state(v: NodeState, nbrs: Sequence[NodeState], x: int,
                 params: ProtocolParams) -> NodeState:
    """One synchronous step of node ``v``.

    ``x`` is the node's Bernoulli(1/4) draw for this round; it is only read
    by the leader branches.
    """
    if err(v, nbrs, params):
        return new_leader(x)
    leader = 0 if is_eliminated(v, nbrs) else v.leader
    if leader:
        return wagon_creation(v, x, params)
    new_F, new_L = wagon_update(v, nbrs, params)
    return NodeState(rand=v.rand, leader=0, F=new_F, L=new_L)


# -- compact encoding -------------------------------------------------------

def _idx_bits(params: ProtocolParams) -> int:
    return max(1, math.ceil(math.log2(params.N)))


def state_bit_budget(params: ProtocolParams) -> int:
    """Bits needed per node: two stations (presence, idx, bit, carry, flag) plus rand and leader."""
    return 2 * (_idx_bits(params) + 4) + 2


def _encode_station(w: Station, params: ProtocolParams) -> int:
    if w is None:
        return 0
    w.check(params)
    ib = _idx_bits(params)
    return 1 | (w.idx << 1) | (w.bit << (1 + ib)) | (w.carry << (2 + ib)) | (w.flag << (3 + ib))


def _decode_station(code: int, params: ProtocolParams) -> Station:
    if not code & 1:
        return None
    ib = _idx_bits(params)
    w = Wagon((code >> 1) & ((1 << ib) - 1), (code >> (1 + ib)) & 1,
              (code >> (2 + ib)) & 1, (code >> (3 + ib)) & 1)
    w.check(params)
    return w


def encode_state(v: NodeState, params: ProtocolParams) -> int:
    """Pack a node state into an integer below ``2**state_bit_budget(params)``."""
    sw = _idx_bits(params) + 4
    return (v.rand | (v.leader << 1) | (_encode_station(v.F, params) << 2)
            | (_encode_station(v.L, params) << (2 + sw)))


def decode_state(code: int, params: ProtocolParams) -> NodeState:
    sw = _idx_bits(params) + 4
    if code < 0 or code >> state_bit_budget(params):
        raise InvalidState(f"state code {code} exceeds the bit budget")
    mask = (1 << sw) - 1
    return NodeState(code & 1, (code >> 1) & 1, _decode_station((code >> 2) & mask, params),
                     _decode_station((code >> (2 + sw)) & mask, params))
