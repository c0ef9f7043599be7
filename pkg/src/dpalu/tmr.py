"""(2r+1)-modular redundancy with gate-level majority voters."""

from __future__ import annotations

from itertools import combinations
from typing import Sequence

from .blocks import _tree
from .errors import EvenLength
from .netlist import GateKind, Netlist, NetlistBuilder, Wire


def vote(values: Sequence[int]) -> int:
    if len(values) < 3 or len(values) % 2 == 0:
        raise EvenLength(f"majority vote needs an odd number (>= 3) of inputs, got {len(values)}")
    return int(2 * sum(1 for v in values if v) > len(values))


def _majority(b: NetlistBuilder, votes: Sequence[Wire], r: int, tag: str) -> Wire:
    # OR over every (r+1)-subset of AND terms; r=1 gives ab + ac + bc
    terms = [_tree(b, GateKind.AND, subset, tag=tag) for subset in combinations(votes, r + 1)]
    return _tree(b, GateKind.OR, terms, tag=tag)


def build_tmr(base: Netlist, r: int = 1) -> Netlist:
    """2r+1 disjoint copies of ``base`` sharing its input buses, voted per output bit.

    Replica gates are tagged ``replica<i>``; voter gates ``voter:<bus>[<bit>]``.
    """
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    b = NetlistBuilder()
    bindings = {name: b.input(name, width) for name, width in base.input_buses}
    replicas = [b.embed(base, bindings, tag=f"replica{i}") for i in range(2 * r + 1)]
    for name, wires in base.output_buses:
        outs = []
        for i in range(len(wires)):
            outs.append(_majority(b, [rep[name][i] for rep in replicas], r, tag=f"voter:{name}[{i}]"))
        b.output(name, outs)
    return b.build()
