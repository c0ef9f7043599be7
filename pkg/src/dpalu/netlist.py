"""Combinational gate netlists: construction, evaluation, fault injection, cones.

A wire is either a gate id (``int``) or a primary input bit (``BusBit``).
Gates are stored in id order and may only read earlier gates, so the gate list
is already a topological order.

Evaluation is bit-parallel: every wire carries a numpy bool vector with one
entry per input pattern, which is what makes exhaustive campaigns cheap.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

import numpy as np

from .errors import MissingInput, NetlistError, ParseError, UnknownGate, WidthMismatch


class GateKind(enum.Enum):
    AND = "AND"
    OR = "OR"
    NOT = "NOT"
    NAND = "NAND"
    NOR = "NOR"
    XOR = "XOR"
    XNOR = "XNOR"
    BUF = "BUF"
    CONST0 = "CONST0"
    CONST1 = "CONST1"

    @property
    def arity(self) -> int:
        if self in (GateKind.CONST0, GateKind.CONST1):
            return 0
        if self in (GateKind.NOT, GateKind.BUF):
            return 1
        return 2


class FaultKind(enum.Enum):
    TRANSIENT_FLIP = "TransientFlip"
    STUCK_AT_0 = "StuckAt0"
    STUCK_AT_1 = "StuckAt1"


ALL_FAULT_KINDS = tuple(FaultKind)


class BusBit(NamedTuple):
    bus: str
    index: int

    def __str__(self):
        return f"{self.bus}[{self.index}]"


Wire = Union[int, BusBit]


def wire_str(w: Wire) -> str:
    return str(w) if isinstance(w, BusBit) else f"g{w}"


@dataclass(frozen=True)
class Gate:
    id: int
    kind: GateKind
    inputs: tuple[Wire, ...]
    # role path such as "replica1/voter:z[3]"; empty for ordinary logic
    tag: str = ""

    def has_role(self, role: str) -> bool:
        return has_role(self.tag, role)


def has_role(tag: str, role: str) -> bool:
    return any(part.split(":", 1)[0] == role for part in tag.split("/") if part)


@dataclass(frozen=True)
class FaultSpec:
    target: int
    kind: FaultKind = FaultKind.TRANSIENT_FLIP


@dataclass(frozen=True)
class Netlist:
    input_buses: tuple[tuple[str, int], ...]
    gates: tuple[Gate, ...]
    output_buses: tuple[tuple[str, tuple[Wire, ...]], ...]

    def __post_init__(self):
        widths = {}
        for name, width in self.input_buses:
            if name in widths:
                raise NetlistError(f"duplicate input bus {name!r}")
            if width < 1:
                raise NetlistError(f"input bus {name!r} has width {width}")
            widths[name] = width

        def check(w, limit, where):
            if isinstance(w, BusBit):
                if w.bus not in widths or not 0 <= w.index < widths[w.bus]:
                    raise NetlistError(f"{where}: unknown input bit {w}")
            elif not (isinstance(w, int) and 0 <= w < limit):
                raise NetlistError(f"{where}: reference to g{w} is not an earlier gate")

        for pos, gate in enumerate(self.gates):
            if gate.id != pos:
                raise NetlistError(f"gate ids must be dense and ascending (found {gate.id} at {pos})")
            if len(gate.inputs) != gate.kind.arity:
                raise NetlistError(f"g{gate.id}: {gate.kind.value} takes {gate.kind.arity} inputs")
            for w in gate.inputs:
                check(w, pos, f"g{gate.id}")
        names = set()
        for name, wires in self.output_buses:
            if name in names:
                raise NetlistError(f"duplicate output bus {name!r}")
            names.add(name)
            for w in wires:
                check(w, len(self.gates), f"output {name}")

    @property
    def inputs(self) -> dict[str, int]:
        return dict(self.input_buses)

    @property
    def outputs(self) -> dict[str, tuple[Wire, ...]]:
        return dict(self.output_buses)

    def __len__(self):
        return len(self.gates)

    def gate_ids(self, roles: Iterable[str] = (), exclude: Iterable[str] = ()) -> list[int]:
        """Gates carrying any of ``roles`` (all gates if empty), minus ``exclude`` roles."""
        roles, exclude = tuple(roles), tuple(exclude)
        out = []
        for g in self.gates:
            if roles and not any(g.has_role(r) for r in roles):
                continue
            if any(g.has_role(r) for r in exclude):
                continue
            out.append(g.id)
        return out

    @cached_property
    def simulator(self) -> "Simulator":
        return Simulator(self)

    @cached_property
    def cones(self) -> dict[int, frozenset[BusBit]]:
        return output_cones(self)


class NetlistBuilder:
    def __init__(self):
        self._inputs: dict[str, int] = {}
        self._gates: list[Gate] = []
        self._outputs: dict[str, tuple[Wire, ...]] = {}

    def input(self, name: str, width: int) -> list[BusBit]:
        if name in self._inputs:
            raise NetlistError(f"duplicate input bus {name!r}")
        self._inputs[name] = width
        return [BusBit(name, i) for i in range(width)]

    def gate(self, kind: GateKind, *srcs: Wire, tag: str = "") -> int:
        gid = len(self._gates)
        self._gates.append(Gate(gid, kind, tuple(srcs), tag))
        return gid

    def output(self, name: str, wires: Sequence[Wire]) -> None:
        if name in self._outputs:
            raise NetlistError(f"duplicate output bus {name!r}")
        self._outputs[name] = tuple(wires)

    def embed(self, net: Netlist, bindings: Mapping[str, Sequence[Wire]], tag: str = "") -> dict[str, list[Wire]]:
        """Copy ``net`` in, wiring its input buses to ``bindings``; returns its output wires."""
        remap: dict[int, int] = {}

        def resolve(w):
            if isinstance(w, BusBit):
                try:
                    return bindings[w.bus][w.index]
                except KeyError:
                    raise MissingInput(f"no binding for input bus {w.bus!r}") from None
            return remap[w]

        for name, width in net.input_buses:
            if name not in bindings:
                raise MissingInput(f"no binding for input bus {name!r}")
            if len(bindings[name]) != width:
                raise WidthMismatch(f"bus {name!r} is {width} wide, binding has {len(bindings[name])}")
        for g in net.gates:
            new_tag = "/".join(p for p in (tag, g.tag) if p)
            remap[g.id] = self.gate(g.kind, *(resolve(w) for w in g.inputs), tag=new_tag)
        return {name: [resolve(w) for w in wires] for name, wires in net.output_buses}

    def build(self) -> Netlist:
        return Netlist(tuple(self._inputs.items()), tuple(self._gates), tuple(self._outputs.items()))


# --------------------------------------------------------------------------- simulation


def _and(v, s, B):
    return v[s[0]] & v[s[1]]


def _or(v, s, B):
    return v[s[0]] | v[s[1]]


def _not(v, s, B):
    return ~v[s[0]]


def _nand(v, s, B):
    return ~(v[s[0]] & v[s[1]])


def _nor(v, s, B):
    return ~(v[s[0]] | v[s[1]])


def _xor(v, s, B):
    return v[s[0]] ^ v[s[1]]


def _xnor(v, s, B):
    return ~(v[s[0]] ^ v[s[1]])


def _buf(v, s, B):
    return v[s[0]]


def _const0(v, s, B):
    return np.zeros(B, dtype=bool)


def _const1(v, s, B):
    return np.ones(B, dtype=bool)


_EVAL = {
    GateKind.AND: _and,
    GateKind.OR: _or,
    GateKind.NOT: _not,
    GateKind.NAND: _nand,
    GateKind.NOR: _nor,
    GateKind.XOR: _xor,
    GateKind.XNOR: _xnor,
    GateKind.BUF: _buf,
    GateKind.CONST0: _const0,
    GateKind.CONST1: _const1,
}

# gate id -> [(kind, mask or None)]; a None mask faults every pattern in the batch
FaultMap = Mapping[int, Sequence[tuple[FaultKind, "np.ndarray | None"]]]


def _apply_fault(v: np.ndarray, kind: FaultKind, mask) -> np.ndarray:
    if kind is FaultKind.TRANSIENT_FLIP:
        return ~v if mask is None else v ^ mask
    if kind is FaultKind.STUCK_AT_0:
        return np.zeros_like(v) if mask is None else v & ~mask
    return np.ones_like(v) if mask is None else v | mask


class Simulator:
    """Compiled form of a netlist for batch evaluation."""

    def __init__(self, net: Netlist):
        self.net = net
        self.bus_offset: dict[str, int] = {}
        offset = 0
        for name, width in net.input_buses:
            self.bus_offset[name] = offset
            offset += width
        self.n_inputs = offset
        self.ops = [(_EVAL[g.kind], tuple(self.index(w) for w in g.inputs)) for g in net.gates]
        self.out_index = {name: [self.index(w) for w in wires] for name, wires in net.output_buses}
        consumers: list[list[int]] = [[] for _ in net.gates]
        for g in net.gates:
            for w in g.inputs:
                if isinstance(w, int):
                    consumers[w].append(g.id)
        self._consumers = consumers
        self._fanout: dict[int, frozenset[int]] = {}

    def index(self, w: Wire) -> int:
        if isinstance(w, BusBit):
            return self.bus_offset[w.bus] + w.index
        return self.n_inputs + w

    def fanout(self, gid: int) -> frozenset[int]:
        """The gate itself plus every gate transitively reading it."""
        if gid not in self._fanout:
            seen = {gid}
            stack = [gid]
            while stack:
                for c in self._consumers[stack.pop()]:
                    if c not in seen:
                        seen.add(c)
                        stack.append(c)
            self._fanout[gid] = frozenset(seen)
        return self._fanout[gid]

    def run(self, inputs: Mapping[str, np.ndarray], faults: FaultMap | None = None, golden=None) -> list:
        """Evaluate all wires.

        ``inputs`` maps bus name to a (batch, width) bool array.  With ``golden``
        (a previous fault-free run over the same inputs) only the fanout of the
        faulted gates is recomputed.
        """
        if golden is not None:
            if not faults:
                return golden
            values = list(golden)
            order = sorted(set().union(*(self.fanout(g) for g in faults)))
            batch = len(golden[0]) if golden else 0
        else:
            values = [None] * (self.n_inputs + len(self.ops))
            batch = None
            for name, width in self.net.input_buses:
                if name not in inputs:
                    raise MissingInput(f"input bus {name!r} not assigned")
                arr = np.asarray(inputs[name], dtype=bool)
                if arr.ndim != 2 or arr.shape[1] != width:
                    raise WidthMismatch(f"bus {name!r} expects width {width}, got shape {arr.shape}")
                if batch is None:
                    batch = arr.shape[0]
                elif arr.shape[0] != batch:
                    raise WidthMismatch("input buses disagree on batch size")
                off = self.bus_offset[name]
                for i in range(width):
                    values[off + i] = arr[:, i]
            order = range(len(self.ops))
            if batch is None:
                batch = 1
        n_in = self.n_inputs
        ops = self.ops
        for g in order:
            fn, srcs = ops[g]
            v = fn(values, srcs, batch)
            if faults and g in faults:
                for kind, mask in faults[g]:
                    v = _apply_fault(v, kind, mask)
            values[n_in + g] = v
        return values

    def outputs(self, values) -> dict[str, np.ndarray]:
        """(batch, width) bool arrays per output bus."""
        out = {}
        for name, idx in self.out_index.items():
            if idx:
                out[name] = np.stack([values[i] for i in idx], axis=1)
            else:
                out[name] = np.zeros((len(values[0]) if values else 0, 0), dtype=bool)
        return out


def _check_faults(net: Netlist, faults: Iterable[FaultSpec]) -> dict[int, list]:
    fmap: dict[int, list] = {}
    for f in faults:
        if not (isinstance(f.target, int) and 0 <= f.target < len(net.gates)):
            raise UnknownGate(f"fault target g{f.target} is not a gate")
        fmap.setdefault(f.target, []).append((f.kind, None))
    return fmap


def _assignment_arrays(net: Netlist, inputs: Mapping[str, Sequence[int]]) -> dict[str, np.ndarray]:
    arrays = {}
    for name, width in net.input_buses:
        if name not in inputs:
            raise MissingInput(f"input bus {name!r} not assigned")
        bits = list(inputs[name])
        if len(bits) != width:
            raise WidthMismatch(f"bus {name!r} expects {width} bits, got {len(bits)}")
        arrays[name] = np.array([bits], dtype=bool)
    return arrays


def evaluate(net: Netlist, inputs: Mapping[str, Sequence[int]]) -> dict[str, list[int]]:
    """Evaluate one assignment; buses are bit lists, LSB first."""
    return evaluate_with_faults(net, inputs, ())


def evaluate_with_faults(
    net: Netlist, inputs: Mapping[str, Sequence[int]], faults: Iterable[FaultSpec]
) -> dict[str, list[int]]:
    fmap = _check_faults(net, faults)
    sim = net.simulator
    values = sim.run(_assignment_arrays(net, inputs), fmap)
    return {name: [int(b) for b in arr[0]] for name, arr in sim.outputs(values).items()}


# --------------------------------------------------------------------------- cones


def output_cones(net: Netlist) -> dict[int, frozenset[BusBit]]:
    """Primary output bits transitively reachable from each gate."""
    cones: list[set] = [set() for _ in net.gates]
    for name, wires in net.output_buses:
        for i, w in enumerate(wires):
            if isinstance(w, int):
                cones[w].add(BusBit(name, i))
    for g in reversed(net.gates):
        for w in g.inputs:
            if isinstance(w, int):
                cones[w] |= cones[g.id]
    return {g: frozenset(c) for g, c in enumerate(cones)}


def check_cone_disjointness(net: Netlist, ignore_roles: Iterable[str] = ()) -> list[tuple[int, frozenset[BusBit]]]:
    """Gates whose output reaches two or more primary output bits."""
    ignore_roles = tuple(ignore_roles)
    cones = net.cones
    return [
        (g.id, cones[g.id])
        for g in net.gates
        if len(cones[g.id]) >= 2 and not any(g.has_role(r) for r in ignore_roles)
    ]


# --------------------------------------------------------------------------- text format

_BUS_BIT = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\[(\d+)\]$")
_GATE_REF = re.compile(r"^g(\d+)$")
_TAG = re.compile(r"^\s*@(\S+)\s*$")


def serialize(net: Netlist) -> str:
    lines = []
    for name, width in net.input_buses:
        lines.append(f"input {name} {width}")
    for g in net.gates:
        line = " ".join(["gate", str(g.id), g.kind.value] + [wire_str(w) for w in g.inputs])
        if g.tag:
            line += f"  # @{g.tag}"
        lines.append(line)
    for name, wires in net.output_buses:
        lines.append(" ".join(["output", name] + [wire_str(w) for w in wires]))
    return "\n".join(lines) + "\n"


def parse(text: str) -> Netlist:
    """Inverse of ``serialize``.  A trailing ``# @tag`` comment on a gate line sets its tag."""
    inputs: list[tuple[str, int]] = []
    widths: dict[str, int] = {}
    gates: list[Gate] = []
    outputs: list[tuple[str, tuple[Wire, ...]]] = []

    def src(tok: str, lineno: int) -> Wire:
        m = _GATE_REF.match(tok)
        if m:
            gid = int(m.group(1))
            if gid >= len(gates):
                raise ParseError(f"line {lineno}: forward reference {tok}")
            return gid
        m = _BUS_BIT.match(tok)
        if m:
            name, idx = m.group(1), int(m.group(2))
            if name not in widths or idx >= widths[name]:
                raise ParseError(f"line {lineno}: unknown input bit {tok}")
            return BusBit(name, idx)
        raise ParseError(f"line {lineno}: bad wire reference {tok!r}")

    for lineno, raw in enumerate(text.splitlines(), 1):
        body, _, comment = raw.partition("#")
        toks = body.split()
        if not toks:
            continue
        head = toks[0]
        if head == "input":
            if len(toks) != 3 or not toks[2].isdigit():
                raise ParseError(f"line {lineno}: expected 'input <bus> <width>'")
            if gates or outputs:
                raise ParseError(f"line {lineno}: inputs must precede gates and outputs")
            name = toks[1]
            if not re.match(r"^[A-Za-z_][A-Za-z0-9_]*$", name) or _GATE_REF.match(name):
                raise ParseError(f"line {lineno}: bad bus name {name!r}")
            if name in widths:
                raise ParseError(f"line {lineno}: duplicate input bus {name!r}")
            widths[name] = int(toks[2])
            inputs.append((name, int(toks[2])))
        elif head == "gate":
            if len(toks) < 3 or not toks[1].isdigit():
                raise ParseError(f"line {lineno}: expected 'gate <id> <KIND> <src>...'")
            gid = int(toks[1])
            if gid != len(gates):
                raise ParseError(f"line {lineno}: gate id {gid} out of sequence (expected {len(gates)})")
            try:
                kind = GateKind(toks[2])
            except ValueError:
                raise ParseError(f"line {lineno}: unknown gate kind {toks[2]!r}") from None
            srcs = tuple(src(t, lineno) for t in toks[3:])
            if len(srcs) != kind.arity:
                raise ParseError(f"line {lineno}: {kind.value} takes {kind.arity} inputs")
            m = _TAG.match(comment)
            gates.append(Gate(gid, kind, srcs, m.group(1) if m else ""))
        elif head == "output":
            if len(toks) < 2:
                raise ParseError(f"line {lineno}: expected 'output <bus> <src>...'")
            outputs.append((toks[1], tuple(src(t, lineno) for t in toks[2:])))
        else:
            raise ParseError(f"line {lineno}: unknown directive {head!r}")
    try:
        return Netlist(tuple(inputs), tuple(gates), tuple(outputs))
    except NetlistError as exc:
        raise ParseError(str(exc)) from None


def load(path) -> Netlist:
    with open(path) as fh:
        return parse(fh.read())


def save(net: Netlist, path) -> None:
    with open(path, "w") as fh:
        fh.write(serialize(net))
