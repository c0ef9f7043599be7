"""Netlist constructors for distance-preserving ALU blocks.

Every protected block takes coded operands on buses ``x`` and ``y`` (width n)
and drives a coded result on ``z`` = ``[d_z | h_z]``.  The common rule is that
each output bit is produced by its own private logic cone: data bit i is the
operation on bit i (or, for the adder, a private adder prefix), and parity bit
j re-computes the operation on exactly the data positions in row j of the
parity matrix and folds them with a private XOR tree.  No gate is shared
between two output bits, so one faulty gate corrupts at most one bit of z.

Bit order is LSB first throughout: data value ``a`` maps to ``x[i] = (a >> i) & 1``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Sequence

from .codec import BINARY_KINDS, HAMMING_FAMILY, CodeKind, CodeSpec, encode, syndrome_table
from .errors import IncompleteOpTable, UnsupportedCode, UnsupportedOp, WidthMismatch
from .netlist import GateKind, Netlist, NetlistBuilder, Wire


class BlockOp(enum.Enum):
    XOR = "xor"
    AND = "and"
    OR = "or"
    NOT = "not"
    NAND = "nand"
    NOR = "nor"
    ADD = "add"
    SUB = "sub"

    @property
    def unary(self) -> bool:
        return self is BlockOp.NOT


BITWISE_OPS = (BlockOp.AND, BlockOp.OR, BlockOp.NAND, BlockOp.NOR, BlockOp.NOT)
_GATE_FOR = {
    BlockOp.XOR: GateKind.XOR,
    BlockOp.AND: GateKind.AND,
    BlockOp.OR: GateKind.OR,
    BlockOp.NAND: GateKind.NAND,
    BlockOp.NOR: GateKind.NOR,
}

OPCODES = ("00", "01", "10", "11")
DEFAULT_OP_TABLE = {"00": BlockOp.XOR, "01": BlockOp.NAND, "10": BlockOp.ADD, "11": BlockOp.NOT}

CORRECTOR_MAX_PARITY = 12


def apply_op(op: BlockOp, a: int, b: int, width: int) -> int:
    """Software reference for one operation on width-bit unsigned operands."""
    mask = (1 << width) - 1
    if op is BlockOp.XOR:
        return a ^ b
    if op is BlockOp.AND:
        return a & b
    if op is BlockOp.OR:
        return a | b
    if op is BlockOp.NAND:
        return ~(a & b) & mask
    if op is BlockOp.NOR:
        return ~(a | b) & mask
    if op is BlockOp.NOT:
        return ~a & mask
    if op is BlockOp.ADD:
        return (a + b) & mask
    return (a - b) & mask


def parse_opcode(key) -> int:
    """'10' -> 2 (written c1 c0); ints pass through."""
    if isinstance(key, int):
        value = key
    elif isinstance(key, str) and len(key) == 2 and set(key) <= {"0", "1"}:
        value = int(key, 2)
    else:
        raise IncompleteOpTable(f"bad opcode {key!r}; use '00'..'11'")
    if not 0 <= value < 4:
        raise IncompleteOpTable(f"opcode {key!r} out of range")
    return value


def normalize_op_table(op_table: Mapping) -> dict[int, BlockOp]:
    table = {}
    for key, op in op_table.items():
        table[parse_opcode(key)] = op if isinstance(op, BlockOp) else BlockOp(str(op).lower())
    missing = [OPCODES[i] for i in range(4) if i not in table]
    if missing:
        raise IncompleteOpTable(f"op table misses opcodes {', '.join(missing)}")
    return table


# --------------------------------------------------------------------------- gate helpers


def _tree(b: NetlistBuilder, kind: GateKind, wires: Sequence[Wire], tag: str = "") -> Wire:
    """Balanced 2-input reduction; a single wire passes through untouched."""
    wires = list(wires)
    if not wires:
        raise ValueError("empty reduction")
    while len(wires) > 1:
        nxt = [b.gate(kind, wires[i], wires[i + 1], tag=tag) for i in range(0, len(wires) - 1, 2)]
        if len(wires) % 2:
            nxt.append(wires[-1])
        wires = nxt
    return wires[0]


def _ripple_sums(b: NetlistBuilder, xs, ys, positions, subtract: bool) -> dict[int, Wire]:
    """A private ripple-carry adder emitting only the sum bits in ``positions``.

    Subtraction adds the bitwise complement of y with carry-in 1.
    """
    positions = set(positions)
    top = max(positions)
    carry = b.gate(GateKind.CONST1) if subtract else None
    sums = {}
    for i in range(top + 1):
        yi = b.gate(GateKind.NOT, ys[i]) if subtract else ys[i]
        if carry is None:
            if i in positions:
                sums[i] = b.gate(GateKind.XOR, xs[i], yi)
            if i < top:
                carry = b.gate(GateKind.AND, xs[i], yi)
            continue
        p = b.gate(GateKind.XOR, xs[i], yi)
        if i in positions:
            sums[i] = b.gate(GateKind.XOR, p, carry)
        if i < top:
            g = b.gate(GateKind.AND, xs[i], yi)
            q = b.gate(GateKind.AND, p, carry)
            carry = b.gate(GateKind.OR, g, q)
    return sums


class _ConeEmitter:
    """Emits the private cone computing one output bit of ``op(x, y)`` under ``code``."""

    def __init__(self, b: NetlistBuilder, code: CodeSpec, xs: Sequence[Wire], ys: Sequence[Wire]):
        self.b = b
        self.code = code
        self.xs = xs
        self.ys = ys
        self._complement_word = None

    @property
    def complement_word(self):
        # NOT(a) = a XOR 1...1 on data, so z = x XOR encode(1...1) on the whole word
        if self._complement_word is None:
            self._complement_word = encode([1] * self.code.k, self.code).units
        return self._complement_word

    def _const(self, bit: int) -> Wire:
        return self.b.gate(GateKind.CONST1 if bit else GateKind.CONST0)

    def _data_op(self, op: BlockOp, i: int) -> Wire:
        b = self.b
        if op is BlockOp.NOT:
            return b.gate(GateKind.XOR, self.xs[i], self._const(1))
        return b.gate(_GATE_FOR[op], self.xs[i], self.ys[i])

    def bit(self, op: BlockOp, pos: int) -> Wire:
        b, code = self.b, self.code
        k = code.k
        if op is BlockOp.XOR:
            return b.gate(GateKind.XOR, self.xs[pos], self.ys[pos])
        if op is BlockOp.NOT:
            return b.gate(GateKind.XOR, self.xs[pos], self._const(self.complement_word[pos]))
        if pos < k:
            if op in (BlockOp.ADD, BlockOp.SUB):
                return _ripple_sums(b, self.xs, self.ys, [pos], op is BlockOp.SUB)[pos]
            return self._data_op(op, pos)
        support = [i for i, bit in enumerate(code.parity_matrix[pos - k]) if bit]
        if not support:
            return self._const(0)
        if op in (BlockOp.ADD, BlockOp.SUB):
            sums = _ripple_sums(b, self.xs, self.ys, support, op is BlockOp.SUB)
            terms = [sums[i] for i in support]
        else:
            terms = [self._data_op(op, i) for i in support]
        return _tree(b, GateKind.XOR, terms)


# --------------------------------------------------------------------------- block constructors


def _require_binary(code: CodeSpec, kinds=BINARY_KINDS) -> None:
    if code.kind not in kinds:
        allowed = "/".join(k.value for k in kinds)
        raise UnsupportedCode(f"{code.label}: {code.kind.value} codes are not supported here (need {allowed})")


def _operand_buses(b: NetlistBuilder, code: CodeSpec, include_input_correctors: bool):
    xs = b.input("x", code.n)
    ys = b.input("y", code.n)
    if include_input_correctors:
        corrector = build_corrector(code)
        xs = b.embed(corrector, {"w": xs}, tag="corrector:x")["z"]
        ys = b.embed(corrector, {"w": ys}, tag="corrector:y")["z"]
    return xs, ys


def _build_coded(op: BlockOp, code: CodeSpec, include_input_correctors: bool) -> Netlist:
    b = NetlistBuilder()
    xs, ys = _operand_buses(b, code, include_input_correctors)
    em = _ConeEmitter(b, code, xs, ys)
    b.output("z", [em.bit(op, pos) for pos in range(code.n)])
    return b.build()


def build_xor_block(code: CodeSpec) -> Netlist:
    """n XOR gates, z[i] = x[i] ^ y[i]; relies only on the code being linear."""
    _require_binary(code)
    return _build_coded(BlockOp.XOR, code, False)


def build_bitwise_block(op: BlockOp, code: CodeSpec, include_input_correctors: bool = False) -> Netlist:
    if op not in BITWISE_OPS:
        raise UnsupportedOp(f"{op.value} is not a bitwise block op (use {', '.join(o.value for o in BITWISE_OPS)})")
    _require_binary(code, HAMMING_FAMILY)
    return _build_coded(op, code, include_input_correctors)


def build_hamming_adder(
    code: CodeSpec, width: int | None = None, subtract: bool = False, include_input_correctors: bool = False
) -> Netlist:
    """Adder (or subtractor) with one private adder prefix per output bit.

    Carry-in is 0 (1 for subtraction) and the carry-out is dropped, so the
    result is modulo 2^width.
    """
    _require_binary(code, HAMMING_FAMILY)
    width = code.k if width is None else width
    if width != code.k:
        raise WidthMismatch(f"adder width {width} does not match {code.label} data length {code.k}")
    return _build_coded(BlockOp.SUB if subtract else BlockOp.ADD, code, include_input_correctors)


def build_bch_bitwise_block(op: BlockOp, code: CodeSpec, include_input_correctors: bool = False) -> Netlist:
    if op not in BITWISE_OPS + (BlockOp.XOR,):
        raise UnsupportedOp(f"{op.value} is not supported on BCH blocks")
    _require_binary(code, (CodeKind.BCH,))
    return _build_coded(op, code, include_input_correctors)


def build_opcode_alu(
    code: CodeSpec, op_table: Mapping | None = None, include_input_correctors: bool = False
) -> Netlist:
    """Four operations selected by the 2-bit control bus ``c`` (c[0] is the LSB).

    Op-code decode and the 4:1 select are replicated inside every output cone,
    so a fault in the control logic still touches a single output bit.
    """
    table = normalize_op_table(DEFAULT_OP_TABLE if op_table is None else op_table)
    _require_binary(code, HAMMING_FAMILY)
    b = NetlistBuilder()
    xs, ys = _operand_buses(b, code, include_input_correctors)
    cs = b.input("c", 2)
    em = _ConeEmitter(b, code, xs, ys)
    outs = []
    for pos in range(code.n):
        cand = {}
        for op in dict.fromkeys(table.values()):
            cand[op] = em.bit(op, pos)
        n0 = b.gate(GateKind.NOT, cs[0])
        n1 = b.gate(GateKind.NOT, cs[1])
        lits = {0: (n0, n1), 1: (cs[0], n1), 2: (n0, cs[1]), 3: (cs[0], cs[1])}
        terms = []
        for opcode in range(4):
            sel = b.gate(GateKind.AND, *lits[opcode])
            terms.append(b.gate(GateKind.AND, sel, cand[table[opcode]]))
        outs.append(_tree(b, GateKind.OR, terms))
    b.output("z", outs)
    return b.build()


def build_corrector(code: CodeSpec) -> Netlist:
    """Syndrome decoder and fix-up: bus ``w`` (received word) -> bus ``z`` (corrected word).

    Syndrome bits are XOR trees over the rows of H = [P | I]; each correctable
    nonzero syndrome gets one AND-tree match gate over syndrome literals; bit p
    is flipped by the OR of the matches whose error pattern contains p.  The
    decoder response per syndrome comes from ``codec.correct``.  All gates are
    tagged ``corrector``: this is the unprotected final stage.
    """
    if code.kind not in BINARY_KINDS:
        raise UnsupportedCode(f"{code.label}: no gate-level corrector for {code.kind.value} codes")
    if code.parity_len > CORRECTOR_MAX_PARITY:
        raise UnsupportedCode(f"{code.label}: {code.parity_len} parity bits is too many for a table corrector")
    tag = "corrector"
    b = NetlistBuilder()
    w = b.input("w", code.n)
    k = code.k
    synd = []
    for j, row in enumerate(code.parity_matrix):
        terms = [w[i] for i, bit in enumerate(row) if bit] + [w[k + j]]
        synd.append(_tree(b, GateKind.XOR, terms, tag=tag))
    inv = [b.gate(GateKind.NOT, s, tag=tag) for s in synd]
    flips: dict[int, list[Wire]] = {p: [] for p in range(code.n)}
    for s, positions in sorted(syndrome_table(code).items()):
        if s == 0 or not positions:
            continue
        lits = [synd[j] if (s >> j) & 1 else inv[j] for j in range(code.parity_len)]
        match = _tree(b, GateKind.AND, lits, tag=tag)
        for p in positions:
            flips[p].append(match)
    outs = []
    for p in range(code.n):
        if not flips[p]:
            outs.append(w[p])
            continue
        fix = _tree(b, GateKind.OR, flips[p], tag=tag)
        outs.append(b.gate(GateKind.XOR, w[p], fix, tag=tag))
    b.output("z", outs)
    return b.build()


# --------------------------------------------------------------------------- unprotected baselines


def build_plain_block(op: BlockOp, width: int) -> Netlist:
    """Unprotected width-bit block (shared carry chain for ADD/SUB); the TMR base."""
    b = NetlistBuilder()
    xs = b.input("x", width)
    ys = b.input("y", width)
    b.output("z", _plain_bits(b, op, xs, ys, width))
    return b.build()


def _plain_bits(b: NetlistBuilder, op: BlockOp, xs, ys, width: int) -> list[Wire]:
    if op in (BlockOp.ADD, BlockOp.SUB):
        sums = _ripple_sums(b, xs, ys, range(width), op is BlockOp.SUB)
        return [sums[i] for i in range(width)]
    if op is BlockOp.NOT:
        return [b.gate(GateKind.NOT, xs[i]) for i in range(width)]
    return [b.gate(_GATE_FOR[op], xs[i], ys[i]) for i in range(width)]


def build_plain_alu(width: int, op_table: Mapping | None = None) -> Netlist:
    """Unprotected op-code ALU: one copy of each op, one shared decoder, per-bit mux."""
    table = normalize_op_table(DEFAULT_OP_TABLE if op_table is None else op_table)
    b = NetlistBuilder()
    xs = b.input("x", width)
    ys = b.input("y", width)
    cs = b.input("c", 2)
    results = {op: _plain_bits(b, op, xs, ys, width) for op in dict.fromkeys(table.values())}
    n0 = b.gate(GateKind.NOT, cs[0])
    n1 = b.gate(GateKind.NOT, cs[1])
    lits = {0: (n0, n1), 1: (cs[0], n1), 2: (n0, cs[1]), 3: (cs[0], cs[1])}
    sel = [b.gate(GateKind.AND, *lits[opcode]) for opcode in range(4)]
    outs = []
    for i in range(width):
        terms = [b.gate(GateKind.AND, sel[opcode], results[table[opcode]][i]) for opcode in range(4)]
        outs.append(_tree(b, GateKind.OR, terms))
    b.output("z", outs)
    return b.build()


# --------------------------------------------------------------------------- dispatch


@dataclass(frozen=True)
class BlockSpec:
    op: BlockOp | str
    code: CodeSpec
    include_input_correctors: bool = False
    op_table: tuple | None = None

    def build(self) -> Netlist:
        if self.op == "alu":
            return build_opcode_alu(self.code, dict(self.op_table or DEFAULT_OP_TABLE), self.include_input_correctors)
        return build_block(self.op, self.code, self.include_input_correctors)


def build_block(op: BlockOp, code: CodeSpec, include_input_correctors: bool = False) -> Netlist:
    """Pick the constructor for ``op`` under ``code``."""
    if code.kind is CodeKind.BCH:
        return build_bch_bitwise_block(op, code, include_input_correctors)
    if op is BlockOp.XOR:
        if include_input_correctors:
            _require_binary(code)
            return _build_coded(op, code, True)
        return build_xor_block(code)
    if op in (BlockOp.ADD, BlockOp.SUB):
        return build_hamming_adder(code, subtract=op is BlockOp.SUB, include_input_correctors=include_input_correctors)
    return build_bitwise_block(op, code, include_input_correctors)

