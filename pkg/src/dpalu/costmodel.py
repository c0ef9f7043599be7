"""Gate counts and redundancy comparisons between the ECC blocks and TMR."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass
from functools import lru_cache

from .blocks import BlockOp, build_block, build_corrector, build_plain_block
from .codec import CodeSpec, hamming
from .netlist import GateKind, Netlist, NetlistBuilder, has_role
from .tmr import build_tmr

UNPROTECTED_ROLES = ("voter", "corrector")


@dataclass
class CostReport:
    label: str
    counts: dict[str, int]
    total: int
    redundant: int
    unprotected_final_stage_gates: int
    unprotected_final_stage_units: int

    def to_dict(self) -> dict:
        return asdict(self)


def _unit_key(tag: str) -> str | None:
    # "replica0/voter:z[3]" -> "replica0/voter:z[3]"; "corrector:x/corrector" -> "corrector:x"
    parts = tag.split("/")
    for i, part in enumerate(parts):
        if part.split(":", 1)[0] in UNPROTECTED_ROLES:
            return "/".join(parts[: i + 1])
    return None


def gate_counts(net: Netlist, label: str = "", baseline_gates: int | None = None) -> CostReport:
    """Per-kind gate counts plus the unprotected (voter / corrector) share.

    ``redundant`` is total minus ``baseline_gates`` (the single-copy unprotected
    block), or 0 when no baseline is given.
    """
    kinds = Counter(g.kind.value for g in net.gates)
    counts = {k.value: kinds.get(k.value, 0) for k in GateKind}
    unprotected = [g for g in net.gates if any(has_role(g.tag, r) for r in UNPROTECTED_ROLES)]
    units = {_unit_key(g.tag) for g in unprotected}
    total = len(net.gates)
    return CostReport(
        label=label,
        counts=counts,
        total=total,
        redundant=total - baseline_gates if baseline_gates is not None else 0,
        unprotected_final_stage_gates=len(unprotected),
        unprotected_final_stage_units=len(units),
    )


def tmr_redundancy(n_bits: int, r: int) -> int:
    """Replicated bit count of an n-bit unit under (2r+1)-modular redundancy."""
    if n_bits < 1 or r < 0:
        raise ValueError("need n_bits >= 1 and r >= 0")
    return (2 * r + 1) * n_bits


def hamming_parity_count(k_bits: int, extended: bool = False) -> int:
    """Minimal h with 2^h >= k + h + 1, plus one for SEC-DED."""
    if k_bits < 1:
        raise ValueError("k_bits must be >= 1")
    h = 1
    while (1 << h) < k_bits + h + 1:
        h += 1
    return h + 1 if extended else h


def bcp_bits(n_bits: int) -> int:
    """Berger check length ceil(log2(n + 1))."""
    if n_bits < 1:
        raise ValueError("n_bits must be >= 1")
    return math.ceil(math.log2(n_bits + 1))


def is_perfect_hamming(n: int, k: int) -> bool:
    """Sphere-packing equality for single-error correction: 2^(n-k) == n + 1."""
    return (1 << (n - k)) == n + 1


# --------------------------------------------------------------------------- architectures


def ecc_pipeline(op: BlockOp, code: CodeSpec) -> Netlist:
    """Protected block followed by one corrector on its output bus."""
    block = build_block(op, code)
    b = NetlistBuilder()
    bindings = {name: b.input(name, width) for name, width in block.input_buses}
    z = b.embed(block, bindings)["z"]
    b.output("z", b.embed(build_corrector(code), {"w": z})["z"])
    return b.build()


def compare_architectures(op: BlockOp, code: CodeSpec, r: int = 1) -> tuple[CostReport, CostReport]:
    """(ECC block + output corrector, TMR of the plain k-bit block)."""
    base = build_plain_block(op, code.k)
    ecc = gate_counts(ecc_pipeline(op, code), f"ecc:{op.value}:{code.label}", len(base.gates))
    tmr = gate_counts(build_tmr(base, r), f"tmr{2 * r + 1}:{op.value}:{code.k}", len(base.gates))
    return ecc, tmr


@lru_cache(maxsize=None)
def _corrector_gates(k: int) -> int:
    return len(build_corrector(hamming(k)).gates)


def adder_bit_cost() -> float:
    """Gates per bit of the plain ripple-carry adder, measured at a wide width."""
    width = 64
    return len(build_plain_block(BlockOp.ADD, width).gates) / width


def crossover_width(r: int = 1, max_width: int = 128) -> int | None:
    """Smallest w such that for every k in [w, max_width] the ECC check cost

        hamming_parity_count(k) + gates(corrector for Hamming(k))

    is below tmr_redundancy(k, r) * (adder gates per bit).  None if no such w.
    The horizon is finite on purpose: corrector size grows like k log k, so the
    inequality eventually flips back for very wide words.
    """
    per_bit = adder_bit_cost()
    w = None
    for k in range(max_width, 0, -1):
        ecc = hamming_parity_count(k) + _corrector_gates(k)
        if ecc < tmr_redundancy(k, r) * per_bit:
            w = k
        else:
            break
    return w


def width_summary(width: int, r: int) -> list[tuple[str, object]]:
    """Rows for the ``cost`` command."""
    rows: list[tuple[str, object]] = [
        ("width", width),
        ("r", r),
        ("TMR redundancy (2r+1)n", tmr_redundancy(width, r)),
        ("SEC parity", hamming_parity_count(width)),
        ("SEC-DED parity", hamming_parity_count(width, extended=True)),
        ("BCP", bcp_bits(width)),
    ]
    code = hamming(width)
    for op in (BlockOp.NAND, BlockOp.ADD):
        base = build_plain_block(op, width)
        ecc = gate_counts(ecc_pipeline(op, code), baseline_gates=len(base.gates))
        tmr = gate_counts(build_tmr(base, r) if r >= 1 else base, baseline_gates=len(base.gates))
        rows += [
            (f"{op.value} plain gates", len(base.gates)),
            (f"{op.value} ECC gates", ecc.total),
            (f"{op.value} TMR gates", tmr.total),
            (f"{op.value} ECC unprotected units", ecc.unprotected_final_stage_units),
            (f"{op.value} TMR unprotected units", tmr.unprotected_final_stage_units),
        ]
    return rows


def format_rows(rows) -> str:
    width = max(len(str(k)) for k, _ in rows)
    return "\n".join(f"{str(k):<{width}}  {v}" for k, v in rows) + "\n"


def format_reports(reports) -> str:
    """Aligned table, one column per report."""
    fields = ["total", "redundant", "unprotected_final_stage_units", "unprotected_final_stage_gates"]
    kinds = [k.value for k in GateKind if any(r.counts[k.value] for r in reports)]
    rows = [("architecture", *[r.label for r in reports])]
    rows += [(f, *[getattr(r, f) for r in reports]) for f in fields]
    rows += [(k, *[r.counts[k] for r in reports]) for k in kinds]
    widths = [max(len(str(row[i])) for row in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(f"{str(c):<{w}}" for c, w in zip(row, widths)).rstrip() for row in rows) + "\n"
