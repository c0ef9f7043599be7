import itertools

import numpy as np
import pytest

from dpalu.blocks import (
    DEFAULT_OP_TABLE, BlockOp, BlockSpec, apply_op, build_bch_bitwise_block, build_block, build_corrector,
    build_hamming_adder, build_opcode_alu, build_plain_alu, build_plain_block, normalize_op_table, parse_opcode,
)
from dpalu.codec import correct, encode, get_code, int_to_bits, Uncorrectable
from dpalu.errors import IncompleteOpTable, UnsupportedCode, UnsupportedOp
from dpalu.netlist import check_cone_disjointness, evaluate

H74 = get_code("hamming7_4")
EH84 = get_code("exthamming8_4")
BCH15 = get_code("bch15_7")

# independent reference, written out per op
REF = {
    BlockOp.XOR: lambda a, b, m: a ^ b,
    BlockOp.AND: lambda a, b, m: a & b,
    BlockOp.OR: lambda a, b, m: a | b,
    BlockOp.NAND: lambda a, b, m: m ^ (a & b),
    BlockOp.NOR: lambda a, b, m: m ^ (a | b),
    BlockOp.NOT: lambda a, b, m: m ^ a,
    BlockOp.ADD: lambda a, b, m: (a + b) % (m + 1),
    BlockOp.SUB: lambda a, b, m: (a - b) % (m + 1),
}


def enc(a, code):
    return list(encode(int_to_bits(a, code.k), code).units)


def batch_eval(net, code, pairs, extra=None):
    sim = net.simulator
    xs = np.array([enc(a, code) for a, _ in pairs], dtype=bool)
    ys = np.array([enc(b, code) for _, b in pairs], dtype=bool)
    ins = {"x": xs, "y": ys}
    if extra:
        ins.update(extra)
    return sim.outputs(sim.run(ins))["z"].astype(int)


def test_apply_op_matches_reference():
    for op, fn in REF.items():
        for a, b in itertools.product(range(16), repeat=2):
            assert apply_op(op, a, b, 4) == fn(a, b, 15)


@pytest.mark.parametrize("op", list(BlockOp))
@pytest.mark.parametrize("code", [H74, EH84], ids=lambda c: c.label)
def test_block_outputs_codeword_of_result(op, code):
    net = build_block(op, code)
    pairs = list(itertools.product(range(16), repeat=2))
    out = batch_eval(net, code, pairs)
    for (a, b), z in zip(pairs, out):
        assert list(z) == enc(REF[op](a, b, 15), code)


@pytest.mark.parametrize("op", list(BlockOp))
def test_blocks_have_private_cones(op):
    assert check_cone_disjointness(build_block(op, H74)) == []
    assert check_cone_disjointness(build_block(op, H74, True), ignore_roles=["corrector"]) == []


def test_xor_block_is_one_gate_per_bit():
    assert len(build_block(BlockOp.XOR, H74).gates) == 7


def test_input_correctors_repair_operand_flips():
    net = build_block(BlockOp.ADD, H74, include_input_correctors=True)
    for a, b in [(3, 9), (15, 15), (0, 7)]:
        for p in range(7):
            x = enc(a, H74)
            x[p] ^= 1
            assert evaluate(net, {"x": x, "y": enc(b, H74)})["z"] == enc((a + b) % 16, H74)


def test_opcode_alu():
    net = build_opcode_alu(H74)
    table = normalize_op_table(DEFAULT_OP_TABLE)
    pairs = list(itertools.product(range(16), repeat=2))
    for code_val, op in table.items():
        cbits = np.tile([code_val & 1, code_val >> 1], (len(pairs), 1)).astype(bool)
        out = batch_eval(net, H74, pairs, {"c": cbits})
        for (a, b), z in zip(pairs, out):
            assert list(z) == enc(REF[op](a, b, 15), H74)
    assert check_cone_disjointness(net) == []


def test_opcode_parsing():
    assert parse_opcode("10") == 2
    assert parse_opcode("01") == 1
    with pytest.raises(IncompleteOpTable):
        normalize_op_table({"00": "xor", "01": "and"})
    with pytest.raises(IncompleteOpTable):
        parse_opcode("2")


def test_custom_op_table():
    table = {"00": "and", "01": "or", "10": "sub", "11": "nor"}
    net = build_opcode_alu(H74, table)
    cbits = [0, 1]  # "10"
    assert evaluate(net, {"x": enc(3, H74), "y": enc(5, H74), "c": cbits})["z"] == enc((3 - 5) % 16, H74)


def test_corrector_all_words():
    for code in (H74, EH84):
        net = build_corrector(code)
        words = list(itertools.product((0, 1), repeat=code.n))
        sim = net.simulator
        out = sim.outputs(sim.run({"w": np.array(words, dtype=bool)}))["z"].astype(int)
        for w, z in zip(words, out):
            try:
                data = correct(w, code).data
            except Uncorrectable:
                continue
            assert tuple(z[: code.k]) == data
            assert list(z) == enc(int("".join(map(str, reversed(data))), 2), code)


def test_bch_bitwise_block():
    net = build_bch_bitwise_block(BlockOp.NAND, BCH15)
    pairs = [(a, b) for a in range(0, 128, 3) for b in range(0, 128, 5)]
    out = batch_eval(net, BCH15, pairs)
    for (a, b), z in zip(pairs, out):
        assert list(z) == enc(REF[BlockOp.NAND](a, b, 127), BCH15)
    assert check_cone_disjointness(net) == []


def test_bch_rejects_arithmetic():
    with pytest.raises((UnsupportedOp, UnsupportedCode)):
        build_block(BlockOp.ADD, BCH15)
    with pytest.raises(UnsupportedCode):
        build_hamming_adder(get_code("rs7_3"))


def test_plain_blocks():
    for op, fn in REF.items():
        net = build_plain_block(op, 4)
        for a, b in itertools.product(range(16), repeat=2):
            z = evaluate(net, {"x": int_to_bits(a, 4), "y": int_to_bits(b, 4)})["z"]
            assert z == list(int_to_bits(fn(a, b, 15), 4))
    alu = build_plain_alu(4)
    assert evaluate(alu, {"x": int_to_bits(7, 4), "y": int_to_bits(12, 4), "c": [0, 1]})["z"] == list(int_to_bits(3, 4))


def test_block_spec():
    net = BlockSpec(BlockOp.OR, H74).build()
    assert len(net.gates) == len(build_block(BlockOp.OR, H74).gates)
