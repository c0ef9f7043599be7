import itertools

import numpy as np
import pytest

from dpalu.blocks import BlockOp, build_plain_block
from dpalu.errors import EvenLength
from dpalu.netlist import FaultKind, GateKind, check_cone_disjointness
from dpalu.tmr import build_tmr, vote


def test_vote():
    assert vote([1, 1, 0]) == 1
    assert vote([0, 1, 0]) == 0
    assert vote([1, 0, 1, 0, 1]) == 1
    with pytest.raises(EvenLength):
        vote([1, 0])
    with pytest.raises(EvenLength):
        vote([1])


def all_inputs(width):
    rows = np.array(list(itertools.product((0, 1), repeat=2 * width)), dtype=bool)
    return {"x": rows[:, :width], "y": rows[:, width:]}


@pytest.mark.parametrize("r", [1, 2])
def test_tmr_structure_and_function(r):
    base = build_plain_block(BlockOp.NAND, 4)
    net = build_tmr(base, r)
    reps = 2 * r + 1
    assert len(net.gate_ids(["replica0"])) == len(base.gates)
    assert len(net.gate_ids(exclude=["voter"])) == reps * len(base.gates)
    voters = [net.gates[g] for g in net.gate_ids(["voter"])]
    assert {g.kind for g in voters} == {GateKind.AND, GateKind.OR}
    if r == 1:
        assert len(voters) == 4 * 5  # 3 AND + 2 OR per bit
    ins = all_inputs(4)
    sim, ref = net.simulator, base.simulator
    assert (sim.outputs(sim.run(ins))["z"] == ref.outputs(ref.run(ins))["z"]).all()


def test_replica_faults_masked_voter_faults_not():
    net = build_tmr(build_plain_block(BlockOp.NAND, 4))
    sim = net.simulator
    ins = all_inputs(4)
    golden = sim.run(ins)
    ref = sim.outputs(golden)["z"]
    for g in net.gate_ids(exclude=["voter"]):
        for kind in FaultKind:
            out = sim.outputs(sim.run(ins, {g: [(kind, None)]}, golden=golden))["z"]
            assert (out == ref).all()
    hits = 0
    for g in net.gate_ids(["voter"]):
        out = sim.outputs(sim.run(ins, {g: [(FaultKind.TRANSIENT_FLIP, None)]}, golden=golden))["z"]
        hits += bool((out != ref).any())
    assert hits > 0


def test_replicas_disjoint_per_output():
    net = build_tmr(build_plain_block(BlockOp.NAND, 4))
    assert check_cone_disjointness(net) == []


def test_r_zero_rejected():
    with pytest.raises(ValueError):
        build_tmr(build_plain_block(BlockOp.AND, 2), 0)
