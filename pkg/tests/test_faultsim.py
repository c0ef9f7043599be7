import pytest

from dpalu.blocks import BlockOp, DEFAULT_OP_TABLE, build_block, build_opcode_alu, build_plain_block
from dpalu.codec import Correction, get_code
from dpalu.errors import BoundExceeded, ConfigError
from dpalu.faultsim import (
    GENERATOR, CampaignConfig, CampaignReport, Oracle, TrialOutcome, classify, merge_reports,
    run_campaign, run_exhaustive_single_fault, run_fault_free, run_random_campaign,
)
from dpalu.netlist import ALL_FAULT_KINDS, FaultKind
from dpalu.tmr import build_tmr

H74 = get_code("hamming7_4")
BCH15 = get_code("bch15_7")
C, M, SW, DU = (TrialOutcome.CORRECTED, TrialOutcome.MASKED, TrialOutcome.SILENT_WRONG,
                TrialOutcome.DETECTED_UNCORRECTABLE)


def test_classify_examples():
    assert classify([1, 0], [1, 0], Correction((1,), ()), [1]) is M
    assert classify([1, 1], [1, 0], Correction((1,), (1,)), [1]) is C
    assert classify([1, 1], [1, 0], None, [1]) is DU
    assert classify([1, 1], [1, 0], (0,), [1]) is SW
    # raw unchanged but the golden itself is wrong: not Masked
    assert classify([0, 0], [0, 0], (0,), [1]) is SW


def bch_random(op=BlockOp.NAND, **kw):
    base = dict(
        netlist=build_block(op, BCH15), oracle=Oracle(op.value, 7), decode=BCH15,
        input_mode="random", trials=5000, seed=11, fault_mode="random", budget=2, distinct_cones=True,
    )
    base.update(kw)
    return CampaignConfig(**base)


def test_report_consistency():
    r = run_random_campaign(bch_random(fault_counts=(3,), budget=3, trials=3000))
    assert sum(r.counts.values()) == r.trials == 3000
    assert sum(r.silent_wrong_by_fault.values()) == r.silent_wrong > 0
    assert r.detected > 0
    assert r.first_failure is not None


def test_determinism_and_csv():
    cfg = bch_random()
    a, b = run_random_campaign(cfg), run_random_campaign(cfg)
    assert a.to_csv() == b.to_csv() and a.to_json() == b.to_json()
    lines = a.to_csv().splitlines()
    assert lines[0] == "outcome,count"
    assert [l.split(",")[0] for l in lines[1:]] == ["Corrected", "Masked", "SilentWrong", "DetectedUncorrectable", "trials"]
    assert lines[-1] == "trials,5000"
    assert GENERATOR in a.to_json()
    c = run_random_campaign(bch_random(seed=12))
    assert c.counts != a.counts or c.to_json() != a.to_json()


def test_parallel_matches_serial():
    cfg = bch_random(trials=10000, fault_counts=(3,), budget=3)
    serial = run_random_campaign(cfg, workers=1)
    par = run_random_campaign(cfg, workers=3)
    assert serial.to_csv() == par.to_csv()
    assert serial.to_json() == par.to_json()


def test_merge_associative():
    from dpalu.faultsim import _Campaign

    cfg = bch_random(trials=900, fault_counts=(3,), budget=3)
    camp = _Campaign(cfg)
    p = [camp.run_random_range(lo, lo + 300) for lo in (0, 300, 600)]
    left = p[0].merge(p[1]).merge(p[2])
    right = p[0].merge(p[1].merge(p[2]))
    swapped = p[2].merge(p[0]).merge(p[1])
    whole = camp.run_random_range(0, 900)
    for r in (left, right, swapped, merge_reports(p)):
        assert r.to_json() == whole.to_json()


def test_budget_zero_is_clean_for_every_block():
    for op in BlockOp:
        cfg = CampaignConfig(build_block(op, H74), Oracle(op.value, 4), H74, input_mode="random",
                             trials=500, fault_mode="random", budget=0)
        r = run_random_campaign(cfg)
        assert r.silent_wrong == 0 and r.detected == 0
    alu = CampaignConfig(build_opcode_alu(H74), Oracle.for_alu(4, DEFAULT_OP_TABLE), H74)
    r = run_fault_free(alu)
    assert r.counts[M] == r.trials == 1024


def test_exhaustive_xor_trial_count():
    cfg = CampaignConfig(build_block(BlockOp.XOR, H74), Oracle("xor", 4), H74)
    r = run_exhaustive_single_fault(cfg)
    assert r.trials == 256 * 7
    assert r.silent_wrong == r.detected == 0


def test_tmr_voter_restricted_sweep():
    net = build_tmr(build_plain_block(BlockOp.NAND, 4))
    cfg = CampaignConfig(net, Oracle("nand", 4), None, include_roles=("voter",))
    assert run_exhaustive_single_fault(cfg).silent_wrong > 0
    cfg = CampaignConfig(net, Oracle("nand", 4), None, exclude_roles=("voter",), fault_kinds=ALL_FAULT_KINDS)
    assert run_exhaustive_single_fault(cfg).silent_wrong == 0


def test_bch_two_distinct_cone_faults_exhaustive_pairs():
    cfg = CampaignConfig(build_block(BlockOp.NAND, BCH15), Oracle("nand", 7), BCH15, input_mode="random",
                         trials=200, fault_mode="exhaustive", fault_order=2, budget=2, distinct_cones=True)
    r = run_campaign(cfg)
    assert r.silent_wrong == r.detected == 0


def test_input_errors_with_correctors():
    net = build_block(BlockOp.NAND, BCH15, include_input_correctors=True)
    for w, g in [(1, 1), (2, 2)]:
        cfg = bch_random(netlist=net, trials=2000, fault_counts=(g,), budget=g, input_error_weight=w,
                         exclude_roles=("corrector",))
        assert run_random_campaign(cfg).failures == 0


def test_input_errors_without_correctors():
    # linear block: input and gate errors add up within the radius
    cfg = bch_random(BlockOp.XOR, trials=2000, fault_counts=(1,), budget=1, input_error_weight=1)
    assert run_random_campaign(cfg).failures == 0
    # nonlinear block re-encodes wrong data: input errors are not absorbed
    cfg = bch_random(trials=2000, fault_counts=(0,), budget=0, input_error_weight=1)
    assert run_random_campaign(cfg).silent_wrong > 0


def test_config_errors():
    net = build_plain_block(BlockOp.AND, 11)
    with pytest.raises(BoundExceeded):
        run_exhaustive_single_fault(CampaignConfig(net, Oracle("and", 11), None))
    with pytest.raises(ConfigError):
        run_exhaustive_single_fault(bch_random())
    with pytest.raises(ConfigError):
        run_random_campaign(bch_random(fault_counts=(3,), budget=2))


def test_stuck_at_kinds_on_hamming():
    net = build_block(BlockOp.ADD, H74)
    cfg = CampaignConfig(net, Oracle("add", 4), H74, fault_kinds=(FaultKind.STUCK_AT_0, FaultKind.STUCK_AT_1))
    r = run_exhaustive_single_fault(cfg)
    assert r.trials == 256 * len(net.gates) * 2
    assert r.failures == 0


def test_report_dict_roundtrip():
    r = run_random_campaign(bch_random(trials=100))
    d = r.to_dict()
    assert d["trials"] == 100 and set(d["counts"]) == {o.value for o in TrialOutcome}
    assert isinstance(CampaignReport.empty({}), CampaignReport)
