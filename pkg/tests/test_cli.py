import json

import pytest

from dpalu import __version__
from dpalu.cli import main
from dpalu.netlist import BusBit, NetlistBuilder, load, save


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def delete_gate(net, victim):
    """Drop one gate; its readers take its first input instead."""
    b = NetlistBuilder()
    bind = {name: b.input(name, w) for name, w in net.input_buses}
    remap = {}

    def w(x):
        return bind[x.bus][x.index] if isinstance(x, BusBit) else remap[x]

    for g in net.gates:
        if g.id == victim:
            remap[g.id] = w(g.inputs[0])
            continue
        remap[g.id] = b.gate(g.kind, *[w(i) for i in g.inputs], tag=g.tag)
    for name, wires in net.output_buses:
        b.output(name, [w(x) for x in wires])
    return b.build()


def test_banner_and_config_echo(capsys, tmp_path):
    code, out, _ = run(capsys, "cost", "--width", 8, "--r", 1)
    assert code == 0
    assert out.splitlines()[0] == f"dpalu {__version__}"
    assert out.splitlines()[1].startswith("config: ")


def test_build_round_trip(capsys, tmp_path):
    path = tmp_path / "nand.nl"
    code, _, _ = run(capsys, "build", "--block", "nand", "--code", "hamming7_4", "--out", path)
    assert code == 0
    text = path.read_text()
    net = load(path)
    save(net, tmp_path / "again.nl")
    assert (tmp_path / "again.nl").read_text() == text


def test_tmr_build_at_least_three_data_paths(capsys, tmp_path):
    run(capsys, "build", "--block", "nand", "--code", "hamming7_4", "--out", tmp_path / "e.nl")
    run(capsys, "build", "--block", "nand", "--code", "hamming7_4", "--arch", "tmr", "--out", tmp_path / "t.nl")
    ecc, tmr = load(tmp_path / "e.nl"), load(tmp_path / "t.nl")
    data_path = len({w for w in ecc.outputs["z"][:4]})
    assert len(tmr.gates) >= 3 * data_path


def test_invalid_combination_exits_2(capsys, tmp_path):
    code, _, err = run(capsys, "build", "--block", "add", "--code", "bch15_7", "--out", tmp_path / "x.nl")
    assert code == 2 and err.count("\n") == 1
    with pytest.raises(SystemExit) as exc:
        main(["build", "--block", "nand", "--bogus"])
    assert exc.value.code == 2


def test_verify_shipped_and_mutated(capsys, tmp_path):
    path = tmp_path / "nand.nl"
    run(capsys, "build", "--block", "nand", "--code", "hamming7_4", "--out", path)
    code, out, _ = run(capsys, "verify", "--netlist", path, "--code", "hamming7_4", "--op", "nand", "--exhaustive")
    assert code == 0 and "PASS" in out

    net = load(path)
    root = net.outputs["z"][4]  # first parity bit
    save(delete_gate(net, root), tmp_path / "bad.nl")
    code, out, _ = run(capsys, "verify", "--netlist", tmp_path / "bad.nl", "--code", "hamming7_4", "--op", "nand",
                       "--exhaustive")
    assert code == 1
    assert "counterexample: a=" in out


def test_verify_tmr_voter_faults(capsys, tmp_path):
    path = tmp_path / "t.nl"
    run(capsys, "build", "--block", "nand", "--code", "hamming7_4", "--arch", "tmr", "--out", path)
    code, _, _ = run(capsys, "verify", "--netlist", path, "--code", "none", "--op", "nand", "--exhaustive")
    assert code == 0
    code, out, _ = run(capsys, "verify", "--netlist", path, "--code", "none", "--op", "nand", "--exhaustive",
                       "--include-voter-faults")
    assert code == 1 and "gates=g" in out


def write_config(tmp_path, **kw):
    cfg = {
        "netlist": {"block": "bch-nand", "code": "bch15_7"},
        "decode": "bch15_7",
        "oracle": {"op": "nand", "width": 7},
        "input_mode": "random",
        "fault_mode": {"mode": "random", "counts": [2], "distinct_cones": True},
        "budget": 2,
        "seed": 7,
        "trials": 3000,
    }
    cfg.update(kw)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_inject_budget_zero(capsys, tmp_path):
    cfg = write_config(tmp_path, budget=0, fault_mode={"mode": "random", "counts": [0]})
    code, out, _ = run(capsys, "inject", "--config", cfg, "--report", tmp_path / "r.csv")
    assert code == 0
    assert "SilentWrong,0" in (tmp_path / "r.csv").read_text()


def test_inject_byte_identical(capsys, tmp_path):
    cfg = write_config(tmp_path)
    for name in ("a", "b"):
        run(capsys, "inject", "--config", cfg, "--report", tmp_path / f"{name}.csv", "--json", tmp_path / f"{name}.json")
    run(capsys, "inject", "--config", cfg, "--report", tmp_path / "c.csv", "--workers", 2)
    a = (tmp_path / "a.csv").read_bytes()
    assert a == (tmp_path / "b.csv").read_bytes() == (tmp_path / "c.csv").read_bytes()
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_inject_three_faults(capsys, tmp_path):
    cfg = write_config(tmp_path, budget=3, fault_mode={"mode": "random", "counts": [3], "distinct_cones": True})
    run(capsys, "inject", "--config", cfg, "--json", tmp_path / "r.json")
    counts = json.loads((tmp_path / "r.json").read_text())["counts"]
    assert counts["SilentWrong"] > 0 and counts["DetectedUncorrectable"] > 0


def test_inject_netlist_path(capsys, tmp_path):
    run(capsys, "build", "--block", "xor", "--code", "hamming7_4", "--out", tmp_path / "x.nl")
    cfg = write_config(tmp_path, netlist="x.nl", decode="hamming7_4", oracle="xor", input_mode="exhaustive",
                       fault_mode="exhaustive_single", budget=1)
    code, out, _ = run(capsys, "inject", "--config", cfg)
    assert code == 0 and "trials,1792" in out


@pytest.mark.parametrize("key,value", [
    ("seed", -1),
    ("trials", "many"),
    ("decode", "golay"),
    ("fault_mode", {"mode": "sometimes"}),
    ("oracle", {"op": "mul"}),
    ("netlist", "missing.nl"),
    ("colour", "blue"),
])
def test_inject_schema_errors(capsys, tmp_path, key, value):
    cfg = write_config(tmp_path, **{key: value})
    code, _, err = run(capsys, "inject", "--config", cfg)
    assert code == 2
    assert key in err


def test_cost_rows(capsys):
    code, out, _ = run(capsys, "cost", "--width", 32, "--r", 1, "--json")
    rows = json.loads(out.split("\n", 2)[2])
    assert rows["BCP"] == 6 and rows["SEC-DED parity"] == 7


def test_compare(capsys):
    code, out, _ = run(capsys, "compare", "--block", "nand", "--code", "hamming7_4", "--json")
    data = json.loads(out.split("\n", 2)[2])
    assert data["ecc"]["unprotected_final_stage_units"] == 1
    assert data["tmr"]["unprotected_final_stage_units"] == 4


def test_encode_decode(capsys):
    code, out, _ = run(capsys, "encode", "--code", "hamming7_4", "--data", "1011")
    assert code == 0 and out.splitlines()[-1] == "codeword: 1011010"
    code, out, _ = run(capsys, "decode", "--code", "hamming7_4", "--word", "1011110")
    assert code == 0 and "data: 1011" in out and "errors: 4" in out
    code, out, _ = run(capsys, "decode", "--code", "exthamming8_4", "--word", "11000000")
    assert code == 1
    code, _, _ = run(capsys, "decode", "--code", "hamming7_4", "--word", "10x")
    assert code == 2
    code, out, _ = run(capsys, "encode", "--code", "rs7_3", "--data", "1,2,3")
    word = out.splitlines()[-1].split(": ")[1]
    code, out, _ = run(capsys, "decode", "--code", "rs7_3", "--word", word)
    assert "data: 1,2,3" in out
