"""Command-line front end.

Exit codes: 0 success, 1 property violated, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .blocks import DEFAULT_OP_TABLE, BlockOp, build_block, build_corrector, build_opcode_alu, build_plain_alu, build_plain_block
from .codec import PRESETS, Uncorrectable, correct, encode, get_code
from .costmodel import compare_architectures, format_reports, format_rows, width_summary
from .errors import ConfigError, DpaluError
from .faultsim import CampaignConfig, Oracle, run_campaign, run_exhaustive_single_fault, run_fault_free
from .netlist import ALL_FAULT_KINDS, FaultKind, load, parse, save
from .tmr import build_tmr

BLOCKS = ("xor", "and", "or", "not", "nand", "nor", "add", "sub", "opcode-alu", "corrector", "bch-nand")
VERIFY_OPS = ("xor", "and", "or", "not", "nand", "nor", "add", "sub", "opcode-alu")
KIND_NAMES = {"flip": FaultKind.TRANSIENT_FLIP, "sa0": FaultKind.STUCK_AT_0, "sa1": FaultKind.STUCK_AT_1}
for _k in FaultKind:
    KIND_NAMES[_k.value] = _k


class UsageError(Exception):
    pass


def _code(name):
    if name in (None, "none"):
        return None
    try:
        return get_code(name)
    except DpaluError as exc:
        raise UsageError(str(exc)) from None


def make_netlist(block: str, code_name: str, arch: str = "ecc", r: int = 1, correctors: bool = False):
    """Build a netlist for a CLI block name; raises UsageError for invalid combinations."""
    code = _code(code_name)
    try:
        if arch == "tmr":
            if code is None:
                raise UsageError("--arch tmr needs --code to fix the data width")
            if block == "opcode-alu":
                return build_tmr(build_plain_alu(code.k), r)
            if block in ("corrector", "bch-nand"):
                raise UsageError(f"block {block!r} has no TMR form")
            return build_tmr(build_plain_block(BlockOp(block), code.k), r)
        if code is None:
            raise UsageError("--code is required for ecc blocks")
        if block == "corrector":
            return build_corrector(code)
        if block == "opcode-alu":
            return build_opcode_alu(code, include_input_correctors=correctors)
        if block == "bch-nand":
            if code.kind.value != "BCH":
                raise UsageError(f"bch-nand needs a BCH code, got {code.label}")
            return build_block(BlockOp.NAND, code, correctors)
        return build_block(BlockOp(block), code, correctors)
    except DpaluError as exc:
        raise UsageError(str(exc)) from None


def _oracle(op: str, width: int) -> Oracle:
    if op == "opcode-alu":
        return Oracle.for_alu(width, DEFAULT_OP_TABLE)
    return Oracle(BlockOp(op).value, width)


def _banner(args) -> None:
    echo = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    print(f"dpalu {__version__}")
    print("config: " + json.dumps(echo, sort_keys=True), flush=True)


# --------------------------------------------------------------------------- subcommands


def cmd_build(args) -> int:
    net = make_netlist(args.block, args.code, args.arch, args.r, args.correctors)
    save(net, args.out)
    print(f"wrote {args.out}: {len(net.gates)} gates")
    return 0


def _format_failure(rec) -> str:
    parts = [f"a={rec['a']}", f"b={rec['b']}"]
    if "c" in rec:
        parts.append(f"c={rec['c']:02b}")
    if rec["gates"]:
        parts.append("gates=" + ",".join(f"g{g}" for g in rec["gates"]))
        parts.append("kind=" + ",".join(rec["kinds"]))
    else:
        parts.append("fault-free")
    parts.append(f"outcome={rec['outcome']}")
    return "counterexample: " + " ".join(parts)


def cmd_verify(args) -> int:
    try:
        net = load(args.netlist)
    except (OSError, DpaluError) as exc:
        raise UsageError(f"cannot read netlist: {exc}") from None
    code = _code(args.code)
    width = code.k if code else net.inputs.get("x", 0)
    exclude = []
    if not args.include_voter_faults:
        exclude.append("voter")
    if not args.include_corrector_faults:
        exclude.append("corrector")
    kinds = tuple(KIND_NAMES[k] for k in args.kinds) if args.kinds else ALL_FAULT_KINDS
    common = dict(
        netlist=net,
        oracle=_oracle(args.op, width),
        decode=code,
        input_mode="exhaustive" if args.exhaustive else "random",
        trials=args.trials,
        seed=args.seed,
        fault_kinds=kinds,
        exclude_roles=tuple(exclude),
        label="verify",
    )
    try:
        baseline = run_fault_free(CampaignConfig(**common))
        if baseline.failures:
            print(f"verify: FAIL fault-free mismatches={baseline.failures} trials={baseline.trials}")
            print(_format_failure(baseline.first_failure))
            return 1
        if args.exhaustive:
            report = run_exhaustive_single_fault(CampaignConfig(**common))
        else:
            report = run_campaign(CampaignConfig(**common, fault_mode="exhaustive"))
    except DpaluError as exc:
        raise UsageError(str(exc)) from None
    status = "PASS" if report.failures == 0 else "FAIL"
    print(
        f"verify: {status} trials={report.trials} "
        + " ".join(f"{o.value}={n}" for o, n in report.counts.items())
    )
    if report.failures:
        print(_format_failure(report.first_failure))
        return 1
    return 0


_CONFIG_KEYS = {
    "netlist",
    "decode",
    "oracle",
    "input_mode",
    "fault_mode",
    "budget",
    "seed",
    "trials",
    "input_error_weight",
    "label",
}


def load_campaign_config(path) -> CampaignConfig:
    """Parse a campaign JSON file; ConfigError names the offending key."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from None
    return campaign_config_from_dict(raw, os.path.dirname(os.path.abspath(path)))


def _int(raw, key, minimum=0):
    value = raw.get(key, minimum)
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ConfigError(key, f"expected an integer >= {minimum}")
    return value


def campaign_config_from_dict(raw: dict, base_dir: str = ".") -> CampaignConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be an object")
    unknown = sorted(set(raw) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    for key in ("netlist", "oracle"):
        if key not in raw:
            raise ConfigError(key, "missing")

    decode_name = raw.get("decode")
    if decode_name is not None and not isinstance(decode_name, str):
        raise ConfigError("decode", "expected a code name or null")
    try:
        code = get_code(decode_name) if decode_name else None
    except DpaluError as exc:
        raise ConfigError("decode", str(exc)) from None

    spec = raw["netlist"]
    try:
        if isinstance(spec, str):
            with open(os.path.join(base_dir, spec)) as fh:
                net = parse(fh.read())
        elif isinstance(spec, dict):
            net = make_netlist(
                spec.get("block", ""),
                spec.get("code", decode_name),
                spec.get("arch", "ecc"),
                spec.get("r", 1),
                spec.get("correctors", False),
            )
        else:
            raise ConfigError("netlist", "expected a path or a block object")
    except (OSError, DpaluError, UsageError, ValueError) as exc:
        raise ConfigError("netlist", str(exc)) from None

    oracle_raw = raw["oracle"]
    if isinstance(oracle_raw, str):
        oracle_raw = {"op": oracle_raw}
    if not isinstance(oracle_raw, dict) or "op" not in oracle_raw:
        raise ConfigError("oracle", "expected {'op': ..., 'width': ...}")
    width = oracle_raw.get("width", code.k if code else net.inputs.get("x"))
    try:
        if oracle_raw["op"] in ("alu", "opcode-alu"):
            oracle = Oracle.for_alu(width, oracle_raw.get("op_table", DEFAULT_OP_TABLE))
        else:
            oracle = Oracle(BlockOp(oracle_raw["op"]).value, width)
    except (ValueError, DpaluError) as exc:
        raise ConfigError("oracle", str(exc)) from None

    input_mode = raw.get("input_mode", "exhaustive")
    if input_mode not in ("exhaustive", "random"):
        raise ConfigError("input_mode", "expected 'exhaustive' or 'random'")

    fm = raw.get("fault_mode", "exhaustive_single")
    if isinstance(fm, str):
        fm = {"mode": fm}
    if not isinstance(fm, dict):
        raise ConfigError("fault_mode", "expected a mode name or an object")
    mode = fm.get("mode", "exhaustive_single")
    if mode not in ("exhaustive_single", "exhaustive", "random"):
        raise ConfigError("fault_mode", f"unknown mode {mode!r}")
    try:
        kinds = tuple(KIND_NAMES[k] for k in fm.get("kinds", ["flip"]))
    except (KeyError, TypeError):
        raise ConfigError("fault_mode", f"kinds must be among {sorted(KIND_NAMES)}") from None
    counts = fm.get("counts")
    if counts is not None:
        if not isinstance(counts, list) or not all(isinstance(c, int) and c >= 0 for c in counts) or not counts:
            raise ConfigError("fault_mode", "counts must be a non-empty list of integers >= 0")
        counts = tuple(counts)
    budget = _int(raw, "budget", 0) if "budget" in raw else max(counts or (fm.get("order", 1),))
    return CampaignConfig(
        netlist=net,
        oracle=oracle,
        decode=code,
        input_mode=input_mode,
        trials=_int(raw, "trials", 0) if "trials" in raw else 1000,
        seed=_int(raw, "seed", 0),
        fault_mode=mode,
        fault_kinds=kinds,
        fault_order=int(fm.get("order", 1)),
        fault_counts=counts,
        budget=budget,
        distinct_cones=bool(fm.get("distinct_cones", False)),
        include_roles=tuple(fm.get("include_roles", ())),
        exclude_roles=tuple(fm.get("exclude_roles", ())),
        input_error_weight=_int(raw, "input_error_weight", 0),
        label=str(raw.get("label", "")),
    )


def cmd_inject(args) -> int:
    try:
        config = load_campaign_config(args.config)
        report = run_campaign(config, workers=args.workers)
    except ConfigError as exc:
        print(f"error: config key {exc}", file=sys.stderr)
        return 2
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(report.to_csv())
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(report.to_json())
    sys.stdout.write(report.to_csv())
    return 0


def cmd_cost(args) -> int:
    if args.width < 1 or args.r < 0:
        raise UsageError("need --width >= 1 and --r >= 0")
    try:
        rows = width_summary(args.width, args.r)
    except DpaluError as exc:
        raise UsageError(str(exc)) from None
    if args.json:
        print(json.dumps(dict(rows), indent=2))
    else:
        sys.stdout.write(format_rows(rows))
    return 0


def cmd_compare(args) -> int:
    code = _code(args.code)
    if code is None:
        raise UsageError("--code is required")
    try:
        ecc, tmr = compare_architectures(BlockOp(args.block), code, args.r)
    except DpaluError as exc:
        raise UsageError(str(exc)) from None
    if args.json:
        print(json.dumps({"ecc": ecc.to_dict(), "tmr": tmr.to_dict()}, indent=2))
    else:
        sys.stdout.write(format_reports([ecc, tmr]))
    return 0


def _parse_units(text: str, code) -> list[int]:
    text = text.strip()
    try:
        if "," in text or not code.is_binary:
            return [int(t) for t in text.split(",")]
        if set(text) - {"0", "1"}:
            raise ValueError
        return [int(ch) for ch in text]
    except ValueError:
        raise UsageError(f"cannot parse {text!r}: use a 0/1 string (unit 0 first) or comma-separated ints") from None


def _format_units(units, code) -> str:
    if code.is_binary:
        return "".join(str(u) for u in units)
    return ",".join(str(u) for u in units)


def cmd_encode(args) -> int:
    code = _code(args.code)
    try:
        word = encode(_parse_units(args.data, code), code)
    except (DpaluError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    print(f"codeword: {_format_units(word.units, code)}")
    return 0


def cmd_decode(args) -> int:
    code = _code(args.code)
    try:
        result = correct(_parse_units(args.word, code), code)
    except Uncorrectable as exc:
        print(f"uncorrectable: {exc}")
        return 1
    except (DpaluError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    print(f"data: {_format_units(result.data, code)}")
    print("errors: " + (",".join(str(p) for p in result.errors_found) or "none"))
    return 0


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dpalu", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"dpalu {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("build", help="emit a block netlist")
    s.add_argument("--block", required=True, choices=BLOCKS)
    s.add_argument("--code", default="hamming7_4", choices=PRESETS)
    s.add_argument("--arch", default="ecc", choices=("ecc", "tmr"))
    s.add_argument("--r", type=int, default=1, help="TMR tolerance; 2r+1 replicas")
    s.add_argument("--correctors", action="store_true", help="put a corrector in front of each operand")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("verify", help="fault-free and single-fault check of a netlist")
    s.add_argument("--netlist", required=True)
    s.add_argument("--code", default="hamming7_4", choices=PRESETS + ("none",))
    s.add_argument("--op", required=True, choices=VERIFY_OPS)
    s.add_argument("--exhaustive", action="store_true", help="all inputs (otherwise --trials sampled inputs)")
    s.add_argument("--trials", type=int, default=256)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--kinds", nargs="+", choices=("flip", "sa0", "sa1"))
    s.add_argument("--include-voter-faults", action="store_true")
    s.add_argument("--include-corrector-faults", action="store_true")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("inject", help="run a campaign from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--report", help="CSV report path")
    s.add_argument("--json", help="JSON report path")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_inject)

    s = sub.add_parser("cost", help="redundancy and check-bit figures for a word width")
    s.add_argument("--width", type=int, required=True)
    s.add_argument("--r", type=int, default=1)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_cost)

    s = sub.add_parser("compare", help="gate counts: ECC block + corrector vs TMR")
    s.add_argument("--block", required=True, choices=VERIFY_OPS[:-1])
    s.add_argument("--code", default="hamming7_4", choices=PRESETS)
    s.add_argument("--r", type=int, default=1)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("encode", help="encode data units")
    s.add_argument("--code", required=True, choices=PRESETS)
    s.add_argument("--data", required=True)
    s.set_defaults(func=cmd_encode)

    s = sub.add_parser("decode", help="correct a received word")
    s.add_argument("--code", required=True, choices=PRESETS)
    s.add_argument("--word", required=True)
    s.set_defaults(func=cmd_decode)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _banner(args)
    try:
        return args.func(args)
    except (UsageError, DpaluError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
