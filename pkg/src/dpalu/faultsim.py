"""Fault-injection campaigns over block netlists.

A trial is one (input assignment, fault set) pair.  The faulty netlist output
is decoded and compared with a software oracle of the operation:

* ``SilentWrong``            decoded data differs from the oracle,
* ``DetectedUncorrectable``  the decoder gave up,
* ``Masked``                 raw output identical to the fault-free output,
* ``Corrected``              raw output differs but decodes to the oracle.

A trial is only counted Masked when the fault-free output itself decodes to
the oracle, so a broken netlist can never hide behind masking.

Random trials draw everything from ``numpy.random.Philox`` keyed by the seed
with the trial index in the top counter word.  Trial i therefore sees the
same stream no matter how trials are split across workers.
"""

from __future__ import annotations

import enum
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Mapping, Sequence

import numpy as np

from .blocks import BlockOp, apply_op, normalize_op_table
from .codec import CodeSpec, Correction, decode_array, encode_array
from .errors import BoundExceeded, ConfigError
from .netlist import FaultKind, Netlist

GENERATOR = "numpy.random.Philox(key=seed, counter=[0, 0, 0, trial_index])"
EXHAUSTIVE_INPUT_BITS = 20
CHUNK = 4096


class TrialOutcome(enum.Enum):
    CORRECTED = "Corrected"
    MASKED = "Masked"
    SILENT_WRONG = "SilentWrong"
    DETECTED_UNCORRECTABLE = "DetectedUncorrectable"


OUTCOMES = tuple(TrialOutcome)
_CODE = {o: i for i, o in enumerate(OUTCOMES)}


def classify(raw_faulty, raw_golden, decoded, oracle_data) -> TrialOutcome:
    """Classify one trial.  ``decoded`` is a Correction, a data sequence, or None for Uncorrectable."""
    if decoded is None:
        return TrialOutcome.DETECTED_UNCORRECTABLE
    data = decoded.data if isinstance(decoded, Correction) else decoded
    if tuple(data) != tuple(oracle_data):
        return TrialOutcome.SILENT_WRONG
    if tuple(raw_faulty) == tuple(raw_golden):
        return TrialOutcome.MASKED
    return TrialOutcome.CORRECTED


@dataclass(frozen=True)
class Oracle:
    """Software reference for the block under test (``op`` is a BlockOp value or ``"alu"``)."""

    op: str
    width: int
    op_table: tuple[tuple[int, str], ...] | None = None

    @classmethod
    def for_alu(cls, width: int, op_table: Mapping) -> "Oracle":
        table = normalize_op_table(op_table)
        return cls("alu", width, tuple(sorted((c, op.value) for c, op in table.items())))

    @property
    def uses_control(self) -> bool:
        return self.op == "alu"

    def compute(self, a: np.ndarray, b: np.ndarray, c: np.ndarray | None = None) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.op != "alu":
            return apply_op(BlockOp(self.op), a, b, self.width)
        out = np.zeros_like(a)
        for opcode, op in self.op_table:
            sel = c == opcode
            out[sel] = apply_op(BlockOp(op), a[sel], b[sel], self.width)
        return out

    def describe(self) -> dict:
        d = {"op": self.op, "width": self.width}
        if self.op_table:
            d["op_table"] = {format(c, "02b"): op for c, op in self.op_table}
        return d


@dataclass(frozen=True)
class CampaignConfig:
    netlist: Netlist
    oracle: Oracle
    decode: CodeSpec | None = None  # None: compare raw output with the oracle (TMR)
    input_mode: str = "exhaustive"  # or "random"
    trials: int = 1000  # random inputs / random trials
    seed: int = 0
    fault_mode: str = "exhaustive_single"  # "exhaustive" (all sets of fault_order gates) or "random"
    fault_kinds: tuple[FaultKind, ...] = (FaultKind.TRANSIENT_FLIP,)
    fault_order: int = 1
    fault_counts: tuple[int, ...] | None = None  # random mode: drawn uniformly; default 0..budget
    budget: int = 1
    distinct_cones: bool = False
    include_roles: tuple[str, ...] = ()
    exclude_roles: tuple[str, ...] = ()
    input_error_weight: int = 0  # bits flipped across x||y before evaluation (random mode)
    label: str = ""

    def describe(self) -> dict:
        return {
            "label": self.label,
            "netlist_gates": len(self.netlist.gates),
            "decode": self.decode.label if self.decode else None,
            "oracle": self.oracle.describe(),
            "input_mode": self.input_mode,
            "trials": self.trials,
            "seed": self.seed,
            "fault_mode": self.fault_mode,
            "fault_kinds": [k.value for k in self.fault_kinds],
            "fault_order": self.fault_order,
            "fault_counts": list(self.counts()),
            "budget": self.budget,
            "distinct_cones": self.distinct_cones,
            "include_roles": list(self.include_roles),
            "exclude_roles": list(self.exclude_roles),
            "input_error_weight": self.input_error_weight,
        }

    def counts(self) -> tuple[int, ...]:
        if self.fault_mode == "random":
            return self.fault_counts if self.fault_counts is not None else tuple(range(self.budget + 1))
        if self.fault_mode == "exhaustive_single":
            return (1,)
        return (self.fault_order,)


@dataclass
class CampaignReport:
    counts: dict[TrialOutcome, int]
    trials: int
    config: dict
    generator: str = GENERATOR
    silent_wrong_by_fault: dict[str, int] = field(default_factory=dict)
    first_failure: dict | None = None

    @classmethod
    def empty(cls, config: dict) -> "CampaignReport":
        return cls({o: 0 for o in OUTCOMES}, 0, config)

    def __getitem__(self, outcome: TrialOutcome) -> int:
        return self.counts[outcome]

    @property
    def silent_wrong(self) -> int:
        return self.counts[TrialOutcome.SILENT_WRONG]

    @property
    def detected(self) -> int:
        return self.counts[TrialOutcome.DETECTED_UNCORRECTABLE]

    @property
    def failures(self) -> int:
        return self.silent_wrong + self.detected

    def merge(self, other: "CampaignReport") -> "CampaignReport":
        by_fault = dict(self.silent_wrong_by_fault)
        for key, n in other.silent_wrong_by_fault.items():
            by_fault[key] = by_fault.get(key, 0) + n
        firsts = [f for f in (self.first_failure, other.first_failure) if f is not None]
        return CampaignReport(
            {o: self.counts[o] + other.counts[o] for o in OUTCOMES},
            self.trials + other.trials,
            self.config,
            self.generator,
            dict(sorted(by_fault.items())),
            min(firsts, key=lambda f: f["trial"]) if firsts else None,
        )

    def to_csv(self) -> str:
        rows = ["outcome,count"]
        rows += [f"{o.value},{self.counts[o]}" for o in OUTCOMES]
        rows.append(f"trials,{self.trials}")
        return "\n".join(rows) + "\n"

    def to_dict(self) -> dict:
        return {
            "counts": {o.value: self.counts[o] for o in OUTCOMES},
            "trials": self.trials,
            "config": self.config,
            "generator": self.generator,
            "silent_wrong_by_fault": dict(sorted(self.silent_wrong_by_fault.items())),
            "first_failure": self.first_failure,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


# --------------------------------------------------------------------------- engine


def _bits(values: np.ndarray, width: int) -> np.ndarray:
    return ((values[:, None] >> np.arange(width, dtype=np.int64)) & 1).astype(bool)


def _pack(bits: np.ndarray) -> np.ndarray:
    return bits.astype(np.int64) @ (np.int64(1) << np.arange(bits.shape[1], dtype=np.int64))


def _fault_label(gates, kinds) -> str:
    if not gates:
        return "-"
    return ",".join(f"g{g}:{k.value}" for g, k in zip(gates, kinds))


class _Campaign:
    def __init__(self, config: CampaignConfig):
        self.config = config
        net = config.netlist
        self.net = net
        self.sim = net.simulator
        inputs = net.inputs
        if "x" not in inputs or "z" not in net.outputs:
            raise ConfigError("netlist", "campaign netlists need input bus 'x' and output bus 'z'")
        self.has_y = "y" in inputs
        self.has_c = "c" in inputs
        if config.oracle.uses_control and not self.has_c:
            raise ConfigError("oracle", "op-code oracle needs a control bus 'c' on the netlist")
        code = config.decode
        self.width = code.k if code else config.oracle.width
        if config.oracle.width != self.width:
            raise ConfigError("oracle", f"oracle width {config.oracle.width} != data width {self.width}")
        self.bus_width = inputs["x"]
        expected = code.n if code else self.width
        if self.bus_width != expected or (self.has_y and inputs["y"] != expected):
            raise ConfigError("netlist", f"operand buses must be {expected} bits wide")
        if len(net.outputs["z"]) != expected:
            raise ConfigError("netlist", f"output bus z must be {expected} bits wide")
        if config.budget < 0:
            raise ConfigError("budget", "must be >= 0")
        if any(c < 0 or c > config.budget for c in config.counts()):
            raise ConfigError("fault_mode", f"fault counts {config.counts()} exceed budget {config.budget}")
        if not config.fault_kinds:
            raise ConfigError("fault_mode", "no fault kinds enabled")
        targets = net.gate_ids(config.include_roles, config.exclude_roles)
        if config.distinct_cones:
            cones = net.cones
            targets = [g for g in targets if len(cones[g]) == 1]
            groups: dict = {}
            for g in targets:
                groups.setdefault(next(iter(cones[g])), []).append(g)
            self.groups = [groups[key] for key in sorted(groups)]
        else:
            self.groups = None
        self.targets = targets

    # ------------------------------------------------------------------ inputs

    def input_bits(self) -> int:
        return self.width * (2 if self.has_y else 1) + (2 if self.has_c else 0)

    def exhaustive_inputs(self):
        if self.input_bits() > EXHAUSTIVE_INPUT_BITS:
            raise BoundExceeded(
                f"{self.input_bits()} input bits exceed the exhaustive bound of {EXHAUSTIVE_INPUT_BITS}"
            )
        w = self.width
        idx = np.arange(1 << self.input_bits(), dtype=np.int64)
        a = idx & ((1 << w) - 1)
        b = (idx >> w) & ((1 << w) - 1) if self.has_y else np.zeros_like(idx)
        shift = w * (2 if self.has_y else 1)
        c = (idx >> shift) & 3 if self.has_c else np.zeros_like(idx)
        return a, b, c

    def _draw_operands(self, rng):
        top = 1 << self.width
        a = int(rng.integers(0, top))
        b = int(rng.integers(0, top)) if self.has_y else 0
        c = int(rng.integers(0, 4)) if self.has_c else 0
        return a, b, c

    def sampled_inputs(self):
        cfg = self.config
        a = np.empty(cfg.trials, dtype=np.int64)
        b = np.empty_like(a)
        c = np.empty_like(a)
        for j in range(cfg.trials):
            a[j], b[j], c[j] = self._draw_operands(_rng(cfg.seed, j))
        return a, b, c

    def inputs(self):
        if self.config.input_mode == "exhaustive":
            return self.exhaustive_inputs()
        if self.config.input_mode == "random":
            return self.sampled_inputs()
        raise ConfigError("input_mode", f"unknown input mode {self.config.input_mode!r}")

    def bus_arrays(self, a, b, c, input_errors=None) -> dict[str, np.ndarray]:
        code = self.config.decode
        if code is not None:
            xw, yw = encode_array(a, code), encode_array(b, code)
        else:
            xw, yw = a, b
        x = _bits(xw, self.bus_width)
        arrays = {"x": x}
        if self.has_y:
            arrays["y"] = _bits(yw, self.bus_width)
        if input_errors is not None:
            arrays["x"] = arrays["x"] ^ input_errors[:, : self.bus_width]
            if self.has_y:
                arrays["y"] = arrays["y"] ^ input_errors[:, self.bus_width :]
        if self.has_c:
            arrays["c"] = _bits(c, 2)
        return arrays

    # ------------------------------------------------------------------ classification

    def classify_batch(self, faulty: np.ndarray, golden: np.ndarray, expected: np.ndarray) -> np.ndarray:
        code = self.config.decode
        if code is not None:
            data, ok = decode_array(faulty, code)
        else:
            data, ok = faulty, np.ones(len(faulty), dtype=bool)
        out = np.full(len(faulty), _CODE[TrialOutcome.CORRECTED], dtype=np.int8)
        out[faulty == golden] = _CODE[TrialOutcome.MASKED]
        out[data != expected] = _CODE[TrialOutcome.SILENT_WRONG]
        out[~ok] = _CODE[TrialOutcome.DETECTED_UNCORRECTABLE]
        return out

    def z_words(self, values) -> np.ndarray:
        return _pack(self.sim.outputs(values)["z"])

    # ------------------------------------------------------------------ fault sets

    def enumerate_fault_sets(self, order: int):
        """Every set of ``order`` distinct target gates (in distinct cones if configured) x kinds."""
        if order == 0:
            return [((), ())]
        cones = self.net.cones
        sets = []
        for gates in combinations(self.targets, order):
            if self.config.distinct_cones and len({cones[g] for g in gates}) < order:
                continue
            for kinds in product(self.config.fault_kinds, repeat=order):
                sets.append((gates, kinds))
        return sets

    def draw_faults(self, rng):
        cfg = self.config
        counts = cfg.counts()
        nf = int(counts[rng.integers(0, len(counts))]) if len(counts) > 1 else counts[0]
        if nf == 0:
            return (), ()
        if self.groups is not None:
            if nf > len(self.groups):
                raise ConfigError("fault_mode", f"{nf} faults but only {len(self.groups)} distinct cones")
            picks = rng.choice(len(self.groups), size=nf, replace=False)
            gates = [self.groups[p][int(rng.integers(0, len(self.groups[p])))] for p in picks]
        else:
            if nf > len(self.targets):
                raise ConfigError("fault_mode", f"{nf} faults but only {len(self.targets)} target gates")
            gates = [self.targets[p] for p in rng.choice(len(self.targets), size=nf, replace=False)]
        kinds = [cfg.fault_kinds[int(rng.integers(0, len(cfg.fault_kinds)))] for _ in gates]
        order = np.argsort(gates, kind="stable")
        return tuple(int(gates[i]) for i in order), tuple(kinds[i] for i in order)

    def draw_input_errors(self, rng) -> np.ndarray:
        w = self.config.input_error_weight
        total = self.bus_width * (2 if self.has_y else 1)
        row = np.zeros(total, dtype=bool)
        if w:
            if w > total:
                raise ConfigError("input_error_weight", f"{w} exceeds {total} operand bits")
            row[rng.choice(total, size=w, replace=False)] = True
        return row

    # ------------------------------------------------------------------ runners

    def failure_record(self, trial, a, b, c, gates, kinds, outcome) -> dict:
        rec = {
            "trial": int(trial),
            "a": int(a),
            "b": int(b),
            "gates": [int(g) for g in gates],
            "kinds": [k.value for k in kinds],
            "outcome": OUTCOMES[int(outcome)].value,
        }
        if self.has_c:
            rec["c"] = int(c)
        return rec

    def run_enumerated(self, fault_sets) -> CampaignReport:
        if self.config.input_error_weight:
            raise ConfigError("input_error_weight", "input errors need the random fault mode")
        a, b, c = self.inputs()
        n_in = len(a)
        arrays = self.bus_arrays(a, b, c)
        golden_vals = self.sim.run(arrays)
        golden = self.z_words(golden_vals)
        expected = self.config.oracle.compute(a, b, c)
        report = CampaignReport.empty(self.config.describe())
        totals = np.zeros(len(OUTCOMES), dtype=np.int64)
        by_fault = {}
        first = None
        fail_codes = (_CODE[TrialOutcome.SILENT_WRONG], _CODE[TrialOutcome.DETECTED_UNCORRECTABLE])
        for set_idx, (gates, kinds) in enumerate(fault_sets):
            fmap = {}
            for g, k in zip(gates, kinds):
                fmap.setdefault(g, []).append((k, None))
            values = self.sim.run(arrays, fmap, golden=golden_vals)
            faulty = self.z_words(values)
            outcome = self.classify_batch(faulty, golden, expected)
            totals += np.bincount(outcome, minlength=len(OUTCOMES))
            sw = int(np.count_nonzero(outcome == fail_codes[0]))
            if sw:
                label = _fault_label(gates, kinds)
                by_fault[label] = by_fault.get(label, 0) + sw
            if first is None:
                bad = np.flatnonzero(np.isin(outcome, fail_codes))
                if len(bad):
                    i = int(bad[0])
                    first = self.failure_record(set_idx * n_in + i, a[i], b[i], c[i], gates, kinds, outcome[i])
        report.counts = {o: int(totals[i]) for i, o in enumerate(OUTCOMES)}
        report.trials = n_in * len(fault_sets)
        report.silent_wrong_by_fault = dict(sorted(by_fault.items()))
        report.first_failure = first
        return report

    def run_random_range(self, start: int, stop: int) -> CampaignReport:
        cfg = self.config
        report = CampaignReport.empty(cfg.describe())
        fail_codes = (_CODE[TrialOutcome.SILENT_WRONG], _CODE[TrialOutcome.DETECTED_UNCORRECTABLE])
        if cfg.input_mode == "exhaustive":
            ea, eb, ec = self.exhaustive_inputs()
        for lo in range(start, stop, CHUNK):
            hi = min(stop, lo + CHUNK)
            size = hi - lo
            a = np.empty(size, dtype=np.int64)
            b = np.empty_like(a)
            c = np.empty_like(a)
            errs = np.zeros((size, self.bus_width * (2 if self.has_y else 1)), dtype=bool)
            trial_faults = []
            for j in range(size):
                rng = _rng(cfg.seed, lo + j)
                if cfg.input_mode == "exhaustive":
                    pick = (lo + j) % len(ea)
                    a[j], b[j], c[j] = ea[pick], eb[pick], ec[pick]
                else:
                    a[j], b[j], c[j] = self._draw_operands(rng)
                errs[j] = self.draw_input_errors(rng)
                trial_faults.append(self.draw_faults(rng))
            masks: dict[tuple[int, FaultKind], np.ndarray] = {}
            for j, (gates, kinds) in enumerate(trial_faults):
                for g, k in zip(gates, kinds):
                    masks.setdefault((g, k), np.zeros(size, dtype=bool))[j] = True
            fmap: dict[int, list] = {}
            for (g, k), mask in sorted(masks.items(), key=lambda item: (item[0][0], item[0][1].value)):
                fmap.setdefault(g, []).append((k, mask))
            clean = self.bus_arrays(a, b, c)
            golden = self.z_words(self.sim.run(clean))
            noisy = self.bus_arrays(a, b, c, errs) if cfg.input_error_weight else clean
            faulty = self.z_words(self.sim.run(noisy, fmap))
            expected = cfg.oracle.compute(a, b, c)
            outcome = self.classify_batch(faulty, golden, expected)
            part = CampaignReport.empty(report.config)
            totals = np.bincount(outcome, minlength=len(OUTCOMES))
            part.counts = {o: int(totals[i]) for i, o in enumerate(OUTCOMES)}
            part.trials = size
            by_fault = {}
            for j in np.flatnonzero(outcome == fail_codes[0]):
                label = _fault_label(*trial_faults[j])
                by_fault[label] = by_fault.get(label, 0) + 1
            part.silent_wrong_by_fault = by_fault
            bad = np.flatnonzero(np.isin(outcome, fail_codes))
            if len(bad):
                j = int(bad[0])
                part.first_failure = self.failure_record(lo + j, a[j], b[j], c[j], *trial_faults[j], outcome[j])
            report = report.merge(part)
        return report


def _rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, trial]))


# --------------------------------------------------------------------------- public entry points


def run_exhaustive_single_fault(config: CampaignConfig) -> CampaignReport:
    """Every input x every target gate x every enabled fault kind."""
    if config.input_mode != "exhaustive":
        raise ConfigError("input_mode", "exhaustive single-fault sweeps need exhaustive inputs")
    camp = _Campaign(config)
    return camp.run_enumerated(camp.enumerate_fault_sets(1))


def run_enumerated(config: CampaignConfig) -> CampaignReport:
    """All fault sets of size ``fault_order`` over exhaustive or sampled inputs."""
    camp = _Campaign(config)
    return camp.run_enumerated(camp.enumerate_fault_sets(config.fault_order))


def run_fault_free(config: CampaignConfig) -> CampaignReport:
    """Golden-only pass: every trial is Masked unless the netlist disagrees with the oracle."""
    camp = _Campaign(config)
    return camp.run_enumerated([((), ())])


def _range_worker(args):
    config, start, stop = args
    return _Campaign(config).run_random_range(start, stop)


def run_random_campaign(config: CampaignConfig, workers: int = 1) -> CampaignReport:
    """``config.trials`` random trials; identical for any ``workers`` count."""
    camp = _Campaign(config)
    if workers <= 1 or config.trials <= CHUNK:
        return camp.run_random_range(0, config.trials)
    bounds = list(range(0, config.trials, CHUNK)) + [config.trials]
    jobs = [(config, lo, hi) for lo, hi in zip(bounds, bounds[1:])]
    report = CampaignReport.empty(config.describe())
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_range_worker, jobs):
            report = report.merge(part)
    return report


def run_campaign(config: CampaignConfig, workers: int = 1) -> CampaignReport:
    if config.fault_mode == "exhaustive_single":
        return run_exhaustive_single_fault(config)
    if config.fault_mode == "exhaustive":
        return run_enumerated(config)
    if config.fault_mode == "random":
        return run_random_campaign(config, workers)
    raise ConfigError("fault_mode", f"unknown fault mode {config.fault_mode!r}")


def merge_reports(reports: Sequence[CampaignReport]) -> CampaignReport:
    it = iter(reports)
    out = next(it)
    for r in it:
        out = out.merge(r)
    return out
