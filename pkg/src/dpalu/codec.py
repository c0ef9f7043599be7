"""Systematic linear block codes: Hamming, extended Hamming, BCH and Reed-Solomon.

Every codeword is laid out as ``[data | parity]``: units ``0..k-1`` carry the
data verbatim and units ``k..n-1`` the parity.  For the cyclic codes (BCH, RS)
unit ``p`` holds the coefficient of ``x^((p + n - k) mod n)``, so the layout is
the usual ``x^(n-k) d(x) + rem`` encoding rotated to put data first.

Binary codes also expose a parity matrix ``P`` with ``parity = P . data`` over
GF(2); the parity-check matrix is then ``H = [P | I]`` and the binary syndrome
of a word is ``P . data XOR parity``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .errors import LengthMismatch, TooLarge, Uncorrectable, UnsupportedCode
from .gf2m import GF8, GF16, DEFAULT_FIELDS, FastField, FieldSpec, degree, poly_mod

BRUTE_FORCE_LIMIT = 20
SYNDROME_TABLE_LIMIT = 16


class CodeKind(enum.Enum):
    HAMMING = "Hamming"
    EXTENDED_HAMMING = "ExtendedHamming"
    BCH = "BCH"
    RS = "RS"


HAMMING_FAMILY = (CodeKind.HAMMING, CodeKind.EXTENDED_HAMMING)
BINARY_KINDS = (CodeKind.HAMMING, CodeKind.EXTENDED_HAMMING, CodeKind.BCH)


@dataclass(frozen=True)
class CodeSpec:
    kind: CodeKind
    n: int
    k: int
    t: int
    name: str = ""
    field: FieldSpec | None = None
    # (n-k) rows of k bits each; binary codes only
    parity_matrix: tuple[tuple[int, ...], ...] | None = dc_field(default=None, repr=False)
    # low-order coefficient first; BCH and RS only
    generator_poly: tuple[int, ...] | None = dc_field(default=None, repr=False)

    @property
    def is_binary(self) -> bool:
        return self.kind in BINARY_KINDS

    @property
    def parity_len(self) -> int:
        return self.n - self.k

    def correctable_distance(self) -> int:
        return self.t

    @cached_property
    def parity_columns(self) -> tuple[int, ...]:
        """Parity contribution of each data bit, packed as an int over the n-k rows."""
        if self.parity_matrix is None:
            raise UnsupportedCode(f"{self.label} has no binary parity matrix")
        cols = []
        for i in range(self.k):
            col = 0
            for j, row in enumerate(self.parity_matrix):
                if row[i]:
                    col |= 1 << j
            cols.append(col)
        return tuple(cols)

    @cached_property
    def _fast(self) -> FastField:
        return FastField(self.field)

    @cached_property
    def _hamming_lookup(self) -> dict[int, int]:
        # syndrome -> position of the single flipped unit
        table = {}
        for i, col in enumerate(self.parity_columns):
            table[col] = i
        for j in range(self.parity_len):
            table[1 << j] = self.k + j
        return table

    @cached_property
    def _syndrome_arrays(self):
        table = syndrome_table(self)
        err = np.zeros(1 << self.parity_len, dtype=np.int64)
        bad = np.zeros(1 << self.parity_len, dtype=bool)
        for s, positions in table.items():
            if positions is None:
                bad[s] = True
            else:
                err[s] = sum(1 << p for p in positions)
        return err, bad

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        return f"{self.kind.value}({self.n},{self.k})"

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class Codeword:
    spec: CodeSpec
    units: tuple[int, ...]

    def __post_init__(self):
        if len(self.units) != self.spec.n:
            raise LengthMismatch(f"codeword has {len(self.units)} units, code length is {self.spec.n}")

    @property
    def data(self) -> tuple[int, ...]:
        return self.units[: self.spec.k]

    @property
    def parity(self) -> tuple[int, ...]:
        return self.units[self.spec.k :]

    def __len__(self):
        return len(self.units)

    def __iter__(self):
        return iter(self.units)

    def __getitem__(self, i):
        return self.units[i]

    def to_int(self) -> int:
        """Binary codes only: unit p becomes bit p."""
        return bits_to_int(self.units)


class Correction(NamedTuple):
    data: tuple[int, ...]
    errors_found: tuple[int, ...]


def bits_to_int(bits: Sequence[int]) -> int:
    value = 0
    for i, b in enumerate(bits):
        if b:
            value |= 1 << i
    return value


def int_to_bits(value: int, width: int) -> tuple[int, ...]:
    return tuple((value >> i) & 1 for i in range(width))


# --------------------------------------------------------------------------- construction


def _hamming_parity_bits(k: int) -> int:
    h = 1
    while (1 << h) < k + h + 1:
        h += 1
    return h


def _hamming_columns(h: int, k: int) -> list[int]:
    cols = [v for v in range(1, 1 << h) if bin(v).count("1") >= 2][:k]
    if len(cols) < k:
        raise ValueError(f"{h} parity bits cannot protect {k} data bits")
    return cols


def _rows_from_columns(cols: Sequence[int], rows: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple((c >> j) & 1 for c in cols) for j in range(rows))


def hamming(k: int, name: str = "") -> CodeSpec:
    """SEC Hamming code with k data bits; shortened when k is not 2^h - h - 1."""
    h = _hamming_parity_bits(k)
    cols = _hamming_columns(h, k)
    return CodeSpec(
        CodeKind.HAMMING, k + h, k, 1, name=name, parity_matrix=_rows_from_columns(cols, h)
    )


def extended_hamming(k: int, name: str = "") -> CodeSpec:
    """SEC-DED code: Hamming plus an overall parity bit (all H columns odd weight)."""
    h = _hamming_parity_bits(k)
    cols = []
    for c in _hamming_columns(h, k):
        overall = (1 + bin(c).count("1")) & 1
        cols.append(c | (overall << h))
    return CodeSpec(
        CodeKind.EXTENDED_HAMMING,
        k + h + 1,
        k,
        1,
        name=name,
        parity_matrix=_rows_from_columns(cols, h + 1),
    )


def _gf2_poly_mul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def _minimal_polynomial(i: int, ff: FastField) -> int:
    """Minimal polynomial of alpha^i over GF(2), as a GF(2) bit mask."""
    coset = []
    e = i % ff.order
    while e not in coset:
        coset.append(e)
        e = (e * 2) % ff.order
    poly = [1]
    for e in coset:
        poly = ff.poly_mul(poly, [ff.alpha_pow(e), 1])
    if any(c not in (0, 1) for c in poly):
        raise ArithmeticError("minimal polynomial has non-binary coefficients")
    return bits_to_int(poly)


def _check_primitive(field: FieldSpec) -> None:
    if not field.is_primitive():
        raise UnsupportedCode(f"{field!r}: x is not primitive, cyclic codes need a primitive element")


def bch(m: int, t: int, field: FieldSpec | None = None, name: str = "") -> CodeSpec:
    """Narrow-sense primitive binary BCH code of length 2^m - 1."""
    field = field or DEFAULT_FIELDS.get(m)
    if field is None or field.m != m:
        raise UnsupportedCode(f"no field of degree {m} supplied")
    _check_primitive(field)
    ff = FastField(field)
    n = field.size - 1
    gen = 1
    used = set()
    for i in range(1, 2 * t + 1):
        mp = _minimal_polynomial(i, ff)
        if mp not in used:
            used.add(mp)
            gen = _gf2_poly_mul(gen, mp)
    k = n - degree(gen)
    if k <= 0 or 2 * t > n - k:
        raise UnsupportedCode(f"BCH(n={n}, t={t}) leaves no data bits")
    if poly_mod((1 << n) | 1, gen) != 0:
        raise ArithmeticError("generator does not divide x^n - 1")
    gen_coeffs = int_to_bits(gen, degree(gen) + 1)
    # parity of each unit data vector through the polynomial encoder
    cols = []
    for i in range(k):
        rem = poly_mod(1 << (n - k + i), gen)
        cols.append(rem)
    return CodeSpec(
        CodeKind.BCH,
        n,
        k,
        t,
        name=name,
        field=field,
        parity_matrix=_rows_from_columns(cols, n - k),
        generator_poly=gen_coeffs,
    )


def rs(m: int, t: int, field: FieldSpec | None = None, name: str = "") -> CodeSpec:
    """Reed-Solomon code over GF(2^m) with roots alpha^1 .. alpha^(2t)."""
    field = field or DEFAULT_FIELDS.get(m)
    if field is None or field.m != m:
        raise UnsupportedCode(f"no field of degree {m} supplied")
    _check_primitive(field)
    ff = FastField(field)
    n = field.size - 1
    k = n - 2 * t
    if k <= 0:
        raise UnsupportedCode(f"RS(n={n}, t={t}) leaves no data symbols")
    gen = [1]
    for i in range(1, 2 * t + 1):
        gen = ff.poly_mul(gen, [ff.alpha_pow(i), 1])
    return CodeSpec(CodeKind.RS, n, k, t, name=name, field=field, generator_poly=tuple(gen))


_PRESET_FACTORIES = {
    "hamming7_4": lambda: hamming(4, name="hamming7_4"),
    "exthamming8_4": lambda: extended_hamming(4, name="exthamming8_4"),
    "hamming38_32": lambda: hamming(32, name="hamming38_32"),
    "exthamming39_32": lambda: extended_hamming(32, name="exthamming39_32"),
    "bch15_7": lambda: bch(4, 2, GF16, name="bch15_7"),
    "rs7_3": lambda: rs(3, 2, GF8, name="rs7_3"),
}
PRESETS = tuple(_PRESET_FACTORIES)
_preset_cache: dict[str, CodeSpec] = {}


def get_code(name: str) -> CodeSpec:
    """Shipped code by name; one shared instance per process."""
    if name not in _PRESET_FACTORIES:
        raise UnsupportedCode(f"unknown code {name!r}; choose from {', '.join(PRESETS)}")
    if name not in _preset_cache:
        _preset_cache[name] = _PRESET_FACTORIES[name]()
    return _preset_cache[name]


# --------------------------------------------------------------------------- encode / syndrome


def _units(word, spec: CodeSpec) -> tuple[int, ...]:
    units = tuple(word.units) if isinstance(word, Codeword) else tuple(int(u) for u in word)
    if len(units) != spec.n:
        raise LengthMismatch(f"word has {len(units)} units, {spec.label} has length {spec.n}")
    return units


def _check_units(units: Sequence[int], spec: CodeSpec) -> None:
    top = 2 if spec.is_binary else spec.field.size
    for u in units:
        if not 0 <= u < top:
            raise ValueError(f"unit value {u} out of range for {spec.label}")


def _binary_parity(data: Sequence[int], spec: CodeSpec) -> int:
    acc = 0
    for bit, col in zip(data, spec.parity_columns):
        if bit:
            acc ^= col
    return acc


def _cyclic_parity(data: Sequence[int], spec: CodeSpec) -> list[int]:
    """Remainder of x^(n-k) d(x) by the generator, via LFSR-style long division."""
    ff = spec._fast
    g = spec.generator_poly
    r = spec.parity_len
    rem = [0] * r
    # feed data from the highest exponent down
    for d in reversed(data):
        feedback = d ^ rem[r - 1]
        for j in range(r - 1, 0, -1):
            rem[j] = rem[j - 1] ^ ff.mul(feedback, g[j])
        rem[0] = ff.mul(feedback, g[0])
    return rem


def encode(data: Sequence[int], spec: CodeSpec) -> Codeword:
    data = tuple(int(d) for d in data)
    if len(data) != spec.k:
        raise LengthMismatch(f"data has {len(data)} units, {spec.label} carries {spec.k}")
    _check_units(data, spec)
    if spec.kind in HAMMING_FAMILY:
        parity = int_to_bits(_binary_parity(data, spec), spec.parity_len)
    else:
        parity = tuple(_cyclic_parity(data, spec))
    return Codeword(spec, data + parity)


def syndrome(word, spec: CodeSpec) -> tuple[int, ...]:
    """Binary syndrome ``P.data XOR parity`` (n-k bits), or 2t GF values for RS."""
    units = _units(word, spec)
    _check_units(units, spec)
    if spec.is_binary:
        s = _binary_parity(units[: spec.k], spec) ^ bits_to_int(units[spec.k :])
        return int_to_bits(s, spec.parity_len)
    return tuple(_power_syndromes(units, spec))


def _exponent(position: int, spec: CodeSpec) -> int:
    return (position + spec.n - spec.k) % spec.n


def _position(exponent: int, spec: CodeSpec) -> int:
    return (exponent - (spec.n - spec.k)) % spec.n


def _power_syndromes(units: Sequence[int], spec: CodeSpec) -> list[int]:
    """S_i = w(alpha^i) for i = 1..2t."""
    ff = spec._fast
    out = []
    for i in range(1, 2 * spec.t + 1):
        acc = 0
        for p, u in enumerate(units):
            if u:
                acc ^= ff.mul(u, ff.alpha_pow(i * _exponent(p, spec)))
        out.append(acc)
    return out


# --------------------------------------------------------------------------- decoding


def _berlekamp_massey(synd: Sequence[int], ff: FastField) -> list[int]:
    """Shortest LFSR (error locator, low-order first) generating the syndromes."""
    locator = [1]
    prev = [1]
    length = 0
    shift = 1
    prev_disc = 1
    for step, s in enumerate(synd):
        disc = s
        for i in range(1, length + 1):
            if i < len(locator):
                disc ^= ff.mul(locator[i], synd[step - i])
        if disc == 0:
            shift += 1
            continue
        coef = ff.mul(disc, ff.inv(prev_disc))
        updated = locator + [0] * max(0, len(prev) + shift - len(locator))
        for i, b in enumerate(prev):
            updated[i + shift] ^= ff.mul(coef, b)
        if 2 * length <= step:
            prev = locator
            length = step + 1 - length
            prev_disc = disc
            shift = 1
        else:
            shift += 1
        locator = updated
    while len(locator) > 1 and locator[-1] == 0:
        locator.pop()
    if len(locator) - 1 != length:
        # degree below the LFSR length: no consistent error pattern
        return []
    return locator


def _chien(locator: Sequence[int], spec: CodeSpec) -> list[int]:
    """Exponents e with locator(alpha^-e) == 0."""
    ff = spec._fast
    return [e for e in range(spec.n) if ff.poly_eval(locator, ff.alpha_pow(-e)) == 0]


def _locate(units: Sequence[int], spec: CodeSpec):
    synd = _power_syndromes(units, spec)
    if not any(synd):
        return synd, [], []
    locator = _berlekamp_massey(synd, spec._fast)
    nerr = len(locator) - 1
    if nerr < 1 or nerr > spec.t:
        raise Uncorrectable(f"{spec.label}: syndrome needs more than {spec.t} errors")
    roots = _chien(locator, spec)
    if len(roots) != nerr:
        raise Uncorrectable(f"{spec.label}: locator has {len(roots)} roots, expected {nerr}")
    return synd, locator, roots


def _forney(synd, locator, exponent: int, spec: CodeSpec) -> int:
    """Error magnitude at X = alpha^exponent, first consecutive root alpha^1."""
    ff = spec._fast
    two_t = 2 * spec.t
    omega = ff.poly_mul(list(synd), list(locator))[:two_t]
    deriv = [locator[i] if i % 2 == 1 else 0 for i in range(1, len(locator))]
    x_inv = ff.alpha_pow(-exponent)
    denom = ff.poly_eval(deriv, x_inv)
    if denom == 0:
        raise Uncorrectable(f"{spec.label}: repeated locator root")
    return ff.mul(ff.poly_eval(omega, x_inv), ff.inv(denom))


def correct(word, spec: CodeSpec) -> Correction:
    """Bounded-distance decode.  Raises Uncorrectable beyond the code's radius."""
    units = list(_units(word, spec))
    _check_units(units, spec)
    if spec.kind in HAMMING_FAMILY:
        s = _binary_parity(units[: spec.k], spec) ^ bits_to_int(units[spec.k :])
        if s == 0:
            return Correction(tuple(units[: spec.k]), ())
        pos = spec._hamming_lookup.get(s)
        if pos is None:
            raise Uncorrectable(f"{spec.label}: syndrome {s:#x} matches no single-bit error")
        units[pos] ^= 1
        return Correction(tuple(units[: spec.k]), (pos,))

    synd, locator, roots = _locate(units, spec)
    positions = []
    for e in roots:
        p = _position(e, spec)
        if spec.kind is CodeKind.BCH:
            units[p] ^= 1
        else:
            units[p] ^= _forney(synd, locator, e, spec)
        positions.append(p)
    if any(_power_syndromes(units, spec)):
        raise Uncorrectable(f"{spec.label}: correction did not reach a codeword")
    return Correction(tuple(units[: spec.k]), tuple(sorted(positions)))


def syndrome_table(spec: CodeSpec) -> dict[int, tuple[int, ...] | None]:
    """Decoder response to every binary syndrome: corrected positions, or None.

    Bounded-distance decoding of a linear code depends on the syndrome only, so
    running ``correct`` on the word with zero data and parity ``s`` yields the
    error pattern chosen for every word with syndrome ``s``.
    """
    if not spec.is_binary:
        raise UnsupportedCode(f"{spec.label} is not binary")
    if spec.parity_len > SYNDROME_TABLE_LIMIT:
        raise TooLarge(f"{spec.label}: 2^{spec.parity_len} syndromes")
    table = {}
    zeros = (0,) * spec.k
    for s in range(1 << spec.parity_len):
        try:
            table[s] = correct(zeros + int_to_bits(s, spec.parity_len), spec).errors_found
        except Uncorrectable:
            table[s] = None
    return table


# --------------------------------------------------------------------------- distance


def min_distance(spec: CodeSpec) -> int:
    if spec.kind is CodeKind.RS:
        return spec.n - spec.k + 1
    if spec.k > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"{spec.label}: 2^{spec.k} codewords exceed the brute-force bound")
    cols = spec.parity_columns
    best = spec.n
    parity = 0
    # Gray-code walk: consecutive data words differ in one bit
    for i in range(1, 1 << spec.k):
        flip = (i & -i).bit_length() - 1
        parity ^= cols[flip]
        gray = i ^ (i >> 1)
        best = min(best, bin(gray).count("1") + bin(parity).count("1"))
    return best


# --------------------------------------------------------------------------- batch helpers


def encode_array(data: np.ndarray, spec: CodeSpec) -> np.ndarray:
    """Vectorised binary encode: data ints -> word ints (bit p = unit p)."""
    data = np.asarray(data, dtype=np.int64)
    parity = np.zeros_like(data)
    for i, col in enumerate(spec.parity_columns):
        parity ^= np.where((data >> i) & 1, col, 0)
    return data | (parity << spec.k)


def decode_array(words: np.ndarray, spec: CodeSpec) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised binary decode through the syndrome table.

    Returns ``(data, ok)``; ``data`` is meaningless where ``ok`` is False.
    """
    words = np.asarray(words, dtype=np.int64)
    data_mask = (1 << spec.k) - 1
    data = words & data_mask
    s = (words >> spec.k) ^ (encode_array(data, spec) >> spec.k)
    err, bad = spec._syndrome_arrays
    fixed = words ^ err[s]
    return fixed & data_mask, ~bad[s]
