"""Arithmetic in GF(2^m) using a polynomial basis.

Elements are plain ints in ``[0, 2**m)``; bit i is the coefficient of x^i.
Addition is XOR and is not wrapped in a function.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .errors import ZeroInverse

GfElement = int

MAX_DEGREE = 16


def degree(poly: int) -> int:
    """Degree of a GF(2)[x] polynomial given as a bit mask (-1 for zero)."""
    return poly.bit_length() - 1


def poly_mod(a: int, b: int) -> int:
    """Remainder of a / b over GF(2)."""
    db = degree(b)
    if db < 0:
        raise ZeroDivisionError("polynomial modulus is zero")
    da = degree(a)
    while da >= db:
        a ^= b << (da - db)
        da = degree(a)
    return a


def is_irreducible(poly: int) -> bool:
    """Trial division by every polynomial of degree <= deg/2."""
    m = degree(poly)
    if m < 1:
        return False
    for d in range(1, m // 2 + 1):
        for f in range(1 << d, 1 << (d + 1)):
            if poly_mod(poly, f) == 0:
                return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    m: int
    reduction_poly: int

    def __post_init__(self):
        if not 1 <= self.m <= MAX_DEGREE:
            raise ValueError(f"extension degree must be in 1..{MAX_DEGREE}, got {self.m}")
        if degree(self.reduction_poly) != self.m:
            raise ValueError(
                f"reduction polynomial {self.reduction_poly:#x} does not have degree {self.m}"
            )
        if not is_irreducible(self.reduction_poly):
            raise ValueError(f"reduction polynomial {self.reduction_poly:#x} is reducible")

    @property
    def size(self) -> int:
        return 1 << self.m

    def __contains__(self, value) -> bool:
        return isinstance(value, int) and 0 <= value < self.size

    @cached_property
    def _exp_log(self):
        # Antilog/log tables over the powers of x; only meaningful when x is primitive.
        order = self.size - 1
        exp = [0] * (2 * order)
        log = [0] * self.size
        v = 1
        for i in range(order):
            exp[i] = v
            log[v] = i
            v = gf_mul(v, 2 if self.m > 1 else 1, self)
        for i in range(order, 2 * order):
            exp[i] = exp[i - order]
        return tuple(exp), tuple(log)

    def is_primitive(self) -> bool:
        """True when x generates the whole multiplicative group."""
        if self.m == 1:
            return True
        v, period = 2, 1
        while v != 1:
            v = gf_mul(v, 2, self)
            period += 1
        return period == self.size - 1

    @property
    def exp(self) -> tuple[int, ...]:
        return self._exp_log[0]

    @property
    def log(self) -> tuple[int, ...]:
        return self._exp_log[1]

    def __repr__(self):
        return f"FieldSpec(m={self.m}, reduction_poly={self.reduction_poly:#x})"


GF8 = FieldSpec(3, 0b1011)  # x^3 + x + 1
GF16 = FieldSpec(4, 0b10011)  # x^4 + x + 1
GF256 = FieldSpec(8, 0x11D)  # x^8 + x^4 + x^3 + x^2 + 1

DEFAULT_FIELDS = {3: GF8, 4: GF16, 8: GF256}


def _check(a: int, field: FieldSpec) -> None:
    if not 0 <= a < field.size:
        raise ValueError(f"{a} is not an element of GF(2^{field.m})")


def gf_mul(a: GfElement, b: GfElement, field: FieldSpec) -> GfElement:
    """Shift-and-add multiply with reduction folded into every shift."""
    _check(a, field)
    _check(b, field)
    top = field.size
    poly = field.reduction_poly
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= poly
    return result


def gf_pow(a: GfElement, e: int, field: FieldSpec) -> GfElement:
    _check(a, field)
    if e < 0:
        a = gf_inv(a, field)
        e = -e
    if a == 0:
        return 1 if e == 0 else 0
    e %= field.size - 1
    result = 1
    while e:
        if e & 1:
            result = gf_mul(result, a, field)
        a = gf_mul(a, a, field)
        e >>= 1
    return result


def gf_inv(a: GfElement, field: FieldSpec) -> GfElement:
    """Multiplicative inverse via a^(2^m - 2)."""
    _check(a, field)
    if a == 0:
        raise ZeroInverse("zero has no multiplicative inverse")
    return gf_pow(a, field.size - 2, field)


class FastField:
    """Log/antilog multiply for decoder inner loops; needs a primitive field."""

    def __init__(self, field: FieldSpec):
        if not field.is_primitive():
            raise ValueError(f"{field!r} is not primitive; log tables are undefined")
        self.field = field
        self.order = field.size - 1
        self.exp = field.exp
        self.log = field.log

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self.exp[self.log[a] + self.log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroInverse("zero has no multiplicative inverse")
        return self.exp[(self.order - self.log[a]) % self.order]

    def alpha_pow(self, e: int) -> int:
        return self.exp[e % self.order]

    def poly_eval(self, coeffs, x: int) -> int:
        """Horner evaluation; coeffs are low-order first."""
        acc = 0
        for c in reversed(coeffs):
            acc = self.mul(acc, x) ^ c
        return acc

    def poly_mul(self, p, q):
        out = [0] * (len(p) + len(q) - 1)
        for i, a in enumerate(p):
            if a:
                for j, b in enumerate(q):
                    out[i + j] ^= self.mul(a, b)
        return out
