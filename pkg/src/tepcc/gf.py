"""Binary polynomials and GF(2^m) arithmetic.

Bit order is the same everywhere in the package: bit ``i`` of an integer is
the coefficient of ``x**i``.  Binary polynomials, EPCC signatures and field
elements in polynomial basis all share that convention, which is what makes
the bit-vector <-> field-symbol mapping a plain repacking.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

# Fixed primitive polynomials per extension degree (bit i = coefficient of x^i).
PRIMITIVE_POLYS: dict[int, int] = {
    1: 0b11,  # 1 + x
    2: 0b111,  # 1 + x + x^2
    3: 0b1011,  # 1 + x + x^3
    4: 0b10011,  # 1 + x + x^4
    5: 0b100101,  # 1 + x^2 + x^5
    6: 0b1000011,  # 1 + x + x^6
    7: 0b10001001,  # 1 + x^3 + x^7
    8: 0b100011101,  # 1 + x^2 + x^3 + x^4 + x^8
    9: 0b1000010001,  # 1 + x^4 + x^9
    10: 0b10000001001,  # 1 + x^3 + x^10
    11: 0b100000000101,  # 1 + x^2 + x^11
    12: 0b1000001010011,  # 1 + x + x^4 + x^6 + x^12
}


@dataclass(frozen=True)
class Gf2Poly:
    """Polynomial over GF(2) stored as an integer bit mask."""

    bits: int = 0

    def __post_init__(self):
        if self.bits < 0:
            raise ValueError("polynomial mask must be non-negative")

    @classmethod
    def from_coeffs(cls, coeffs: Iterable[int]) -> "Gf2Poly":
        mask = 0
        for i, c in enumerate(coeffs):
            if c & 1:
                mask |= 1 << i
        return cls(mask)

    @classmethod
    def from_exponents(cls, exps: Iterable[int]) -> "Gf2Poly":
        mask = 0
        for e in exps:
            mask ^= 1 << e
        return cls(mask)

    @property
    def degree(self) -> int:
        return self.bits.bit_length() - 1

    @property
    def coeffs(self) -> tuple[int, ...]:
        return tuple((self.bits >> i) & 1 for i in range(max(self.degree + 1, 0)))

    def is_zero(self) -> bool:
        return self.bits == 0

    def __add__(self, other: "Gf2Poly") -> "Gf2Poly":
        return Gf2Poly(self.bits ^ other.bits)

    __xor__ = __add__
    __sub__ = __add__

    def __mul__(self, other: "Gf2Poly") -> "Gf2Poly":
        return Gf2Poly(clmul(self.bits, other.bits))

    def __mod__(self, other: "Gf2Poly") -> "Gf2Poly":
        return poly_mod(self, other)

    def shift(self, k: int) -> "Gf2Poly":
        """Multiply by ``x**k``."""
        return Gf2Poly(self.bits << k)

    def __str__(self) -> str:
        if self.bits == 0:
            return "0"
        terms = []
        for i in range(self.degree + 1):
            if (self.bits >> i) & 1:
                terms.append("1" if i == 0 else ("x" if i == 1 else f"x^{i}"))
        return " + ".join(terms)


def clmul(a: int, b: int) -> int:
    """Carry-less product of two bit masks."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def mask_mod(a: int, g: int) -> int:
    """Remainder of bit-mask polynomial ``a`` modulo ``g`` over GF(2)."""
    if g == 0:
        raise ZeroDivisionError("division by the zero polynomial")
    dg = g.bit_length() - 1
    while a and a.bit_length() - 1 >= dg:
        a ^= g << (a.bit_length() - 1 - dg)
    return a


def poly_mod(a: Gf2Poly, g: Gf2Poly) -> Gf2Poly:
    return Gf2Poly(mask_mod(a.bits, g.bits))


def poly_divmod(a: Gf2Poly, g: Gf2Poly) -> tuple[Gf2Poly, Gf2Poly]:
    if g.bits == 0:
        raise ZeroDivisionError("division by the zero polynomial")
    q, r = 0, a.bits
    dg = g.degree
    while r and r.bit_length() - 1 >= dg:
        s = r.bit_length() - 1 - dg
        q |= 1 << s
        r ^= g.bits << s
    return Gf2Poly(q), Gf2Poly(r)


def poly_order(g: Gf2Poly) -> int:
    """Smallest ``P > 0`` with ``x^P == 1 (mod g)``.

    The search is bounded by ``2**deg(g) - 1``, the largest possible order.
    """
    if g.bits & 1 == 0:
        raise ValueError(f"order undefined: {g} is divisible by x")
    d = g.degree
    if d == 0:
        return 1
    r = mask_mod(0b10, g.bits)
    for p in range(1, (1 << d) + 1):
        if r == 1:
            return p
        r = mask_mod(r << 1, g.bits)
    raise ArithmeticError(f"no order found for {g}")  # unreachable for g(0) = 1


def is_primitive(g: Gf2Poly) -> bool:
    d = g.degree
    if d < 1 or g.bits & 1 == 0:
        return False
    return poly_order(g) == (1 << d) - 1


@lru_cache(maxsize=None)
def _tables(m: int, prim: int) -> tuple[np.ndarray, np.ndarray]:
    q = 1 << m
    exp = np.zeros(2 * (q - 1), dtype=np.int64)
    log = np.full(q, -1, dtype=np.int64)
    x = 1
    for i in range(q - 1):
        exp[i] = x
        if log[x] != -1:
            raise ValueError(f"polynomial {prim:#x} is not primitive for m={m}")
        log[x] = i
        x <<= 1
        if x & q:
            x ^= prim
    exp[q - 1 :] = exp[: q - 1]
    exp.setflags(write=False)
    log.setflags(write=False)
    return exp, log


class FieldContext:
    """GF(2^m) under a fixed primitive polynomial.

    Scalars are plain ints in ``[0, q)``.  The vectorised helpers (``vmul``,
    ``vinv``) accept numpy integer arrays of any shape.
    """

    def __init__(self, m: int, primitive_poly: Gf2Poly | int | None = None):
        if m < 1:
            raise ValueError("extension degree must be >= 1")
        if primitive_poly is None:
            if m not in PRIMITIVE_POLYS:
                raise ValueError(f"no default primitive polynomial for m={m}")
            primitive_poly = PRIMITIVE_POLYS[m]
        prim = primitive_poly.bits if isinstance(primitive_poly, Gf2Poly) else int(primitive_poly)
        if prim.bit_length() - 1 != m:
            raise ValueError(f"primitive polynomial must have degree {m}")
        if not is_primitive(Gf2Poly(prim)):
            raise ValueError(f"{Gf2Poly(prim)} is not primitive")
        self.m = m
        self.q = 1 << m
        self.primitive_poly = Gf2Poly(prim)
        self.exp, self.log = _tables(m, prim)
        self._mul_table: np.ndarray | None = None

    def __repr__(self) -> str:
        return f"FieldContext(m={self.m}, primitive_poly={self.primitive_poly})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FieldContext) and (self.m, self.primitive_poly) == (
            other.m,
            other.primitive_poly,
        )

    def __hash__(self) -> int:
        return hash((self.m, self.primitive_poly.bits))

    # scalar operations
    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse in GF(q)")
        return int(self.exp[(self.q - 1 - self.log[a]) % (self.q - 1)])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def alpha_pow(self, e: int) -> int:
        return int(self.exp[e % (self.q - 1)])

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 1 if e == 0 else 0
        return int(self.exp[(self.log[a] * e) % (self.q - 1)])

    # vectorised operations
    @property
    def mul_table(self) -> np.ndarray:
        if self._mul_table is None:
            a = np.arange(self.q)
            self._mul_table = self.vmul(a[:, None], a[None, :])
            self._mul_table.setflags(write=False)
        return self._mul_table

    def vmul(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self.exp[(self.log[a] + self.log[b]) % (self.q - 1)]
        return np.where((a == 0) | (b == 0), 0, out)

    def vinv(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("zero has no inverse in GF(q)")
        return self.exp[(self.q - 1 - self.log[a]) % (self.q - 1)]

    # bit-vector <-> symbol
    def to_symbol(self, bits: Sequence[int]) -> int:
        return gf_map(self, bits)

    def to_bits(self, symbol: int) -> np.ndarray:
        return gf_unmap(self, symbol)


def gf_add(ctx: FieldContext, a: int, b: int) -> int:
    return ctx.add(a, b)


def gf_mul(ctx: FieldContext, a: int, b: int) -> int:
    return ctx.mul(a, b)


def gf_inv(ctx: FieldContext, a: int) -> int:
    return ctx.inv(a)


def gf_map(ctx: FieldContext, bits: Sequence[int]) -> int:
    """Pack an m-bit vector into a field element, bit i -> coefficient of x^i."""
    bits = np.asarray(bits).ravel()
    if bits.size != ctx.m:
        raise ValueError(f"expected {ctx.m} bits, got {bits.size}")
    return pack_bits(bits)


def gf_unmap(ctx: FieldContext, symbol: int) -> np.ndarray:
    if not 0 <= symbol < ctx.q:
        raise ValueError(f"symbol {symbol} outside GF({ctx.q})")
    return unpack_bits(symbol, ctx.m)


def pack_bits(bits) -> int:
    out = 0
    for i, b in enumerate(np.asarray(bits).ravel()):
        if int(b) & 1:
            out |= 1 << i
    return out


def unpack_bits(value: int, width: int) -> np.ndarray:
    return np.array([(value >> i) & 1 for i in range(width)], dtype=np.uint8)


def pack_rows(bits: np.ndarray) -> np.ndarray:
    """Pack the last axis of a 0/1 array into integers (bit i = column i)."""
    bits = np.asarray(bits, dtype=np.int64)
    weights = np.left_shift(1, np.arange(bits.shape[-1], dtype=np.int64))
    return bits @ weights


def unpack_rows(values, width: int) -> np.ndarray:
    values = np.asarray(values, dtype=np.int64)
    return ((values[..., None] >> np.arange(width)) & 1).astype(np.uint8)
