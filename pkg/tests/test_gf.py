import numpy as np
import pytest
from hypothesis import given, strategies as st

from tepcc.gf import (
    PRIMITIVE_POLYS,
    FieldContext,
    Gf2Poly,
    clmul,
    gf_add,
    gf_inv,
    gf_map,
    gf_mul,
    gf_unmap,
    is_primitive,
    pack_rows,
    poly_divmod,
    poly_mod,
    poly_order,
    unpack_rows,
)

G1 = Gf2Poly.from_exponents([0, 1, 3, 5, 6])
G2 = Gf2Poly.from_exponents([0, 2, 3, 5, 6, 8])


def long_division_remainder(a: list[int], g: list[int]) -> list[int]:
    """Schoolbook division on coefficient lists (index = power)."""
    a = list(a)
    dg = max(i for i, c in enumerate(g) if c)
    for i in range(len(a) - 1, dg - 1, -1):
        if a[i]:
            for j, c in enumerate(g):
                if c:
                    a[i - dg + j] ^= 1
    rem = a[:dg] + [0] * max(0, dg - len(a))
    return rem


def test_poly_mod_trivial():
    assert poly_mod(Gf2Poly(0), G1) == Gf2Poly(0)
    assert poly_mod(G1, G1) == Gf2Poly(0)


def test_poly_mod_matches_long_division():
    a = Gf2Poly.from_exponents([3, 4])  # x^3 (1 + x)
    expect = long_division_remainder(list(a.coeffs), list(G1.coeffs))
    assert poly_mod(a, G1) == Gf2Poly.from_coeffs(expect)


@given(st.integers(0, 1 << 40), st.integers(2, 1 << 12))
def test_poly_divmod_identity(a, g):
    a, g = Gf2Poly(a), Gf2Poly(g | 1)
    quo, rem = poly_divmod(a, g)
    assert rem.bits == 0 or rem.degree < g.degree
    assert Gf2Poly(clmul(quo.bits, g.bits)) + rem == a
    assert rem == Gf2Poly.from_coeffs(long_division_remainder(list(a.coeffs), list(g.coeffs)))


def test_poly_order_examples():
    assert poly_order(G1) == 12
    assert poly_order(G2) == 18
    assert poly_order(Gf2Poly(0b11)) == 1


def test_poly_order_rejects_x_divisible():
    with pytest.raises(ValueError):
        poly_order(Gf2Poly(0b110))


def test_primitive_table():
    for m, p in PRIMITIVE_POLYS.items():
        assert is_primitive(Gf2Poly(p)), m


def test_field_gf8_residue():
    ctx = FieldContext(3, Gf2Poly.from_exponents([0, 1, 3]))
    a, a2 = ctx.alpha_pow(1), ctx.alpha_pow(2)
    assert gf_mul(ctx, a, a2) == 0b011  # x^3 = x + 1


@pytest.mark.parametrize("m", [2, 3, 4, 6, 8])
def test_field_axioms(m):
    ctx = FieldContext(m)
    q = ctx.q
    for a in range(q):
        assert gf_mul(ctx, 0, a) == 0
        assert gf_add(ctx, a, a) == 0
        if a:
            assert gf_mul(ctx, a, gf_inv(ctx, a)) == 1
    T = ctx.mul_table
    assert np.array_equal(T, T.T)
    # rows of nonzero elements are permutations
    assert all(sorted(T[a, 1:]) == list(range(1, q)) for a in range(1, q))


@pytest.mark.parametrize("m", [3, 5])
def test_mul_matches_polynomial_product(m):
    ctx = FieldContext(m)
    prim = ctx.primitive_poly
    for a in range(ctx.q):
        for b in range(ctx.q):
            assert ctx.mul(a, b) == poly_mod(Gf2Poly(clmul(a, b)), prim).bits


def test_inverse_of_zero():
    with pytest.raises(ZeroDivisionError):
        gf_inv(FieldContext(4), 0)


def test_non_primitive_rejected():
    with pytest.raises(ValueError):
        FieldContext(4, 0b11111)  # 1+x+x^2+x^3+x^4 has order 5


@pytest.mark.parametrize("m", range(1, 9))
def test_map_roundtrip_exhaustive(m):
    ctx = FieldContext(m)
    assert gf_map(ctx, np.zeros(m, dtype=int)) == 0
    unit = np.zeros(m, dtype=int)
    unit[0] = 1
    assert gf_map(ctx, unit) == 1
    for s in range(ctx.q):
        assert gf_map(ctx, gf_unmap(ctx, s)) == s
    bits = unpack_rows(np.arange(ctx.q), m)
    assert np.array_equal(pack_rows(bits), np.arange(ctx.q))


def test_map_wrong_length():
    with pytest.raises(ValueError):
        gf_map(FieldContext(4), [1, 0, 1])
