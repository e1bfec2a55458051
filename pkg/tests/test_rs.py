import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _helpers import inject_targeted
from tepcc.gf import FieldContext
from tepcc.rs import RsCode, bm_decode, erasure_decode, rs_encode, tppc_rs_hard_decode
from tepcc.systems import build_system

CTX4 = FieldContext(4)
RS15 = RsCode(CTX4, 15, 11)


def division_parity(code: RsCode, data) -> list[int]:
    """Remainder of data(x) * x^(n-k) by g(x), schoolbook long division."""
    ctx = code.ctx
    g = [int(c) for c in code.generator]  # high degree first, monic
    num = [int(d) for d in data] + [0] * code.p
    for i in range(len(num) - code.p):
        c = num[i]
        if c:
            for j in range(1, len(g)):
                num[i + j] ^= ctx.mul(g[j], c)
    return num[-code.p :]


def test_generator_roots():
    g = [int(c) for c in RS15.generator][::-1]  # low degree first
    for j in range(1, 5):
        x = CTX4.alpha_pow(j)
        acc = 0
        for c in reversed(g):
            acc = CTX4.mul(acc, x) ^ c
        assert acc == 0


def test_encode_zero():
    assert not rs_encode(RS15, np.zeros(11, dtype=int)).any()


def test_parity_matches_division(rng):
    for _ in range(20):
        data = rng.integers(0, 16, 11)
        word = rs_encode(RS15, data)
        assert np.array_equal(word[:11], data)
        assert word[11:].tolist() == division_parity(RS15, data)
        assert RS15.is_codeword(word)


def test_clean_word_unchanged(rng):
    word = rs_encode(RS15, rng.integers(0, 16, 11))
    res = bm_decode(RS15, word)
    assert res.success and np.array_equal(res.word, word) and res.positions == []


def test_all_single_and_double_errors():
    word = rs_encode(RS15, np.arange(11) % 16)
    for npos in (1, 2):
        for pos in itertools.combinations(range(15), npos):
            for vals in itertools.product(range(1, 16), repeat=npos):
                bad = word.copy()
                bad[list(pos)] ^= vals
                res = bm_decode(RS15, bad)
                assert res.success and np.array_equal(res.word, word), (pos, vals)
                assert sorted(res.positions) == list(pos)


def test_beyond_capability(rng):
    word = rs_encode(RS15, rng.integers(0, 16, 11))
    for _ in range(300):
        bad = word.copy()
        pos = rng.choice(15, 3, replace=False)
        bad[pos] ^= rng.integers(1, 16, 3)
        res = bm_decode(RS15, bad)
        if res.success:
            assert RS15.is_codeword(res.word) and not np.array_equal(res.word, word)
        else:
            assert np.array_equal(res.word, bad)


def test_erasures(rng):
    for _ in range(50):
        word = rs_encode(RS15, rng.integers(0, 16, 11))
        pos = rng.choice(15, 4, replace=False)
        bad = word.copy()
        bad[pos] = rng.integers(0, 16, 4)
        res = erasure_decode(RS15, bad, pos)
        assert res.success and np.array_equal(res.word, word)


def test_erasure_edge_cases(rng):
    word = rs_encode(RS15, rng.integers(0, 16, 11))
    assert np.array_equal(erasure_decode(RS15, word, []).word, word)
    bad = word.copy()
    bad[:5] ^= 1
    assert not erasure_decode(RS15, bad, range(5)).success
    with pytest.raises(ValueError):
        erasure_decode(RS15, word, [15])


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1), st.integers(0, 16))
def test_large_code_capability(seed, n_err):
    code = RsCode(FieldContext(10), 64, 48)
    r = np.random.default_rng(seed)
    word = code.encode(r.integers(0, 1024, 48))
    bad = word.copy()
    pos = r.choice(64, min(n_err, code.t), replace=False)
    bad[pos] ^= r.integers(1, 1024, pos.size)
    res = bm_decode(code, bad)
    assert res.success and np.array_equal(res.word, word)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        RsCode(CTX4, 16, 12)
    with pytest.raises(ValueError):
        RsCode(CTX4, 15, 10)


# ---------------------------------------------------------------- hard tensor decoder


@pytest.fixture(scope="module")
def rs_tppc():
    return build_system("TPPC-RS").tppc


def test_hard_clean(rs_tppc, rng, monkeypatch):
    import tepcc.rs as rs_mod

    word = rs_tppc.encode(rng.integers(0, 2, rs_tppc.k3, dtype=np.uint8))

    def boom(*a, **k):
        raise AssertionError("EPCC invoked on a clean word")

    monkeypatch.setattr(rs_mod, "_epcc_correct", boom)
    out, ok, flagged = tppc_rs_hard_decode(rs_tppc, word)
    assert ok and not flagged and np.array_equal(out, word)


@pytest.mark.parametrize("n_sym", [1, 10, 30])
def test_hard_corrects_targeted(rs_tppc, n_sym):
    r = np.random.default_rng(n_sym)
    for _ in range(5):
        word, ml, _, rel, _ = inject_targeted(rs_tppc, r, n_sym)
        out, ok, flagged = tppc_rs_hard_decode(rs_tppc, ml, rel)
        assert ok and not flagged and np.array_equal(out, word)


def test_hard_unambiguous_without_reliabilities(rs_tppc):
    """Single-bit errors have period-18 syndromes, so no reliabilities are needed."""
    r = np.random.default_rng(3)
    word = rs_tppc.encode(r.integers(0, 2, rs_tppc.k3, dtype=np.uint8))
    ml = word.copy()
    for j in r.choice(rs_tppc.n2, 30, replace=False):
        ml[j * 18 + int(r.integers(0, 18))] ^= 1
    out, ok, _ = tppc_rs_hard_decode(rs_tppc, ml)
    assert ok and np.array_equal(out, word)


def test_hard_too_many_symbols(rs_tppc):
    r = np.random.default_rng(31)
    for _ in range(3):
        word, ml, _, rel, _ = inject_targeted(rs_tppc, r, 31)
        out, ok, _ = tppc_rs_hard_decode(rs_tppc, ml, rel)
        assert not np.array_equal(out, word)
        if not ok:
            assert np.array_equal(out, ml)
