import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tepcc.epcc import NEG_INF
from tepcc.mlllr import (
    HypothesisList,
    build_signature_mlllr,
    combinations,
    delta_mlllr,
    max_star,
    max_star2,
    signature_log_pmf,
    syndrome_convolve,
    syndrome_convolve_sparse,
)


def test_max_star_identities():
    assert max_star([1.7, NEG_INF]) == pytest.approx(1.7)
    assert max_star([0.0, 0.0]) == pytest.approx(np.log(2))
    assert max_star2(NEG_INF, NEG_INF) == NEG_INF


def test_max_star_matches_logsumexp():
    v = np.random.default_rng(0).normal(0, 3, 5)
    assert max_star(v) == pytest.approx(np.log(np.sum(np.exp(v))), abs=1e-10)


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=12))
def test_max_star_bounds(vals):
    m = max_star(vals)
    assert max(vals) <= m + 1e-12 <= max(vals) + np.log(len(vals)) + 1e-9


def hyps_from(ex1, entries):
    """HypothesisList for one symbol with the given {(type, pos): metric}."""
    Ct = np.full((5, 12), NEG_INF)
    for (i, k), m in entries.items():
        Ct[i - 1, k] = m
    return HypothesisList.from_matrices(ex1, Ct, L=len(entries) if entries else 1)


def test_empty_hypotheses_give_delta(ex1):
    h = hyps_from(ex1, {})
    out = build_signature_mlllr(ex1, 13, h)
    assert np.array_equal(out, delta_mlllr(64, 13))
    assert np.argmax(out) == 13


def test_one_hypothesis_two_slots(ex1):
    c = 0.8
    h = hyps_from(ex1, {(2, 4): c})
    lp = signature_log_pmf(ex1, 5, h)
    syn = int(ex1.pattern_syndromes[1, 4])
    p = np.exp(lp)
    assert p.sum() == pytest.approx(1.0)
    assert p[5] == pytest.approx(1 / (1 + np.exp(c)))
    assert p[5 ^ syn] == pytest.approx(np.exp(c) / (1 + np.exp(c)))
    assert np.count_nonzero(p > 1e-12) == 2


def brute_signature_pmf(ex1, ml_sig, entries, M, e_free):
    q = 64
    p = np.zeros(q)
    p[ml_sig] += 1.0
    items = list(entries.items())
    for m in range(1, M + 1):
        for combo in itertools.combinations(items, m):
            spans = [(k, ex1.pattern(i).length) for (i, k), _ in combo]
            ok = True
            for (a, la), (b, lb) in itertools.combinations(spans, 2):
                gap = b - (a + la) if a <= b else a - (b + lb)
                ok &= gap > e_free
            if not ok:
                continue
            syn = 0
            for (i, k), _ in combo:
                syn ^= int(ex1.pattern_syndromes[i - 1, k])
            p[ml_sig ^ syn] += np.exp(sum(v for _, v in combo))
    return p / p.sum()


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_signature_mlllr_matches_enumeration(seed):
    from tepcc.systems import build_epcc

    ex1 = build_epcc(12, 5, 6)
    r = np.random.default_rng(seed)
    entries = {}
    while len(entries) < 4:
        i = int(r.integers(1, 6))
        k = int(r.integers(0, 12 - i + 1))
        entries[(i, k)] = float(r.normal(-1, 2))
    ml_sig = int(r.integers(0, 64))
    h = hyps_from(ex1, entries)
    got = np.exp(signature_log_pmf(ex1, ml_sig, h, M=2, e_free=1))
    want = brute_signature_pmf(ex1, ml_sig, entries, 2, 1)
    assert np.allclose(got, want, rtol=1e-6, atol=1e-300)
    mll = build_signature_mlllr(ex1, ml_sig, h, M=2, e_free=1)
    nz = want > 0
    assert mll[0] == 0
    if want[0] > 0:
        assert np.allclose(mll[nz], np.log(want[nz] / want[0]), rtol=1e-6)


def test_hypothesis_list_order_and_feasibility(ex1):
    Ct = np.full((5, 12), NEG_INF)
    Ct[0, 3] = 1.0
    Ct[4, 9] = 5.0  # e^(5) at 9 leaves the symbol
    Ct[2, 0] = 2.0
    h = HypothesisList.from_matrices(ex1, Ct, L=4)
    assert h.metric[0] == NEG_INF or h.metric[0] == 2.0
    assert h.valid().sum() == 2
    assert list(h.metric[h.valid()]) == [2.0, 1.0]
    assert set(zip(h.type_index[h.valid()], h.position[h.valid()])) == {(3, 0), (1, 3)}


def test_combination_cap(ex1):
    r = np.random.default_rng(1)
    h = HypothesisList.from_matrices(ex1, r.normal(0, 1, (5, 12)), L=8)
    _, sums, _, keep = combinations(h, M=3, e_free=1, max_combos=10)
    assert keep.sum() <= 10
    kept_min = sums[0][keep[0]].min()
    dropped = sums[0][~keep[0] & (sums[0] > NEG_INF / 2)]
    assert dropped.size == 0 or dropped.max() <= kept_min


# ---------------------------------------------------------------- convolution


def test_convolve_identity_and_cancellation():
    r = np.random.default_rng(2)
    ch = r.normal(0, 1, 16)
    ch -= ch[0]
    assert np.allclose(syndrome_convolve(ch, delta_mlllr(16, 0)), ch)
    out = syndrome_convolve(delta_mlllr(16, 9), delta_mlllr(16, 9))
    assert np.argmax(out) == 0 and out[0] == 0 and out[1:].max() <= NEG_INF / 2


def prob_convolution(a, b):
    pa, pb = np.exp(a) / np.exp(a).sum(), np.exp(b) / np.exp(b).sum()
    q = a.size
    out = np.zeros(q)
    for x in range(q):
        for y in range(q):
            out[x ^ y] += pa[x] * pb[y]
    return out


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_convolve_matches_probability_domain_gf4(seed):
    r = np.random.default_rng(seed)
    a, b = r.normal(0, 2, (2, 4))
    want = prob_convolution(a, b)
    got = syndrome_convolve(a, b)
    assert np.allclose(np.exp(got) / np.exp(got).sum(), want, rtol=1e-9)


def test_sparse_convolution_matches_exact():
    r = np.random.default_rng(3)
    ch = r.normal(0, 4, (20, 64))
    post = r.normal(0, 4, (20, 64))
    assert np.allclose(syndrome_convolve_sparse(ch, post), syndrome_convolve(ch, post), atol=1e-9)


def test_convolve_shape_checks():
    with pytest.raises(ValueError):
        syndrome_convolve(np.zeros(4), np.zeros(8))
    with pytest.raises(ValueError):
        syndrome_convolve_sparse(np.zeros((2, 4)), np.zeros((3, 4)))
