import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tepcc.channel import ChannelModel, channel_output, to_bipolar, transmit
from tepcc.correlator import (
    ReliabilityMatrix,
    boundary_modify,
    build_reliability_matrix,
    error_response,
    error_values,
    leading_parent_metrics,
    local_metric,
    modified_matrices,
    sector_metrics,
    symbol_reliabilities,
)
from tepcc.epcc import NEG_INF, dominant_patterns

TAPS = (1.0, 0.85)
PATTERNS = dominant_patterns(5)


def test_single_bit_response():
    ml = np.array([0, 0, 1, 0], dtype=np.uint8)  # bit 2 detected as -1
    assert error_values(PATTERNS[0], ml, 2).tolist() == [2.0]
    assert np.allclose(error_response(PATTERNS[0], 2, ml, TAPS), [2.0, 1.7])


def test_two_bit_response():
    ml = np.array([0, 1, 0, 1], dtype=np.uint8)
    eps = -2.0 * to_bipolar(ml[0:2])  # [-2, +2]
    assert np.allclose(error_response(PATTERNS[1], 0, ml, TAPS), np.convolve(eps, TAPS))


def test_infeasible_events():
    ml = np.array([0, 0, 1, 0], dtype=np.uint8)
    assert error_response(PATTERNS[2], 2, ml, TAPS) is None  # leaves the sector
    assert error_response(PATTERNS[1], 0, ml, TAPS) is None  # 0,0 does not alternate


def test_local_metric_limits():
    s = np.array([2.0, 1.7])
    sig = 0.6
    zero = np.zeros(1)
    assert local_metric(np.zeros(2), s, zero, [0], sig) == pytest.approx(-np.sum(s**2) / (2 * sig**2))
    assert local_metric(s, s, zero, [0], sig) == pytest.approx(np.sum(s**2) / (2 * sig**2))
    assert local_metric(np.zeros(2), s, zero, [0], sig) < 0


def test_local_metric_formula():
    q = np.array([0.3, -1.2, 0.8])
    s = np.array([-2.0, 0.3, 1.7])
    lam = np.array([1.5, -0.7])
    bits = np.array([1, 0])
    sig = 0.55
    expect = sum(q[k] ** 2 - (q[k] - s[k]) ** 2 for k in range(3)) / (2 * sig * sig)
    expect -= (-1.0) * 1.5 + (1.0) * (-0.7)  # a flipped bit pays x * lambda
    assert local_metric(q, s, lam, bits, sig) == pytest.approx(expect, abs=1e-12)


def scalar_sector_metrics(model, received, ml, priors):
    N = ml.size
    q = received - channel_output(model.taps, to_bipolar(ml))
    out = np.full((5, N), NEG_INF)
    for t in PATTERNS:
        L = t.length
        for j in range(N):
            s = error_response(t, j, ml, model.taps)
            if s is None:
                continue
            out[t.type_index - 1, j] = local_metric(q[j : j + s.size], s, priors[j : j + L], ml[j : j + L], model.sigma)
    return out


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1))
def test_sector_metrics_match_scalar(seed):
    rng = np.random.default_rng(seed)
    model = ChannelModel(TAPS, 0.7)
    bits = rng.integers(0, 2, 36)
    f = transmit(model, bits, rng)
    ml = rng.integers(0, 2, 36).astype(np.uint8)
    priors = rng.normal(0, 2, 36)
    fast = sector_metrics(model, f.received, ml, priors, PATTERNS)
    slow = scalar_sector_metrics(model, f.received, ml, priors)
    assert np.allclose(fast, slow, atol=1e-9)


def test_true_event_scores_positive():
    rng = np.random.default_rng(4)
    model = ChannelModel(TAPS, 0.05)
    bits = np.array([0, 1] * 12, dtype=np.uint8)
    r = channel_output(TAPS, to_bipolar(bits)) + model.sigma * rng.standard_normal(25)
    ml = bits.copy()
    ml[6:9] ^= 1
    C = sector_metrics(model, r, ml, None, PATTERNS)
    assert np.unravel_index(np.argmax(C), C.shape) == (2, 6)
    assert C[2, 6] > 0


def test_no_parents_interior_unchanged():
    rng = np.random.default_rng(0)
    C = rng.normal(0, 1, (5, 12))
    out = boundary_modify(C, np.full((5, 5), NEG_INF))
    assert np.allclose(out[:, 1:8], C[:, 1:8])
    assert np.allclose(out[:, 0], C[:, 0])


def test_two_parents_at_start():
    C = np.full((5, 12), NEG_INF)
    a, b = -1.3, 0.4
    C[0, 0] = a
    P = np.full((5, 5), NEG_INF)
    P[1, 0] = b  # e^(2) entering from the previous symbol, in-symbol part e^(1) at 0
    out = boundary_modify(C, P)
    assert out[0, 0] == pytest.approx(max(a, b) + np.log1p(np.exp(-abs(a - b))))


def test_trailing_edge_step_through():
    """l_T = 12, l_max = 5: the published loop visits (1,11), (2,10), (3,9), (4,8)."""
    rng = np.random.default_rng(1)
    C = rng.normal(0, 2, (5, 12))
    expect = C.copy()
    for i, j in [(1, 11), (2, 10), (3, 9), (4, 8)]:
        expect[i - 1, j] = np.logaddexp.reduce(C[i - 1 :, j])
        expect[i:, j] = NEG_INF
    assert np.allclose(boundary_modify(C), expect)


def test_vectorised_boundary_matches_per_symbol():
    rng = np.random.default_rng(2)
    model = ChannelModel(TAPS, 0.8)
    n1, n2 = 12, 6
    f = transmit(model, rng.integers(0, 2, n1 * n2), rng)
    ml = rng.integers(0, 2, n1 * n2).astype(np.uint8)
    full = sector_metrics(model, f.received, ml, None, PATTERNS)
    allm = modified_matrices(full, n1, n2)
    for j in range(n2):
        parents = leading_parent_metrics(full, j, n1) if j else None
        one = boundary_modify(build_reliability_matrix(full, j, n1), parents)
        assert np.allclose(allm[j], one)


def test_symbol_reliabilities_shape(ex1):
    rng = np.random.default_rng(3)
    model = ChannelModel(TAPS, 0.8)
    f = transmit(model, rng.integers(0, 2, 48), rng)
    ml = rng.integers(0, 2, 48).astype(np.uint8)
    R = symbol_reliabilities(ex1, model, f.received, ml, None, 4)
    assert R.shape == (4, 5, 12)
    assert R.min() >= NEG_INF


def test_reliability_matrix_floor():
    m = ReliabilityMatrix(np.array([[-np.inf, 1.0]]))
    assert m.entries[0, 0] == NEG_INF and m.shape == (1, 2)


def test_boundary_requires_short_events():
    with pytest.raises(ValueError):
        boundary_modify(np.zeros((5, 5)))
