import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tepcc.channel import (
    ChannelModel,
    channel_output,
    path_metric,
    snr_to_sigma,
    to_bipolar,
    transmit,
    viterbi_detect,
)

E_H = 1.0 + 0.85**2


def exhaustive_ml(model, received, n, priors=None):
    best, arg = -np.inf, None
    for bits in itertools.product((0, 1), repeat=n):
        m = path_metric(model, received, np.array(bits), priors)
        if m > best:
            best, arg = m, np.array(bits, dtype=np.uint8)
    return arg


def test_sigma_no_penalty():
    assert snr_to_sigma(7.0, 1.0, 1.0) ** 2 == pytest.approx(E_H / 2 * 10 ** (-0.7))


def test_sigma_rate_penalty_doubles_variance():
    assert snr_to_sigma(5.0, 0.4) ** 2 == pytest.approx(2 * snr_to_sigma(5.0, 0.8) ** 2)
    assert snr_to_sigma(5.0, 0.4, delta=0.0) == pytest.approx(snr_to_sigma(5.0, 1.0))


def test_sigma_golden():
    assert snr_to_sigma(10.0, 0.9, 1.0) == pytest.approx(0.30934518655450977, rel=1e-12)


def test_sigma_validation():
    with pytest.raises(ValueError):
        snr_to_sigma(5.0, 0.0)
    with pytest.raises(ValueError):
        snr_to_sigma(float("nan"), 0.9)
    with pytest.raises(ValueError):
        ChannelModel(sigma=0.0)


def test_dc_response():
    y = channel_output((1.0, 0.85), to_bipolar(np.zeros(10)))
    assert y[5] == pytest.approx(1.85)
    y = channel_output((1.0, 0.85), to_bipolar(np.ones(10)))
    assert y[5] == pytest.approx(-1.85)
    assert y.size == 11


def test_transmit_small_noise_and_determinism():
    bits = np.random.default_rng(0).integers(0, 2, 50)
    f = transmit(ChannelModel(sigma=1e-9), bits, 3)
    assert np.allclose(f.received, f.noiseless, atol=1e-7)
    a = transmit(ChannelModel(sigma=0.5), bits, 11).received
    b = transmit(ChannelModel(sigma=0.5), bits, 11).received
    assert np.array_equal(a, b)


def test_viterbi_noiseless():
    model = ChannelModel(sigma=0.1)
    bits = np.random.default_rng(1).integers(0, 2, 300).astype(np.uint8)
    r = channel_output(model.taps, to_bipolar(bits))
    assert np.array_equal(viterbi_detect(model, r), bits)


def test_viterbi_matches_exhaustive_12bit():
    rng = np.random.default_rng(2)
    model = ChannelModel(sigma=0.8)
    for t in range(60):
        bits = rng.integers(0, 2, 12)
        f = transmit(model, bits, rng)
        priors = rng.normal(0, 2, 12) if t % 2 else None
        assert np.array_equal(viterbi_detect(model, f.received, priors), exhaustive_ml(model, f.received, 12, priors))


def test_priors_dominate():
    rng = np.random.default_rng(3)
    model = ChannelModel(sigma=0.7)
    target = rng.integers(0, 2, 40).astype(np.uint8)
    r = transmit(model, rng.integers(0, 2, 40), rng).received
    priors = 1000.0 * to_bipolar(target)
    assert np.array_equal(viterbi_detect(model, r, priors), target)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_viterbi_metric_is_maximal(seed):
    """The detected path scores at least as well as the transmitted one."""
    rng = np.random.default_rng(seed)
    model = ChannelModel(taps=(1.0, 0.5, 0.2), sigma=1.0)
    bits = rng.integers(0, 2, 64)
    r = transmit(model, bits, rng).received
    priors = rng.normal(0, 1, 64)
    ml = viterbi_detect(model, r, priors)
    assert path_metric(model, r, ml, priors) >= path_metric(model, r, bits, priors) - 1e-9


def test_viterbi_input_checks():
    model = ChannelModel()
    with pytest.raises(ValueError):
        viterbi_detect(model, np.zeros(1))
    with pytest.raises(ValueError):
        viterbi_detect(model, np.zeros(11), priors=np.zeros(3))
