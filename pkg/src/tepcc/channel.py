"""Partial-response ISI channel with AWGN and an a-priori-aware Viterbi detector.

Bits map to bipolar symbols as 0 -> +1, 1 -> -1.  A sector is framed by
``l_h - 1`` known +1 symbols on each side, so the detector starts and ends in
the all-(+1) state and the received sequence has ``N + l_h - 1`` samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np


@dataclass(frozen=True)
class ChannelModel:
    taps: tuple[float, ...] = (1.0, 0.85)
    sigma: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if len(self.taps) < 1:
            raise ValueError("need at least one tap")
        object.__setattr__(self, "taps", tuple(float(h) for h in self.taps))

    @property
    def l_h(self) -> int:
        return len(self.taps)

    @property
    def e_free(self) -> int:
        return self.l_h - 1

    @property
    def energy(self) -> float:
        return float(sum(h * h for h in self.taps))

    @property
    def n_states(self) -> int:
        return 1 << (self.l_h - 1)

    def with_sigma(self, sigma: float) -> "ChannelModel":
        return ChannelModel(self.taps, sigma)


@dataclass
class SectorFrame:
    bits: np.ndarray
    bipolar: np.ndarray
    noiseless: np.ndarray
    received: np.ndarray
    sigma: float


def snr_to_sigma(snr_db: float, rate: float, delta: float = 1.0, taps=(1.0, 0.85)) -> float:
    """Noise std for a given SNR with a code-rate penalty of 10*delta*log10(1/R).

    sigma^2 = (E_h / 2) * 10^(-snr/10) * (1/R)^delta
    """
    if not 0 < rate <= 1:
        raise ValueError("code rate must lie in (0, 1]")
    if not np.isfinite(snr_db):
        raise ValueError("SNR must be finite")
    e_h = float(np.sum(np.square(taps)))
    return float(np.sqrt(0.5 * e_h * 10.0 ** (-snr_db / 10.0) * (1.0 / rate) ** delta))


def to_bipolar(bits) -> np.ndarray:
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def channel_output(taps, bipolar) -> np.ndarray:
    """Noiseless samples of a framed sector (+1 pre/postamble)."""
    taps = np.asarray(taps, dtype=np.float64)
    pad = np.ones(len(taps) - 1)
    x = np.concatenate([pad, np.asarray(bipolar, dtype=np.float64), pad])
    return np.convolve(x, taps)[len(taps) - 1 : len(x)]


def transmit(model: ChannelModel, bits, rng: np.random.Generator | int | None = None) -> SectorFrame:
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size == 0:
        raise ValueError("empty sector")
    rng = np.random.default_rng(rng)
    bip = to_bipolar(bits)
    clean = channel_output(model.taps, bip)
    noisy = clean + rng.normal(0.0, model.sigma, size=clean.size)
    return SectorFrame(bits, bip, clean, noisy, model.sigma)


def euclidean_branch_metrics(model: ChannelModel, received) -> np.ndarray:
    """-(r_k - y)^2 / (2 sigma^2) for every (time, state, input bit).

    Depends only on the received samples, so a decoder computes it once per
    sector and only adds the prior term on later passes.
    """
    r = np.asarray(received, dtype=np.float64)
    S = model.n_states
    taps = np.asarray(model.taps)
    y = np.empty((S, 2))
    for s in range(S):
        for b in range(2):
            acc = taps[0] * (1.0 - 2.0 * b)
            for j in range(1, model.l_h):
                acc += taps[j] * (1.0 - 2.0 * ((s >> (j - 1)) & 1))
            y[s, b] = acc
    return -np.square(r[:, None, None] - y[None, :, :]) / (2.0 * model.sigma**2)


@numba.njit(cache=True)
def _viterbi_kernel(euclid, priors, n_bits):
    T, S, _ = euclid.shape
    neg = -1.0e300
    metric = np.full(S, neg)
    metric[0] = 0.0
    back = np.zeros((T, S), dtype=np.int64)  # encodes prev_state * 2 + bit
    mask = S - 1
    for k in range(T):
        new = np.full(S, neg)
        nb = 2 if k < n_bits else 1  # postamble inputs are known zeros
        for s in range(S):
            m = metric[s]
            if m <= neg:
                continue
            for b in range(nb):
                bm = euclid[k, s, b]
                if k < n_bits:
                    bm += (1.0 - 2.0 * b) * priors[k] * 0.5
                ns = ((s << 1) | b) & mask if S > 1 else 0
                cand = m + bm
                if cand > new[ns]:
                    new[ns] = cand
                    back[k, ns] = s * 2 + b
        metric = new
    out = np.zeros(n_bits, dtype=np.uint8)
    s = 0
    for k in range(T - 1, -1, -1):
        code = back[k, s]
        if k < n_bits:
            out[k] = code & 1
        s = code >> 1
    return out


def viterbi_detect(model: ChannelModel, received, priors=None, euclid: np.ndarray | None = None) -> np.ndarray:
    """Maximum-metric bit sequence over the 2^(l_h-1)-state trellis.

    Branch metric: -(r_k - y_k)^2 / (2 sigma^2) + x_k * lambda_k / 2, with
    ``lambda_k = log P(bit 0) / P(bit 1)``.
    """
    r = np.asarray(received, dtype=np.float64)
    n_bits = r.size - (model.l_h - 1)
    if n_bits <= 0:
        raise ValueError("received sequence shorter than the channel memory")
    if priors is None:
        priors = np.zeros(n_bits)
    priors = np.asarray(priors, dtype=np.float64)
    if priors.size != n_bits:
        raise ValueError(f"priors length {priors.size} != {n_bits}")
    if euclid is None:
        euclid = euclidean_branch_metrics(model, r)
    return _viterbi_kernel(euclid, priors, n_bits)


def path_metric(model: ChannelModel, received, bits, priors=None) -> float:
    """Total trellis metric of one bit sequence (the quantity Viterbi maximises)."""
    bip = to_bipolar(bits)
    y = channel_output(model.taps, bip)
    m = -np.sum(np.square(np.asarray(received) - y)) / (2.0 * model.sigma**2)
    if priors is not None:
        m += 0.5 * float(np.dot(bip, priors))
    return float(m)
