"""Error-matched local correlators and the per-symbol reliability matrix.

For a hypothesised error pattern the correlator compares the residual
``q = r - y_hat`` with the pattern's channel response ``s`` and returns the
log-likelihood ratio of "detected word + pattern" against "detected word",
including the a-priori cost of flipping the bits under the pattern.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from tepcc.channel import ChannelModel, channel_output, to_bipolar
from tepcc.epcc import NEG_INF, EpccCode, ErrorPattern, alternates, to_mask
from tepcc.mlllr import max_star2

_FEASIBLE = NEG_INF / 2


@dataclass
class ReliabilityMatrix:
    """(l_max, l_T) metrics for one tensor symbol; entry (i-1, k) is e^(i) at k."""

    entries: np.ndarray
    symbol: int = 0

    def __post_init__(self):
        self.entries = np.maximum(np.asarray(self.entries, dtype=np.float64), NEG_INF)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def error_values(pattern: ErrorPattern, ml_bits, position: int) -> np.ndarray | None:
    """Bipolar error amplitudes (true minus detected) under the pattern.

    Returns None when the pattern leaves the sector or when an alternating
    pattern sits on non-alternating detected bits.
    """
    ml_bits = np.asarray(ml_bits)
    L = pattern.length
    if position < 0 or position + L > ml_bits.size:
        return None
    seg = ml_bits[position : position + L]
    if pattern.alternating and not alternates(to_mask(seg), 0, L):
        return None
    support = np.array([(pattern.poly.bits >> t) & 1 for t in range(L)], dtype=bool)
    return np.where(support, -2.0 * to_bipolar(seg), 0.0)


def error_response(pattern: ErrorPattern, position: int, ml_bits, taps) -> np.ndarray | None:
    """Channel response of the error sequence, length l_i + l_h - 1 (None if infeasible)."""
    eps = error_values(pattern, ml_bits, position)
    if eps is None:
        return None
    return np.convolve(eps, np.asarray(taps, dtype=np.float64))


def local_metric(q, s, priors, ml_bits, sigma: float) -> float:
    """sum (q^2 - (q - s)^2) / (2 sigma^2) minus the prior cost of the flipped bits.

    ``q`` and ``s`` cover the window; ``priors`` and ``ml_bits`` cover the
    bits under the pattern (only flipped bits pay their prior).
    """
    q = np.asarray(q, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    euclid = float(np.sum(q * q - (q - s) ** 2)) / (2.0 * sigma**2)
    bias = float(np.dot(to_bipolar(ml_bits), np.asarray(priors, dtype=np.float64)))
    return euclid - bias


def sector_metrics(model: ChannelModel, received, ml_bits, priors, targets) -> np.ndarray:
    """C(e^(i) at j) for every target and every start j of the sector.

    Returns (l_max, N) with NEG_INF where the pattern leaves the sector or
    conflicts with the detected polarity.
    """
    ml_bits = np.asarray(ml_bits, dtype=np.uint8)
    N = ml_bits.size
    x = to_bipolar(ml_bits)
    qres = np.asarray(received, dtype=np.float64) - channel_output(model.taps, x)
    lam = np.zeros(N) if priors is None else np.asarray(priors, dtype=np.float64)
    taps = np.asarray(model.taps)
    l_h = taps.size
    l_max = max(t.length for t in targets)
    out = np.full((l_max, N), NEG_INF)
    alt = np.r_[x[1:] != x[:-1], False]  # alt[k]: bits k, k+1 differ
    alt_run = np.cumsum(np.r_[0, alt[:-1].astype(np.int64)])
    for t in targets:
        L = t.length
        if L > N:
            continue
        starts = N - L + 1
        support = np.array([(t.poly.bits >> u) & 1 for u in range(L)], dtype=np.float64)
        X = sliding_window_view(x, L)[:starts]
        eps = -2.0 * X * support
        s = np.zeros((starts, L + l_h - 1))
        for m, h in enumerate(taps):
            s[:, m : m + L] += h * eps
        Q = sliding_window_view(qres, L + l_h - 1)[:starts]
        metric = np.sum(Q * Q - (Q - s) ** 2, axis=1) / (2.0 * model.sigma**2)
        metric -= sliding_window_view(x * lam, L)[:starts] @ support
        if t.alternating and L > 1:
            ok = alt_run[L - 1 : L - 1 + starts] - alt_run[:starts] == L - 1
            metric = np.where(ok, metric, NEG_INF)
        out[t.type_index - 1, :starts] = metric
    return out


def build_reliability_matrix(full: np.ndarray, symbol: int, n1: int) -> np.ndarray:
    """Raw (l_max, n1) slice of sector metrics for one tensor symbol.

    Entries whose pattern extends past the symbol end keep their sector
    metric (the parents used by boundary_modify).
    """
    return full[:, symbol * n1 : (symbol + 1) * n1].copy()


def boundary_modify(C: np.ndarray, leading_parents: np.ndarray | None = None) -> np.ndarray:
    """Fold boundary-crossing events into the in-symbol truncated patterns.

    ``C`` is (l_max, l_T) with crossing entries (j + i > l_T) holding their
    full metrics.  ``leading_parents`` comes from ``leading_parent_metrics``:
    entry (k-1, i-1) is C(e^(k) at -k+i), the event entering from the
    previous symbol whose in-symbol part is e^(i) at 0.  None means the
    symbol starts the sector.
    """
    C = np.array(C, dtype=np.float64)
    l_max, l_T = C.shape
    out = C.copy()
    if l_max >= l_T:
        raise ValueError("boundary handling assumes l_max < l_T")
    # leading edge
    for i in range(1, l_max + 1):
        acc = C[i - 1, 0]
        if leading_parents is not None:
            for k in range(i + 1, l_max + 1):
                acc = max_star2(acc, leading_parents[k - 1, i - 1])
        out[i - 1, 0] = acc
    # trailing edge
    i, j = 1, l_T - 1
    while True:
        acc = C[i - 1, j]
        for k in range(i + 1, l_max + 1):
            acc = max_star2(acc, C[k - 1, j])
            out[k - 1, j] = NEG_INF
        out[i - 1, j] = acc
        i, j = i + 1, j - 1
        if not i < l_max:
            break
    return out


def leading_parent_metrics(full: np.ndarray, symbol: int, n1: int) -> np.ndarray:
    """(l_max, l_max) array P with P[k-1, i-1] = C(e^(k) at global o - k + i)."""
    l_max = full.shape[0]
    o = symbol * n1
    P = np.full((l_max, l_max), NEG_INF)
    for k in range(1, l_max + 1):
        for i in range(1, k + 1):
            j = o - k + i
            if 0 <= j < full.shape[1]:
                P[k - 1, i - 1] = full[k - 1, j]
    return P


def modified_matrices(full: np.ndarray, n1: int, n2: int) -> np.ndarray:
    """Boundary-modified matrices for all tensor symbols at once, (n2, l_max, n1).

    Vectorised form of ``boundary_modify`` applied per symbol with its
    leading parents taken from the preceding symbol's frame.
    """
    l_max, N = full.shape
    if N != n1 * n2:
        raise ValueError("sector length must equal n1 * n2")
    if l_max >= n1:
        raise ValueError("boundary handling assumes l_max < l_T")
    C = full.reshape(l_max, n2, n1).transpose(1, 0, 2).copy()
    out = C.copy()
    pad = np.concatenate([np.full((l_max, l_max), NEG_INF), full], axis=1)
    o = np.arange(n2) * n1 + l_max  # padded offset of each symbol start
    for i in range(1, l_max + 1):
        acc = C[:, i - 1, 0]
        for k in range(i + 1, l_max + 1):
            acc = max_star2(acc, pad[k - 1, o - k + i])
        out[:, i - 1, 0] = acc
    i, j = 1, n1 - 1
    while True:
        acc = C[:, i - 1, j]
        for k in range(i + 1, l_max + 1):
            acc = max_star2(acc, C[:, k - 1, j])
            out[:, k - 1, j] = NEG_INF
        out[:, i - 1, j] = acc
        i, j = i + 1, j - 1
        if not i < l_max:
            break
    return out


def symbol_reliabilities(code: EpccCode, model: ChannelModel, received, ml_bits, priors, n2: int) -> np.ndarray:
    """C-tilde for every tensor symbol of a sector, (n2, l_max, n1)."""
    full = sector_metrics(model, received, ml_bits, priors, code.targets)
    return modified_matrices(full, code.n, n2)
