"""Multilevel LLRs: signature mlLLRs from correlator metrics and the
error-syndrome convolution.

An mlLLR over GF(q) is a length-q log vector; slot ``b`` holds the log
likelihood of the field element whose integer form is ``b``.  After
normalisation slot 0 (the zero element) is exactly 0.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache, reduce

import numba
import numpy as np

from tepcc.epcc import NEG_INF, EpccCode

_FEASIBLE = NEG_INF / 2


def max_star2(a, b):
    """Jacobian logarithm max(a, b) + log(1 + exp(-|a - b|)), elementwise, floored at NEG_INF."""
    m = np.maximum(a, b)
    out = m + np.log1p(np.exp(-np.abs(np.subtract(a, b))))
    return np.where(m <= NEG_INF, NEG_INF, out)  # log 0 + log 0 stays log 0


def max_star(values) -> float:
    """Log of the sum of exponentials of ``values``, by pairwise max*."""
    values = [float(v) for v in np.asarray(values, dtype=np.float64).ravel()]
    if not values:
        raise ValueError("max_star needs at least one value")
    return float(reduce(max_star2, values))


def recenter(mlllr: np.ndarray) -> np.ndarray:
    return np.asarray(mlllr, dtype=np.float64) - np.asarray(mlllr)[..., :1]


def delta_mlllr(q: int, value: int) -> np.ndarray:
    out = np.full(q, NEG_INF)
    out[value] = 0.0
    return recenter(out)


@dataclass
class HypothesisList:
    """Top-L entries of C-tilde per tensor symbol, sorted by metric (descending).

    Arrays are (n_symbols, L); empty slots carry NEG_INF metric.  ``index`` is
    the flat position ``col * l_max + row`` in C-tilde.
    """

    index: np.ndarray
    type_index: np.ndarray
    position: np.ndarray
    length: np.ndarray
    metric: np.ndarray
    syndrome: np.ndarray

    @property
    def size(self) -> int:
        return self.metric.shape[-1]

    @classmethod
    def from_matrices(cls, code: EpccCode, Ct: np.ndarray, L: int = 8) -> "HypothesisList":
        Ct = np.asarray(Ct, dtype=np.float64)
        single = Ct.ndim == 2
        if single:
            Ct = Ct[None]
        n2, l_max, n1 = Ct.shape
        flat = Ct.transpose(0, 2, 1).reshape(n2, n1 * l_max)  # col * l_max + row
        order = np.argsort(-flat, axis=1, kind="stable")[:, :L]
        metric = np.take_along_axis(flat, order, axis=1)
        col, row = np.divmod(order, l_max)
        lengths = np.array([t.length for t in code.targets])[row]
        feasible = (metric > _FEASIBLE) & (col + lengths <= n1)
        metric = np.where(feasible, metric, NEG_INF)
        syn = code.pattern_syndromes[row, col]
        out = cls(order, row + 1, col, lengths, metric, syn)
        if single:
            out = cls(*(a[0] for a in (order, row + 1, col, lengths, metric, syn)))
        return out

    def valid(self) -> np.ndarray:
        return self.metric > _FEASIBLE


@lru_cache(maxsize=None)
def _subsets(L: int, M: int) -> np.ndarray:
    """All index subsets of size 1..M of range(L), padded with -1, (S, M)."""
    rows = []
    for m in range(1, M + 1):
        for c in itertools.combinations(range(L), m):
            rows.append(list(c) + [-1] * (M - m))
    return np.array(rows, dtype=np.int64).reshape(-1, M)


def combinations(hyps: HypothesisList, M: int = 3, e_free: int = 1, max_combos: int = 64):
    """Independent combinations of up to M hypotheses, best ``max_combos`` per symbol.

    Returns (subsets, sums, syndromes, keep): ``subsets`` is (S, M) indices
    into the hypothesis list, the others are (n, S); ``keep`` marks the
    combinations retained after independence filtering and the cap.
    """
    metric = np.atleast_2d(hyps.metric)
    pos = np.atleast_2d(hyps.position)
    length = np.atleast_2d(hyps.length)
    syn = np.atleast_2d(hyps.syndrome)
    n, L = metric.shape
    M = min(M, L)
    subsets = _subsets(L, M)
    S = subsets.shape[0]
    if S == 0:
        empty = np.zeros((n, 0))
        return subsets, empty, empty.astype(np.int64), empty.astype(bool)
    present = subsets >= 0
    idx = np.where(present, subsets, 0)
    m_sel = np.where(present[None], metric[:, idx], 0.0)
    sums = m_sel.sum(axis=2)
    ok = np.all(np.where(present[None], metric[:, idx] > _FEASIBLE, True), axis=2)
    # pairwise error-free gap must exceed e_free
    a_pos, b_pos = pos[:, :, None], pos[:, None, :]
    a_end, b_end = a_pos + length[:, :, None], b_pos + length[:, None, :]
    gap = np.where(a_pos <= b_pos, b_pos - a_end, a_pos - b_end)
    indep = gap > e_free
    for u, v in itertools.combinations(range(M), 2):
        both = present[:, u] & present[:, v]
        pair_ok = indep[:, idx[:, u], idx[:, v]]
        ok &= np.where(both[None], pair_ok, True)
    syn_sel = np.where(present[None], syn[:, idx], 0)
    syns = np.bitwise_xor.reduce(syn_sel, axis=2)
    sums = np.where(ok, sums, NEG_INF)
    keep = ok.copy()
    if max_combos < S:
        order = np.argsort(-sums, axis=1, kind="stable")
        rank = np.empty_like(order)
        np.put_along_axis(rank, order, np.arange(S)[None, :].repeat(n, 0), axis=1)
        keep &= rank < max_combos
    return subsets, sums, syns, keep


def signature_log_pmf(
    code: EpccCode,
    ml_signature,
    hyps: HypothesisList,
    M: int = 3,
    e_free: int = 1,
    max_combos: int = 64,
) -> np.ndarray:
    """Log p.m.f. of tensor-symbol signatures (before recentring).

    Each retained combination adds its summed metric (a log-likelihood ratio
    against "no error") to the slot of ``ml_signature ^ syndrome``; the ML
    slot also holds the "no error" term 0.  Combinations in the EPCC null
    space therefore land on the ML slot.  The vector is normalised so the
    probabilities sum to 1.
    """
    q = 1 << code.p
    ml = np.atleast_1d(np.asarray(ml_signature, dtype=np.int64))
    n = ml.size
    out = np.full((n, q), NEG_INF)
    out[np.arange(n), ml] = 0.0
    _, sums, syns, keep = combinations(hyps, M, e_free, max_combos)
    r, c = np.nonzero(keep)
    if r.size:
        slots = ml[r] ^ syns[r, c]
        np.logaddexp.at(out, (r, slots), sums[r, c])
    out = np.maximum(out, NEG_INF)
    top = out.max(axis=1, keepdims=True)
    lse = top + np.log(np.sum(np.exp(out - top), axis=1, keepdims=True))
    out = out - lse
    return out[0] if np.ndim(ml_signature) == 0 else out


def build_signature_mlllr(
    code: EpccCode,
    ml_signature,
    hyps: HypothesisList,
    M: int = 3,
    e_free: int = 1,
    max_combos: int = 64,
) -> np.ndarray:
    """Signature mlLLR(s) with slot 0 = 0.  ``ml_signature`` may be a vector."""
    return recenter(signature_log_pmf(code, ml_signature, hyps, M, e_free, max_combos))


@lru_cache(maxsize=None)
def _xor_table(q: int) -> np.ndarray:
    a = np.arange(q)
    return a[:, None] ^ a[None, :]


def syndrome_convolve(ch, post) -> np.ndarray:
    """Log-domain XOR convolution of two mlLLRs, recentred to slot 0 = 0.

    out(b) = max* over x of ch(x) + post(x ^ b); works on (..., q) batches.
    """
    ch = np.asarray(ch, dtype=np.float64)
    post = np.asarray(post, dtype=np.float64)
    q = ch.shape[-1]
    if post.shape[-1] != q or q & (q - 1):
        raise ValueError("mlLLRs must share a power-of-two length")
    ch = ch - ch.max(axis=-1, keepdims=True)
    post = post - post.max(axis=-1, keepdims=True)
    tab = _xor_table(q)  # tab[b, x] = x ^ b
    terms = ch[..., None, :] + post[..., tab]
    top = terms.max(axis=-1, keepdims=True)
    out = top[..., 0] + np.log(np.sum(np.exp(terms - top), axis=-1))
    return recenter(np.maximum(out, NEG_INF))


@numba.njit(cache=True)
def _convolve_sparse(ch, post, floor):
    n, q = ch.shape
    out = np.empty((n, q))
    idx = np.empty(q, dtype=np.int64)
    for r in range(n):
        cm = ch[r].max()
        pm = post[r].max()
        cnt = 0
        for x in range(q):
            if ch[r, x] - cm > floor:
                idx[cnt] = x
                cnt += 1
        for b in range(q):
            m = -np.inf
            for u in range(cnt):
                x = idx[u]
                v = ch[r, x] - cm + post[r, x ^ b] - pm
                if v > m:
                    m = v
            acc = 0.0
            for u in range(cnt):
                x = idx[u]
                acc += np.exp(ch[r, x] - cm + post[r, x ^ b] - pm - m)
            out[r, b] = m + np.log(acc)
    return out


def syndrome_convolve_sparse(ch, post, floor: float = -700.0) -> np.ndarray:
    """``syndrome_convolve`` for (n, q) batches, skipping channel slots whose
    mass is below exp(floor) relative to the peak (they underflow anyway)."""
    ch = np.ascontiguousarray(ch, dtype=np.float64)
    post = np.ascontiguousarray(post, dtype=np.float64)
    if ch.shape != post.shape or ch.ndim != 2:
        raise ValueError("expected matching (n, q) arrays")
    out = _convolve_sparse(ch, post, float(floor))
    return recenter(np.maximum(out, NEG_INF))
