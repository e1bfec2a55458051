"""Reed-Solomon codes over GF(2^m): systematic encoding, Berlekamp-Massey and
erasure decoding, and the hard T-EPCC-RS decoder.

Codeword index ``i`` holds the coefficient of ``x^(n-1-i)``; data occupies
indices ``0..k-1`` and parity the rest.  Generator roots are
``alpha^1 .. alpha^(2t)`` (narrow sense).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from tepcc.epcc import UnrecognizedSyndrome, list_decode, single_error_decode
from tepcc.gf import FieldContext, pack_bits, unpack_bits


@dataclass
class HardDecodeResult:
    word: np.ndarray
    success: bool
    positions: list[int] = field(default_factory=list)

    @property
    def status(self) -> str:
        return "success" if self.success else "failure"


class RsCode:
    def __init__(self, ctx: FieldContext, n: int, k: int, fcr: int = 1):
        if not 0 < k < n <= ctx.q - 1:
            raise ValueError(f"invalid RS({n},{k}) over GF({ctx.q})")
        if (n - k) % 2:
            raise ValueError("n - k must be even")
        self.ctx, self.n, self.k, self.fcr = ctx, n, k, fcr
        self.t = (n - k) // 2
        g = [1]
        for j in range(fcr, fcr + 2 * self.t):
            g = _poly_mul(ctx, g, [1, ctx.alpha_pow(j)])  # high degree first
        self.generator = np.array(g, dtype=np.int64)
        self._parity_matrix = self._systematic_parity()
        # H[r, i] = alpha^((r + fcr) * (n - 1 - i))
        r = np.arange(2 * self.t)[:, None] + fcr
        e = (self.n - 1 - np.arange(self.n))[None, :]
        self._h_log = (r * e) % (ctx.q - 1)

    def __repr__(self) -> str:
        return f"RsCode(n={self.n}, k={self.k}, t={self.t}, GF(2^{self.ctx.m}))"

    @property
    def p(self) -> int:
        return self.n - self.k

    def _systematic_parity(self) -> np.ndarray:
        # row i = x^(n-1-i) mod g, stepped up from x^p one LFSR shift at a time
        g_tail = self.generator[1:]
        r = g_tail.copy()  # x^p mod g (g monic)
        rems = np.zeros((self.n, self.p), dtype=np.int64)
        rems[self.p] = r
        for e in range(self.p + 1, self.n):
            top = r[0]
            r = np.append(r[1:], 0)
            if top:
                r ^= self.ctx.vmul(g_tail, top)
            rems[e] = r
        return rems[self.n - 1 - np.arange(self.k)]

    def parity_check_matrix(self) -> np.ndarray:
        return self.ctx.exp[self._h_log]

    def encode(self, data) -> np.ndarray:
        data = np.asarray(data, dtype=np.int64)
        if data.shape[-1] != self.k:
            raise ValueError(f"expected {self.k} data symbols, got {data.shape[-1]}")
        prod = self.ctx.vmul(data[..., :, None], self._parity_matrix)
        parity = np.bitwise_xor.reduce(prod, axis=-2)
        return np.concatenate([data, parity], axis=-1)

    def syndromes(self, word) -> np.ndarray:
        word = np.asarray(word, dtype=np.int64)
        prod = self.ctx.vmul(self.ctx.exp[self._h_log], word[..., None, :])
        return np.bitwise_xor.reduce(prod, axis=-1)

    def is_codeword(self, word) -> bool:
        return not np.any(self.syndromes(word))


def _poly_mul(ctx: FieldContext, a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] ^= ctx.mul(x, y)
    return out


def _remainder(ctx: FieldContext, num: list[int], den: list[int]) -> list[int]:
    """Remainder of high-degree-first polynomial division (den monic)."""
    num = list(num)
    for i in range(len(num) - len(den) + 1):
        c = num[i]
        if c:
            for j in range(1, len(den)):
                num[i + j] ^= ctx.mul(den[j], c)
    return num[len(num) - len(den) + 1 :]


def _eval_low(ctx: FieldContext, poly: list[int], x: int) -> int:
    """Evaluate a low-degree-first polynomial at x (Horner)."""
    acc = 0
    for c in reversed(poly):
        acc = ctx.mul(acc, x) ^ c
    return acc


def _chien(code: RsCode, locator: list[int]) -> list[int]:
    """Indices i with locator(alpha^-(n-1-i)) == 0."""
    ctx = code.ctx
    e = (code.n - 1 - np.arange(code.n)) % (ctx.q - 1)
    inv_log = (-e) % (ctx.q - 1)
    acc = np.zeros(code.n, dtype=np.int64)
    for j, c in enumerate(locator):
        if c:
            acc ^= ctx.exp[(ctx.log[c] + j * inv_log) % (ctx.q - 1)]
    return np.flatnonzero(acc == 0).tolist()


def _forney(code: RsCode, synd: np.ndarray, locator: list[int], positions: list[int]) -> list[int]:
    ctx = code.ctx
    two_t = 2 * code.t
    omega = [0] * two_t
    for i, s in enumerate(synd.tolist()):
        if s:
            for j, c in enumerate(locator):
                if i + j < two_t and c:
                    omega[i + j] ^= ctx.mul(s, c)
    deriv = [locator[j] if j % 2 == 1 else 0 for j in range(1, len(locator))]
    values = []
    for pos in positions:
        x = ctx.alpha_pow(code.n - 1 - pos)
        x_inv = ctx.inv(x)
        den = _eval_low(ctx, deriv, x_inv)
        if den == 0:
            raise ZeroDivisionError
        val = ctx.div(_eval_low(ctx, omega, x_inv), den)
        if code.fcr != 1:
            val = ctx.mul(val, ctx.pow(x, 1 - code.fcr))
        values.append(val)
    return values


def _berlekamp_massey(ctx: FieldContext, synd: list[int]) -> list[int]:
    lam, prev = [1], [1]
    L, m, b = 0, 1, 1
    for r, s in enumerate(synd):
        d = s
        for i in range(1, L + 1):
            if i < len(lam):
                d ^= ctx.mul(lam[i], synd[r - i])
        if d == 0:
            m += 1
            continue
        coef = ctx.div(d, b)
        shifted = [0] * m + [ctx.mul(coef, c) for c in prev]
        new = [x ^ y for x, y in _zip_pad(lam, shifted)]
        if 2 * L <= r:
            prev, b, L, m = lam, d, r + 1 - L, 1
        else:
            m += 1
        lam = new
    lam = lam[: L + 1] + [0] * (L + 1 - len(lam))
    return lam


def _zip_pad(a: list[int], b: list[int]):
    n = max(len(a), len(b))
    return zip(a + [0] * (n - len(a)), b + [0] * (n - len(b)))


def rs_encode(code: RsCode, data) -> np.ndarray:
    return code.encode(data)


def bm_decode(code: RsCode, word) -> HardDecodeResult:
    """Correct up to t symbol errors; failure when the locator is inconsistent."""
    word = np.asarray(word, dtype=np.int64)
    if word.size != code.n:
        raise ValueError(f"word length {word.size} != {code.n}")
    synd = code.syndromes(word)
    if not synd.any():
        return HardDecodeResult(word.copy(), True, [])
    lam = _berlekamp_massey(code.ctx, synd.tolist())
    nu = len(lam) - 1
    if nu > code.t or lam[-1] == 0:
        return HardDecodeResult(word.copy(), False, [])
    positions = _chien(code, lam)
    if len(positions) != nu:
        return HardDecodeResult(word.copy(), False, [])
    try:
        values = _forney(code, synd, lam, positions)
    except ZeroDivisionError:
        return HardDecodeResult(word.copy(), False, [])
    out = word.copy()
    for pos, val in zip(positions, values):
        out[pos] ^= val
    if code.syndromes(out).any():
        return HardDecodeResult(word.copy(), False, [])
    return HardDecodeResult(out, True, positions)


def erasure_decode(code: RsCode, word, erasures) -> HardDecodeResult:
    """Fill erased positions assuming no other errors (up to 2t erasures)."""
    word = np.asarray(word, dtype=np.int64)
    positions = sorted(set(int(e) for e in erasures))
    if any(not 0 <= e < code.n for e in positions):
        raise ValueError("erasure position out of range")
    if len(positions) > 2 * code.t:
        return HardDecodeResult(word.copy(), False, [])
    synd = code.syndromes(word)
    if not synd.any():
        return HardDecodeResult(word.copy(), True, [])
    if not positions:
        return HardDecodeResult(word.copy(), False, [])
    ctx = code.ctx
    gamma = reduce(
        lambda acc, pos: _poly_mul(ctx, acc, [1, ctx.alpha_pow(code.n - 1 - pos)]),
        positions,
        [1],
    )  # low degree first: prod (1 + X_i x)
    values = _forney(code, synd, gamma, positions)
    out = word.copy()
    for pos, val in zip(positions, values):
        out[pos] ^= val
    if code.syndromes(out).any():
        return HardDecodeResult(word.copy(), False, [])
    return HardDecodeResult(out, True, [p for p, v in zip(positions, values) if v])


def tppc_rs_hard_decode(tppc, received, reliabilities=None, max_tests: int = 16):
    """Hard decoder for EPCC x RS tensor-product codes.

    ``reliabilities`` optionally holds one (l_max, n1) metric matrix per
    tensor symbol; with it, ambiguous EPCC syndromes resolve toward the most
    reliable position, without it toward the lowest position.

    Returns (word, success, flagged) where ``flagged`` lists tensor symbols
    whose EPCC step found no candidate.
    """
    from tepcc.tppc import tensor_signatures  # local: tppc imports nothing from here

    c1, c2 = tppc.c1, tppc.c2
    received = np.asarray(received, dtype=np.uint8)
    if received.size != tppc.n3:
        raise ValueError(f"received length {received.size} != {tppc.n3}")
    observed = tensor_signatures(tppc, received)
    res = bm_decode(c2, observed)
    if not res.success:
        return received.copy(), False, []
    err_syn = res.word ^ observed
    word = received.copy()
    flagged = []
    for j in np.flatnonzero(err_syn).tolist():
        block = word[j * c1.n : (j + 1) * c1.n]
        rel = None if reliabilities is None else reliabilities[j]
        fixed = _epcc_correct(c1, int(err_syn[j]), block, rel, max_tests)
        if fixed is None:
            flagged.append(j)
            continue
        word[j * c1.n : (j + 1) * c1.n] = fixed
    return word, True, flagged


def _epcc_correct(c1, syn, block, rel, max_tests):
    try:
        cands = single_error_decode(c1, syn, block, rel)
    except UnrecognizedSyndrome:
        cands = None
    if cands:
        i, k = cands[0]
        return unpack_bits(pack_bits(block) ^ c1.pattern_mask(i, k), c1.n)
    found = list_decode(c1, syn, block, rel, max_tests=max_tests)
    if not found:
        return None
    return unpack_bits(found[0][0], c1.n)
