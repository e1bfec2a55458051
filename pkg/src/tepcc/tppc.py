"""Tensor-product parity codes built from an EPCC and a signature-correcting code.

Codeword layout: ``n2`` tensor symbols of ``n1`` bits, symbol ``j`` at bits
``[j*n1, (j+1)*n1)``.  Data fills the first ``k2`` symbols completely (the
beta block), then the first ``k1`` bits of each of the last ``p2`` symbols
(the gamma block); the last ``p1`` bits of those symbols are parity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Protocol

import numpy as np

from tepcc.epcc import EpccCode
from tepcc.gf import FieldContext


class SignatureCode(Protocol):
    ctx: FieldContext
    n: int
    k: int

    def encode(self, data) -> np.ndarray: ...

    def parity_check_matrix(self) -> np.ndarray: ...


@dataclass
class TppcCode:
    c1: EpccCode
    c2: SignatureCode

    def __post_init__(self):
        if self.c2.ctx.m != self.c1.p:
            raise ValueError(
                f"signature code is over GF(2^{self.c2.ctx.m}) but the EPCC has {self.c1.p} parity bits"
            )

    @property
    def ctx(self) -> FieldContext:
        return self.c2.ctx

    @property
    def n1(self) -> int:
        return self.c1.n

    @property
    def k1(self) -> int:
        return self.c1.k

    @property
    def p1(self) -> int:
        return self.c1.p

    @property
    def n2(self) -> int:
        return self.c2.n

    @property
    def k2(self) -> int:
        return self.c2.k

    @property
    def p2(self) -> int:
        return self.c2.n - self.c2.k

    @property
    def n3(self) -> int:
        return self.n1 * self.n2

    @property
    def p3(self) -> int:
        return self.p1 * self.p2

    @property
    def k3(self) -> int:
        return self.n3 - self.p3

    @property
    def rate(self) -> Fraction:
        return Fraction(self.k3, self.n3)

    def data_positions(self) -> np.ndarray:
        beta = np.arange(self.n1 * self.k2)
        cols = (self.k2 + np.arange(self.p2))[:, None] * self.n1 + np.arange(self.k1)[None, :]
        return np.concatenate([beta, cols.ravel()])

    def extract_data(self, word) -> np.ndarray:
        return np.asarray(word)[..., self.data_positions()]

    def parity_check_matrix(self) -> np.ndarray:
        return build_tensor_parity_check(self.c1.H, self.c2.parity_check_matrix(), self.ctx)

    def encode(self, data) -> np.ndarray:
        return encode(self, data)

    def is_codeword(self, word) -> bool:
        return bool(self.c2.is_codeword(tensor_signatures(self, word)))


def build_tensor_parity_check(c1_H, c2_H, ctx: FieldContext) -> np.ndarray:
    """Binary (p1*p2) x (n1*n2) parity-check matrix of the tensor product.

    Row ``r*p1 + b`` is bit ``b`` of GF row ``r``; column ``t*n1 + j`` pairs
    symbol ``t`` of the outer code with bit ``j`` of the EPCC block.
    """
    c1_H = np.asarray(c1_H, dtype=np.int64)
    c2_H = np.asarray(c2_H, dtype=np.int64)
    if c1_H.ndim != 2 or c2_H.ndim != 2:
        raise ValueError("parity-check matrices must be 2-D")
    p1, n1 = c1_H.shape
    p2, n2 = c2_H.shape
    if p1 != ctx.m:
        raise ValueError(f"EPCC parity count {p1} does not match GF(2^{ctx.m})")
    if np.any(c2_H < 0) or np.any(c2_H >= ctx.q):
        raise ValueError("signature-code matrix entries outside the field")
    h1 = (c1_H << np.arange(p1)[:, None]).sum(axis=0)  # column j as a field element
    prod = ctx.vmul(c2_H[:, :, None], h1[None, None, :]).reshape(p2, n2 * n1)
    bits = (prod[:, None, :] >> np.arange(p1)[None, :, None]) & 1
    return bits.reshape(p2 * p1, n2 * n1).astype(np.uint8)


def tensor_signatures(code: TppcCode, word) -> np.ndarray:
    """EPCC signature of every tensor symbol, as GF(2^p1) elements."""
    word = np.asarray(word)
    if word.shape[-1] != code.n3:
        raise ValueError(f"word length {word.shape[-1]} != {code.n3}")
    blocks = word.reshape(word.shape[:-1] + (code.n2, code.n1))
    return code.c1.signatures(blocks)


def encode(code: TppcCode, data) -> np.ndarray:
    """Systematic tensor-product encoding by back substitution.

    The beta columns' signatures are encoded by the signature code; each
    gamma column then gets parity bits that make its signature equal the
    corresponding parity signature.  Accepts a batch on leading axes.
    """
    data = np.asarray(data, dtype=np.uint8)
    if data.shape[-1] != code.k3:
        raise ValueError(f"expected {code.k3} data bits, got {data.shape[-1]}")
    lead = data.shape[:-1]
    n1, k1, k2, p2 = code.n1, code.k1, code.k2, code.p2
    word = np.zeros(lead + (code.n2, n1), dtype=np.uint8)
    word[..., :k2, :] = data[..., : n1 * k2].reshape(lead + (k2, n1))
    word[..., k2:, :k1] = data[..., n1 * k2 :].reshape(lead + (p2, k1))
    sigs = code.c1.signatures(word[..., :k2, :])
    target = code.c2.encode(sigs)[..., k2:]
    # gamma parity: x^-k1 (target + sig(data part)) mod g, one reverse FSR pass
    v = code.c1.signatures(word[..., k2:, :]) ^ target
    g = code.c1.g.bits
    for _ in range(k1):
        v = np.where(v & 1, v ^ g, v) >> 1
    word[..., k2:, k1:] = (v[..., None] >> np.arange(code.p1)) & 1
    return word.reshape(lead + (code.n3,))
