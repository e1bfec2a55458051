"""Preset code geometries and the outer Reed-Solomon wrapper.

A ``CodeSystem`` bundles the tensor-product code, the optional outer RS code
that protects user data, and the RS stopping thresholds.  User data is RS
encoded first; the RS codeword bits (shortened or zero-padded to fit) form
the TPPC data payload.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from tepcc.epcc import EpccCode, dominant_patterns, search_generator
from tepcc.gf import FieldContext, pack_rows, unpack_rows
from tepcc.qldpc import peg_qc_construct
from tepcc.rs import RsCode
from tepcc.tppc import TppcCode


@dataclass(frozen=True)
class Geometry:
    name: str
    n1: int
    l_max: int
    p1_max: int
    inner: str  # "qldpc" or "rs"
    n2: int
    k2: int
    b: int = 0
    w: int = 3
    outer: tuple[int, int, int] | None = None  # (n, k, m)
    error_threshold: int = 0  # halt when fewer RS symbol errors than this
    erasure_threshold: int = 0  # erasure-decode when fewer erasures than this


PRESETS: dict[str, Geometry] = {
    "TPPC-A": Geometry("TPPC-A", 12, 5, 6, "qldpc", 390, 312, b=26),
    "TPPC-B": Geometry("TPPC-B", 12, 5, 6, "qldpc", 780, 624, b=52),
    "TPPC-C": Geometry("TPPC-C", 12, 5, 6, "qldpc", 380, 323, b=19, outer=(422, 410, 10), error_threshold=6, erasure_threshold=12),
    "TPPC-D": Geometry("TPPC-D", 12, 5, 6, "qldpc", 760, 646, b=38, outer=(844, 820, 10), error_threshold=12, erasure_threshold=24),
    "TPPC-RS": Geometry("TPPC-RS", 18, 10, 8, "rs", 255, 195),
}


class OuterCode:
    """Outer RS code over GF(2^m) mapped onto a k3-bit TPPC payload.

    RS symbol ``j`` is payload bits ``[m*j - s, m*(j+1) - s)`` where ``s``
    leading bits of the first data symbol are fixed zero (shortening) when the
    RS word is longer than the payload; a shorter RS word is zero padded.
    """

    def __init__(self, n: int, k: int, m: int, k3: int):
        self.rs = RsCode(FieldContext(m), n, k)
        self.m = m
        self.k3 = k3
        self.shorten = max(0, n * m - k3)
        if self.shorten >= m:
            raise ValueError("outer code too long for the payload")
        self.pad = max(0, k3 - n * m)

    @property
    def user_bits(self) -> int:
        return self.rs.k * self.m - self.shorten

    def encode(self, user) -> np.ndarray:
        user = np.asarray(user, dtype=np.uint8)
        if user.shape[-1] != self.user_bits:
            raise ValueError(f"expected {self.user_bits} user bits, got {user.shape[-1]}")
        lead = user.shape[:-1]
        bits = np.concatenate([np.zeros(lead + (self.shorten,), np.uint8), user], axis=-1)
        syms = pack_rows(bits.reshape(lead + (self.rs.k, self.m)))
        word = self.rs.encode(syms)
        return self.symbols_to_payload(word)

    def symbols_to_payload(self, word) -> np.ndarray:
        word = np.asarray(word, dtype=np.int64)
        bits = unpack_rows(word, self.m).reshape(word.shape[:-1] + (-1,))[..., self.shorten :]
        pad = np.zeros(word.shape[:-1] + (self.pad,), np.uint8)
        return np.concatenate([bits, pad], axis=-1)

    def payload_to_symbols(self, payload) -> np.ndarray:
        payload = np.asarray(payload, dtype=np.uint8)
        lead = payload.shape[:-1]
        bits = np.concatenate([np.zeros(lead + (self.shorten,), np.uint8), payload[..., : self.k3 - self.pad]], axis=-1)
        return pack_rows(bits.reshape(lead + (self.rs.n, self.m)))

    def user_from_symbols(self, word) -> np.ndarray:
        word = np.asarray(word, dtype=np.int64)
        bits = unpack_rows(word[..., : self.rs.k], self.m).reshape(word.shape[:-1] + (-1,))
        return bits[..., self.shorten :]

    def symbol_of_payload_bit(self) -> np.ndarray:
        """RS symbol index of every payload bit (-1 for padding)."""
        idx = (np.arange(self.k3) + self.shorten) // self.m
        idx[self.k3 - self.pad :] = -1
        return idx


@dataclass
class CodeSystem:
    name: str
    tppc: TppcCode
    outer: OuterCode | None = None
    error_threshold: int = 0
    erasure_threshold: int = 0
    _rs_of_symbol: list | None = field(default=None, repr=False)

    @property
    def user_bits(self) -> int:
        return self.outer.user_bits if self.outer else self.tppc.k3

    @property
    def rate(self) -> Fraction:
        return Fraction(self.user_bits, self.tppc.n3)

    def encode(self, user) -> np.ndarray:
        payload = self.outer.encode(user) if self.outer else np.asarray(user, dtype=np.uint8)
        return self.tppc.encode(payload)

    def user_from_word(self, word) -> np.ndarray:
        payload = self.tppc.extract_data(word)
        if self.outer is None:
            return payload
        return self.outer.user_from_symbols(self.outer.payload_to_symbols(payload))

    def rs_symbols_of_tensor_symbol(self) -> list[np.ndarray]:
        """Outer RS symbols overlapping each tensor symbol's payload bits."""
        if self._rs_of_symbol is None:
            t = self.tppc
            owner = self.outer.symbol_of_payload_bit()
            tensor_of_bit = t.data_positions() // t.n1
            self._rs_of_symbol = [np.unique(owner[(tensor_of_bit == j) & (owner >= 0)]) for j in range(t.n2)]
        return self._rs_of_symbol


def build_epcc(n1: int, l_max: int, p_max: int) -> EpccCode:
    return _epcc_cached(n1, l_max, p_max)


@lru_cache(maxsize=None)
def _epcc_cached(n1: int, l_max: int, p_max: int) -> EpccCode:
    return search_generator(dominant_patterns(l_max), p_max, n1)


def build_system(preset: str | Geometry, seed: int = 0) -> CodeSystem:
    geo = PRESETS[preset] if isinstance(preset, str) else preset
    if isinstance(preset, str) and preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}")
    return _system_cached(geo, seed)


@lru_cache(maxsize=None)
def _system_cached(geo: Geometry, seed: int) -> CodeSystem:
    c1 = build_epcc(geo.n1, geo.l_max, geo.p1_max)
    if c1.l_max >= c1.n:
        raise ValueError("dominant events must be shorter than a tensor symbol")
    ctx = FieldContext(c1.p)
    if geo.inner == "rs":
        c2 = RsCode(ctx, geo.n2, geo.k2)
    elif geo.inner == "qldpc":
        if geo.b <= 0 or geo.n2 % geo.b or (geo.n2 - geo.k2) % geo.b:
            raise ValueError(f"{geo.name}: circulant size must divide n2 and n2 - k2")
        c2 = peg_qc_construct(geo.n2 // geo.b, (geo.n2 - geo.k2) // geo.b, geo.b, geo.w, ctx, seed=seed)
    else:
        raise ValueError(f"unknown inner code kind {geo.inner!r}")
    tppc = TppcCode(c1, c2)
    outer = OuterCode(*geo.outer, tppc.k3) if geo.outer else None
    return CodeSystem(geo.name, tppc, outer, geo.error_threshold, geo.erasure_threshold)
