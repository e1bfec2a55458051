"""Cyclic error-pattern-correcting codes (EPCC).

Blocks are handled internally as integer masks (bit ``k`` = bit at position
``k`` of the block), which keeps syndrome arithmetic to XORs.  The public
functions accept 0/1 numpy vectors as well.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from tepcc.gf import Gf2Poly, mask_mod, pack_bits, poly_order, unpack_bits

NEG_INF = -1.0e9
_FEASIBLE = NEG_INF / 2


class UnrecognizedSyndrome(LookupError):
    """Syndrome is not produced by any single target pattern."""


@dataclass(frozen=True)
class ErrorPattern:
    """A dominant error event as a GF(2) polynomial.

    ``alternating`` marks events whose bipolar error values alternate in sign
    (the dominant events of 1+0.85D); such an event can only sit on a stretch
    of the detected word whose bits alternate.
    """

    type_index: int
    poly: Gf2Poly
    alternating: bool = True

    length: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.poly.bits & 1 == 0:
            raise ValueError("error pattern must have a nonzero constant term")
        object.__setattr__(self, "length", self.poly.degree + 1)


def dominant_patterns(l_max: int) -> list[ErrorPattern]:
    """Target list for 1+0.85D: e^(i)(x) = 1 + x + ... + x^(i-1)."""
    return [ErrorPattern(i, Gf2Poly((1 << i) - 1)) for i in range(1, l_max + 1)]


def to_mask(block) -> int:
    if isinstance(block, (int, np.integer)):
        return int(block)
    return pack_bits(block)


def alternates(block_mask: int, start: int, length: int) -> bool:
    if length <= 1:
        return True
    seg = (block_mask >> start) & ((1 << length) - 1)
    need = (1 << (length - 1)) - 1
    return ((seg ^ (seg >> 1)) & need) == need


def _gap(a_start: int, a_len: int, b_start: int, b_len: int) -> int:
    """Error-free bits between two events (negative when they overlap)."""
    if a_start <= b_start:
        return b_start - (a_start + a_len)
    return a_start - (b_start + b_len)


@dataclass
class EpccCode:
    g: Gf2Poly
    length: int
    targets: list[ErrorPattern]
    syndrome_table: dict[int, list[tuple[int, int]]] = field(init=False, repr=False)
    periods: dict[int, int] = field(init=False)

    def __post_init__(self):
        if self.g.bits & 1 == 0:
            raise ValueError("generator must satisfy g(0) = 1")
        if self.length <= self.p:
            raise ValueError("codeword length must exceed the parity count")
        n = self.length
        self.col_masks = np.array([mask_mod(1 << k, self.g.bits) for k in range(n)], dtype=np.int64)
        # pattern_syndromes[i-1, k] = x^k e^(i)(x) mod g
        self.pattern_syndromes = np.array(
            [[mask_mod(t.poly.bits << k, self.g.bits) for k in range(n)] for t in self.targets],
            dtype=np.int64,
        )
        self.syndrome_table, self.periods = build_syndrome_table(self)
        self.H = ((self.col_masks[None, :] >> np.arange(self.p)[:, None]) & 1).astype(np.uint8)

    @property
    def n(self) -> int:
        return self.length

    @property
    def p(self) -> int:
        return self.g.degree

    @property
    def k(self) -> int:
        return self.length - self.p

    @property
    def l_max(self) -> int:
        return max(t.length for t in self.targets)

    @property
    def rate(self) -> float:
        return self.k / self.n

    def pattern(self, type_index: int) -> ErrorPattern:
        return self.targets[type_index - 1]

    def pattern_mask(self, type_index: int, position: int) -> int:
        return self.targets[type_index - 1].poly.bits << position

    def fits(self, type_index: int, position: int) -> bool:
        return 0 <= position and position + self.targets[type_index - 1].length <= self.length

    def signatures(self, blocks: np.ndarray) -> np.ndarray:
        """Vectorised signatures of the rows of a (..., n) 0/1 array."""
        blocks = np.asarray(blocks, dtype=np.int64)
        bits = (blocks @ self.H.T.astype(np.int64)) & 1
        return bits @ (1 << np.arange(self.p, dtype=np.int64))

    def export_table(self, path: str | Path | None = None) -> str:
        width = (self.p + 3) // 4
        lines = []
        for syn in sorted(self.syndrome_table):
            for i, k in self.syndrome_table[syn]:
                lines.append(f"{syn:0{width}x} {i} {k}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text


def build_syndrome_table(code: EpccCode) -> tuple[dict[int, list[tuple[int, int]]], dict[int, int]]:
    table: dict[int, list[tuple[int, int]]] = {}
    owner: dict[int, int] = {}
    periods: dict[int, int] = {}
    for t, row in zip(code.targets, code.pattern_syndromes):
        i = t.type_index
        for k, s in enumerate(row.tolist()):
            if s == 0:
                raise ValueError(f"e^({i}) at position {k} has a zero syndrome")
            if owner.setdefault(s, i) != i:
                raise ValueError(f"syndrome sets of e^({owner[s]}) and e^({i}) intersect")
            table.setdefault(s, []).append((i, k))
        base = int(row[0])
        P = 1
        while P < code.length and mask_mod(t.poly.bits << P, code.g.bits) != base:
            P += 1
        periods[i] = P
    return table, periods


def _syndrome_sets_ok(g: int, targets: Sequence[ErrorPattern], length: int) -> bool:
    seen: set[int] = set()
    for t in targets:
        cur: set[int] = set()
        for k in range(length):
            s = mask_mod(t.poly.bits << k, g)
            if s == 0 or s in seen:
                return False
            cur.add(s)
        seen |= cur
    return True


def search_generator(targets: Sequence[ErrorPattern], p_max: int, length: int) -> EpccCode:
    """Lowest-degree generator whose target syndrome sets are pairwise disjoint.

    Candidates must have order exactly ``length`` (so the code is cyclic of
    that length and single-bit errors are locatable).  Within a degree the
    coefficient vectors (c0, c1, ..., cd) are scanned in lexicographic order.
    """
    if not targets:
        raise ValueError("empty target list")
    if length < max(t.length for t in targets):
        raise ValueError("codeword shorter than the longest target pattern")
    targets = list(targets)
    for d in range(1, p_max + 1):
        for middle in itertools.product((0, 1), repeat=d - 1):
            g = Gf2Poly.from_coeffs((1, *middle, 1))
            if poly_order(g) != length:
                continue
            if _syndrome_sets_ok(g.bits, targets, length):
                return EpccCode(g, length, targets)
    raise ValueError(f"no generator of degree <= {p_max} separates the targets")


def signature(code: EpccCode, block) -> int:
    """Remainder of the block polynomial modulo g, one shift-register pass."""
    bits = np.asarray(block).ravel() if not isinstance(block, (int, np.integer)) else None
    if bits is None:
        bits = unpack_bits(int(block), code.length)
    if bits.size != code.length:
        raise ValueError(f"block length {bits.size} != {code.length}")
    g = code.g.bits
    top = 1 << code.p
    r = 0
    for b in bits[::-1]:
        r = (r << 1) | (int(b) & 1)
        if r & top:
            r ^= g
    return r


def solve_parity(code: EpccCode, data, target_sig: int = 0) -> np.ndarray:
    """Append p parity bits so the block's signature equals ``target_sig``.

    Parity sits in the last p positions.  With the data signature ``d`` the
    parity polynomial is ``x^-k (target + d) mod g``; dividing by x modulo g is
    a reverse shift-register step, so this costs k steps.
    """
    data = np.asarray(data, dtype=np.uint8).ravel()
    if data.size != code.k:
        raise ValueError(f"expected {code.k} data bits, got {data.size}")
    block = np.zeros(code.length, dtype=np.uint8)
    block[: code.k] = data
    v = signature(code, block) ^ int(target_sig)
    block[code.k :] = unpack_bits(_div_x_power(v, code.g.bits, code.k), code.p)
    return block


def _div_x_power(v: int, g: int, k: int) -> int:
    for _ in range(k):
        if v & 1:
            v ^= g
        v >>= 1
    return v


def encode_systematic(code: EpccCode, data) -> np.ndarray:
    return solve_parity(code, data, 0)


def flat_reliabilities(code: EpccCode, block_mask: int) -> np.ndarray:
    """Zero metric for every fitting, support-consistent pattern; NEG_INF else."""
    rel = np.full((len(code.targets), code.length), NEG_INF)
    for t in code.targets:
        for k in range(code.length - t.length + 1):
            if not t.alternating or alternates(block_mask, k, t.length):
                rel[t.type_index - 1, k] = 0.0
    return rel


def single_error_decode(
    code: EpccCode,
    syndrome: int,
    support,
    reliabilities: np.ndarray | None = None,
) -> list[tuple[int, int]]:
    """Candidate (type, position) pairs for a single-pattern syndrome.

    Pairs come from the syndrome table, are kept only if the pattern fits in
    the block and the detected bits under it are consistent with the
    pattern's polarity, and are ranked by the reliability entry when one is
    given (infeasible entries are dropped).  Raises UnrecognizedSyndrome when
    no target pattern produces ``syndrome``.
    """
    if syndrome == 0:
        raise ValueError("single_error_decode needs a nonzero syndrome")
    entries = code.syndrome_table.get(int(syndrome))
    if entries is None:
        raise UnrecognizedSyndrome(f"syndrome {syndrome:#x} not in table")
    mask = to_mask(support)
    out = []
    for i, k in entries:
        t = code.targets[i - 1]
        if k + t.length > code.length:
            continue
        if t.alternating and not alternates(mask, k, t.length):
            continue
        score = 0.0
        if reliabilities is not None:
            score = float(reliabilities[i - 1, k])
            if score <= _FEASIBLE:
                continue
        out.append((score, k, i))
    out.sort(key=lambda x: (-x[0], x[1], x[2]))
    return [(i, k) for _, k, i in out]


@dataclass(frozen=True)
class Hypothesis:
    type_index: int
    position: int
    length: int
    metric: float
    syndrome: int
    mask: int


def top_hypotheses(code: EpccCode, reliabilities: np.ndarray, limit: int) -> list[Hypothesis]:
    """The ``limit`` largest feasible entries of a reliability matrix."""
    l_max = reliabilities.shape[0]
    flat = reliabilities.T.ravel()  # index = column * l_max + row
    order = np.argsort(-flat, kind="stable")
    out = []
    for idx in order.tolist():
        m = float(flat[idx])
        if len(out) >= limit or m <= _FEASIBLE:
            break
        k, r = divmod(idx, l_max)
        t = code.targets[r]
        if k + t.length > code.length:
            continue
        out.append(Hypothesis(r + 1, k, t.length, m, int(code.pattern_syndromes[r, k]), t.poly.bits << k))
    return out


def independent(hyps: Sequence[Hypothesis], e_free: int) -> bool:
    for a, b in itertools.combinations(hyps, 2):
        if _gap(a.position, a.length, b.position, b.length) <= e_free:
            return False
    return True


def test_patterns(
    code: EpccCode,
    reliabilities: np.ndarray,
    max_tests: int = 16,
    max_hyps: int = 8,
    multiplicity: int = 2,
    e_free: int = 1,
) -> list[tuple[float, tuple[Hypothesis, ...]]]:
    """Error combinations inserted into the detected block to form test words.

    The empty combination comes first, followed by the most likely
    independent combinations of up to ``multiplicity`` of the ``max_hyps``
    best reliability entries.
    """
    if max_tests < 1:
        raise ValueError("max_tests must be >= 1")
    hyps = top_hypotheses(code, reliabilities, max_hyps)
    combos: list[tuple[float, tuple[Hypothesis, ...]]] = []
    for m in range(1, multiplicity + 1):
        for combo in itertools.combinations(hyps, m):
            if independent(combo, e_free):
                combos.append((sum(h.metric for h in combo), combo))
    combos.sort(key=lambda t: -t[0])
    return [(0.0, ())] + combos[: max_tests - 1]


def list_decode(
    code: EpccCode,
    syndrome: int,
    ml_block,
    reliabilities: np.ndarray | None = None,
    max_tests: int = 16,
    max_hyps: int = 8,
    multiplicity: int = 2,
    e_free: int = 1,
    tests: list[tuple[float, tuple[Hypothesis, ...]]] | None = None,
) -> list[tuple[int, float]]:
    """Candidate blocks whose error pattern relative to ``ml_block`` has the
    given syndrome.

    Test words are ``ml_block`` plus the combinations from
    ``test_patterns`` (pass ``tests`` to reuse them across syndromes); each
    test word is then closed with one more pattern from the syndrome table.
    A candidate scores the sum of its patterns' metrics.  Returns
    (block mask, log-likelihood) pairs, best first.
    """
    ml = to_mask(ml_block)
    if reliabilities is None:
        reliabilities = flat_reliabilities(code, ml)
    if tests is None:
        tests = test_patterns(code, reliabilities, max_tests, max_hyps, multiplicity, e_free)

    best: dict[int, float] = {}
    for metric, combo in tests:
        err = 0
        syn = int(syndrome)
        for h in combo:
            err ^= h.mask
            syn ^= h.syndrome
        word = ml ^ err
        if syn == 0:
            _keep(best, word, metric)
            continue
        for i, k in code.syndrome_table.get(syn, ()):
            t = code.targets[i - 1]
            if k + t.length > code.length:
                continue
            if any(_gap(k, t.length, h.position, h.length) <= e_free for h in combo):
                continue
            if t.alternating and not alternates(word, k, t.length):
                continue
            rel = float(reliabilities[i - 1, k])
            if rel <= _FEASIBLE:
                continue
            _keep(best, word ^ (t.poly.bits << k), metric + rel)
    return sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))


def _keep(best: dict[int, float], word: int, metric: float) -> None:
    if metric > best.get(word, -np.inf):
        best[word] = metric
