"""Iterative soft decoder for EPCC x QC-qLDPC tensor-product codes.

Each global iteration runs: Viterbi with the current bit priors, the
correlator bank, signature mlLLRs, FFT-SPA on the signatures, the
error-syndrome convolution, per-symbol EPCC list decoding, and bit-LLR
feedback.  An outer RS code (when present) decides when to stop.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from tepcc.channel import ChannelModel, SectorFrame, euclidean_branch_metrics, viterbi_detect
from tepcc.correlator import sector_metrics, modified_matrices
from tepcc.epcc import NEG_INF, EpccCode, list_decode, test_patterns
from tepcc.gf import unpack_rows
from tepcc.mlllr import HypothesisList, signature_log_pmf, syndrome_convolve_sparse
from tepcc.qldpc import FftSpaDecoder, QcLdpcCode
from tepcc.rs import bm_decode, erasure_decode, tppc_rs_hard_decode
from tepcc.systems import CodeSystem

log = logging.getLogger(__name__)

STATUSES = ("clean", "rs_corrected", "erasure_corrected", "failure")


@dataclass
class DecoderConfig:
    global_iters: int = 3
    ldpc_iters: int = 50
    syndrome_candidates: int = 3
    lambda_max: float = 10.0
    beta_start: float = 0.3
    beta_step: float = 0.35
    L: int = 8
    M: int = 3
    max_combos: int = 64
    max_tests: int = 16
    list_hyps: int = 8
    list_multiplicity: int = 2
    signature_floor: float | None = -20.0  # log-prob floor for unpopulated signature slots
    error_threshold: int | None = None  # None: take the system's
    erasure_threshold: int | None = None
    trace: bool = False

    def __post_init__(self):
        for name in ("global_iters", "ldpc_iters", "syndrome_candidates", "L", "M", "max_combos", "max_tests"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.lambda_max <= 0:
            raise ValueError("lambda_max must be positive")
        if not 0 < self.beta_start <= 1 or self.beta_step < 0:
            raise ValueError("beta schedule must stay in (0, 1]")

    def beta(self, iteration: int) -> float:
        return min(1.0, self.beta_start + self.beta_step * (iteration - 1))


@dataclass
class EpccStageResult:
    active: bool
    candidates: list[tuple[int, float]]  # (block mask, log-likelihood), best first
    word: int  # released block
    erased: bool = False


@dataclass
class StopDecision:
    action: str  # halt | continue | erasure_decode_now
    status: str = "failure"
    rs_word: np.ndarray | None = None
    rs_errors: int = -1


@dataclass
class SectorResult:
    bits: np.ndarray  # decoded channel word
    user: np.ndarray  # decoded user data
    status: str
    iterations: int
    diagnostics: list[dict] = field(default_factory=list)
    user_by_iteration: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")


# ------------------------------------------------------------------ stages


def epcc_stage(
    code: EpccCode,
    ml_block: int,
    syndrome_mlllr: np.ndarray,
    reliabilities: np.ndarray,
    cfg: DecoderConfig | None = None,
    e_free: int = 1,
) -> EpccStageResult:
    """List-decode one tensor symbol against its error-syndrome mlLLR.

    Inactive when the most likely error syndrome is zero: the detected block
    already carries the decoded signature and is released unchanged.
    Otherwise the top syndrome values are decoded and every candidate's
    log-likelihood is biased by the log-likelihood of its syndrome.
    """
    cfg = cfg or DecoderConfig()
    syn = np.asarray(syndrome_mlllr, dtype=np.float64)
    if int(np.argmax(syn)) == 0:
        return EpccStageResult(False, [(ml_block, 0.0)], ml_block)
    order = np.argsort(-syn, kind="stable")[: cfg.syndrome_candidates]
    tests = test_patterns(code, reliabilities, cfg.max_tests, cfg.list_hyps, cfg.list_multiplicity, e_free)
    best: dict[int, float] = {}
    for beta in order.tolist():
        bias = float(syn[beta])
        for word, ll in list_decode(
            code,
            beta,
            ml_block,
            reliabilities,
            max_tests=cfg.max_tests,
            max_hyps=cfg.list_hyps,
            multiplicity=cfg.list_multiplicity,
            e_free=e_free,
            tests=tests,
        ):
            if ll + bias > best.get(word, -np.inf):
                best[word] = ll + bias
    if not best:
        return EpccStageResult(True, [], ml_block, erased=True)
    cands = sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))
    return EpccStageResult(True, cands, cands[0][0])


def bit_llr_feedback(candidates, n1: int, cfg: DecoderConfig, iteration: int) -> np.ndarray:
    """Per-bit lambda = log P(0)/P(1) from a candidate list.

    Bits where candidates disagree get the group-wise max* log ratio; bits
    where they agree get beta^iter * lambda_max toward the agreed value.  All
    values are clamped to +-lambda_max.  An empty list gives zeros.
    """
    if not candidates:
        return np.zeros(n1)
    words = unpack_rows(np.array([w for w, _ in candidates], dtype=np.int64), n1).astype(bool)
    ll = np.array([l for _, l in candidates], dtype=np.float64)
    ones = words
    zeros = ~words
    neg = -np.inf
    lz = np.where(zeros, ll[:, None], neg)
    lo = np.where(ones, ll[:, None], neg)
    with np.errstate(invalid="ignore"):
        s_plus = np.logaddexp.reduce(lz, axis=0)
        s_minus = np.logaddexp.reduce(lo, axis=0)
    split = zeros.any(axis=0) & ones.any(axis=0)
    scaled = cfg.beta(iteration) * cfg.lambda_max * np.where(zeros[0], 1.0, -1.0)
    lam = np.where(split, s_plus - s_minus, scaled)
    return np.clip(lam, -cfg.lambda_max, cfg.lambda_max)


def stopping_check(system: CodeSystem, word: np.ndarray, erased_rs: set[int], cfg: DecoderConfig, final: bool) -> StopDecision:
    """Outer-RS stopping rule for the released hard decisions.

    Zero syndrome halts.  Otherwise BM correction halts when it finds fewer
    errors than the error threshold; fewer erasures than the erasure
    threshold ask for erasure decoding.  On the final iteration the full
    RS capability is used.
    """
    outer = system.outer
    tppc = system.tppc
    if outer is None:
        if tppc.is_codeword(word):
            return StopDecision("halt", "clean")
        return StopDecision("continue")
    rs_word = outer.payload_to_symbols(tppc.extract_data(word))
    if not outer.rs.syndromes(rs_word).any():
        status = "clean" if tppc.is_codeword(word) else "rs_corrected"
        return StopDecision("halt", status, rs_word, 0)
    err_thr = cfg.error_threshold if cfg.error_threshold is not None else system.error_threshold
    era_thr = cfg.erasure_threshold if cfg.erasure_threshold is not None else system.erasure_threshold
    if final:
        err_thr = outer.rs.t + 1
        era_thr = 2 * outer.rs.t + 1
    res = bm_decode(outer.rs, rs_word)
    if res.success and len(res.positions) < err_thr:
        return StopDecision("halt", "rs_corrected", res.word, len(res.positions))
    n_err = len(res.positions) if res.success else -1
    if 0 < len(erased_rs) < era_thr:
        return StopDecision("erasure_decode_now", "failure", rs_word, n_err)
    return StopDecision("continue", "failure", rs_word, n_err)


# ------------------------------------------------------------------ decoder


class SoftDecoder:
    """Holds the per-system tables; one instance can decode many sectors."""

    def __init__(self, system: CodeSystem, cfg: DecoderConfig | None = None):
        self.system = system
        self.cfg = cfg or DecoderConfig()
        self.tppc = system.tppc
        if not isinstance(self.tppc.c2, QcLdpcCode):
            raise ValueError("the soft decoder needs a QC-qLDPC signature code")
        self.c1 = self.tppc.c1
        self.spa = FftSpaDecoder(self.tppc.c2)
        self._rs_map = system.rs_symbols_of_tensor_symbol() if system.outer else None

    def decode(self, model: ChannelModel, received) -> SectorResult:
        cfg, tppc, c1 = self.cfg, self.tppc, self.c1
        n1, n2 = tppc.n1, tppc.n2
        N = tppc.n3
        e_free = model.e_free
        euclid = euclidean_branch_metrics(model, received)
        priors = np.zeros(N)
        diags: list[dict] = []
        by_iter: list[np.ndarray] = []
        outcome = None
        for it in range(1, cfg.global_iters + 1):
            ml = viterbi_detect(model, received, priors, euclid)
            full = sector_metrics(model, received, ml, priors, c1.targets)
            Ct = modified_matrices(full, n1, n2)
            blocks = ml.reshape(n2, n1)
            ml_sig = c1.signatures(blocks)
            ml_masks = blocks.astype(np.int64) @ (1 << np.arange(n1, dtype=np.int64))
            hyps = HypothesisList.from_matrices(c1, Ct, cfg.L)
            ch = signature_log_pmf(c1, ml_sig, hyps, cfg.M, e_free, cfg.max_combos)
            if cfg.signature_floor is not None:
                ch = np.maximum(ch, cfg.signature_floor)
            ch = ch - ch[:, :1]
            spa = self.spa.decode(ch, cfg.ldpc_iters)
            # error syndrome = observed (Viterbi) signature + decoded signature
            observed = np.full_like(ch, NEG_INF)
            observed[np.arange(n2), ml_sig] = 0.0
            syn = syndrome_convolve_sparse(observed, spa.posterior, floor=-60.0)
            active_idx = np.flatnonzero(syn.argmax(axis=1) != 0)

            words = ml_masks.copy()
            wbits = blocks.copy()
            lam = cfg.beta(it) * cfg.lambda_max * (1.0 - 2.0 * wbits)
            erased = []
            for j in active_idx.tolist():
                res = epcc_stage(c1, int(ml_masks[j]), syn[j], Ct[j], cfg, e_free)
                words[j] = res.word
                wbits[j] = unpack_rows(res.word, n1)
                lam[j] = bit_llr_feedback(res.candidates, n1, cfg, it)
                if res.erased:
                    erased.append(j)
            word = wbits.reshape(N).astype(np.uint8)

            erased_rs: set[int] = set()
            if self._rs_map is not None:
                for j in active_idx.tolist():
                    erased_rs.update(self._rs_map[j].tolist())
            final_view = self._conclude(word, erased_rs, final=True)
            by_iter.append(final_view[1])
            if it == cfg.global_iters:
                outcome = final_view
            else:
                stop = self._conclude(word, erased_rs, final=False)
                if stop[2]:
                    outcome = stop
            diags.append(
                {
                    "iteration": it,
                    "epcc_active": int(active_idx.size),
                    "erased_symbols": len(erased),
                    "erased_rs": len(erased_rs),
                    "ldpc_iters": spa.iterations,
                    "ldpc_converged": spa.converged,
                    "rs_errors": final_view[3],
                }
            )
            if cfg.trace:
                log.debug("iteration %d: %s", it, diags[-1])
            if outcome is not None:
                status, user, _, _ = outcome
                return SectorResult(word, user, status, it, diags, by_iter)
            priors = lam.reshape(N)
        raise AssertionError("unreachable")

    def _conclude(self, word, erased_rs, final: bool):
        """(status, user bits, halted, rs_errors) for a released word."""
        system = self.system
        stop = stopping_check(system, word, erased_rs, self.cfg, final)
        if stop.action == "erasure_decode_now":
            res = erasure_decode(system.outer.rs, stop.rs_word, sorted(erased_rs))
            if res.success:
                return "erasure_corrected", system.outer.user_from_symbols(res.word), True, stop.rs_errors
        if stop.action == "halt":
            if system.outer is None:
                return stop.status, system.tppc.extract_data(word), True, 0
            return stop.status, system.outer.user_from_symbols(stop.rs_word), True, stop.rs_errors
        user = system.user_from_word(word)
        return "failure", user, final, stop.rs_errors


def decode_sector(system: CodeSystem, model: ChannelModel, frame: SectorFrame | np.ndarray, cfg: DecoderConfig | None = None) -> SectorResult:
    received = frame.received if isinstance(frame, SectorFrame) else frame
    return SoftDecoder(system, cfg).decode(model, received)


def hard_decode_sector(system: CodeSystem, model: ChannelModel, received) -> SectorResult:
    """T-EPCC-RS: Viterbi, correlator reliabilities, then the hard tensor decoder."""
    tppc = system.tppc
    ml = viterbi_detect(model, received)
    full = sector_metrics(model, received, ml, None, tppc.c1.targets)
    Ct = modified_matrices(full, tppc.n1, tppc.n2)
    word, success, flagged = tppc_rs_hard_decode(tppc, ml, Ct)
    ok = success and not flagged and tppc.is_codeword(word)
    status = "clean" if ok else "failure"
    user = system.user_from_word(word)
    return SectorResult(word, user, status, 1, [{"flagged": len(flagged), "success": success}], [user])
