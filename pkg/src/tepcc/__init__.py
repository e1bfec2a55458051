"""Tensor-product error-pattern-correcting codes for ISI storage channels."""

from tepcc.channel import ChannelModel, viterbi_detect
from tepcc.epcc import EpccCode, ErrorPattern, search_generator
from tepcc.gf import FieldContext, Gf2Poly
from tepcc.qldpc import FftSpaDecoder, QcLdpcCode, fft_spa_decode, peg_qc_construct
from tepcc.rs import RsCode, bm_decode, erasure_decode, tppc_rs_hard_decode
from tepcc.sim import SweepConfig, SweepResult, emit, run_sweep
from tepcc.systems import PRESETS, CodeSystem, build_system
from tepcc.tppc import TppcCode
from tepcc.turbo import DecoderConfig, SoftDecoder, decode_sector, hard_decode_sector

__all__ = [
    "PRESETS",
    "ChannelModel",
    "CodeSystem",
    "DecoderConfig",
    "EpccCode",
    "ErrorPattern",
    "FftSpaDecoder",
    "FieldContext",
    "Gf2Poly",
    "QcLdpcCode",
    "RsCode",
    "SoftDecoder",
    "SweepConfig",
    "SweepResult",
    "TppcCode",
    "bm_decode",
    "build_system",
    "decode_sector",
    "emit",
    "erasure_decode",
    "fft_spa_decode",
    "hard_decode_sector",
    "peg_qc_construct",
    "run_sweep",
    "search_generator",
    "tppc_rs_hard_decode",
    "viterbi_detect",
]

__version__ = "0.1.0"
