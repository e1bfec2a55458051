"""Command-line SER/BER sweeps.

    tepcc-sim --preset TPPC-C --snr-start 5 --snr-stop 5.5 --sectors 1000
    tepcc-sim --config run.cfg --out results.csv
    tepcc-sim --dump-config > defaults.cfg
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict
from pathlib import Path

from tepcc.sim import SYSTEMS, SweepConfig, dump_config, emit, load_config, run_sweep
from tepcc.systems import PRESETS

# flag name -> SweepConfig field
_FLAGS = {
    "system": "system",
    "preset": "preset",
    "snr_start": "snr_start",
    "snr_stop": "snr_stop",
    "snr_step": "snr_step",
    "delta": "delta",
    "sectors": "sectors",
    "seed": "seed",
    "code_seed": "code_seed",
    "max_errors": "max_sector_errors",
    "noise_sigma": "noise_sigma",
    "global_iters": "global_iters",
    "ldpc_iters": "ldpc_iters",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tepcc-sim", description="Monte-Carlo sector error rate sweeps for tensor-product EPCC systems.")
    p.add_argument("--config", type=Path, help="key = value file; flags given on the command line override it")
    p.add_argument("--system", choices=SYSTEMS)
    p.add_argument("--preset", choices=sorted(PRESETS) + ["custom"])
    p.add_argument("--snr-start", type=float)
    p.add_argument("--snr-stop", type=float)
    p.add_argument("--snr-step", type=float)
    p.add_argument("--delta", type=float, help="rate-penalty exponent (0 disables)")
    p.add_argument("--sectors", type=int, help="sector budget per SNR point")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--code-seed", type=int, help="seed of the QC-LDPC construction")
    p.add_argument("--max-errors", type=int, help="stop a point after this many sector errors (0: never)")
    p.add_argument("--noise-sigma", type=float, help="override the channel noise level")
    p.add_argument("--global-iters", type=int)
    p.add_argument("--ldpc-iters", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "text"), default="csv")
    p.add_argument("--dump-config", action="store_true", help="print the effective configuration and exit")
    p.add_argument("-v", "--verbose", action="store_true", help="report progress on stderr")
    return p


def config_from_args(args: argparse.Namespace) -> SweepConfig:
    base = SweepConfig()
    if args.config is not None:
        base = load_config(args.config.read_text(), base)
    values = asdict(base)
    for flag, name in _FLAGS.items():
        v = getattr(args, flag)
        if v is not None:
            values[name] = v
    return SweepConfig(**values)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (OSError, ValueError) as err:
        parser.error(str(err))
    if args.dump_config:
        sys.stdout.write(dump_config(cfg))
        return 0

    def progress(snr, done):
        print(f"snr {snr:g} dB: {done} sectors", file=sys.stderr)

    try:
        result = run_sweep(cfg, workers=args.workers, progress=progress if args.verbose else None)
        text = emit(result, args.format, args.out)
    except (OSError, ValueError) as err:
        print(f"tepcc-sim: error: {err}", file=sys.stderr)
        return 1
    if args.out is None:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
