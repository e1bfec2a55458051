"""Seeded Monte-Carlo SER/BER sweeps and result files.

Sector ``s`` of SNR point ``i`` draws its user data and noise from
``default_rng([seed, i, s])``, so results do not depend on the number of
workers or on which sectors run first.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from tepcc.channel import ChannelModel, channel_output, snr_to_sigma, to_bipolar
from tepcc.systems import PRESETS, CodeSystem, Geometry, build_system
from tepcc.turbo import DecoderConfig, SoftDecoder, hard_decode_sector

SYSTEMS = ("tppc_qldpc", "tppc_rs_hard")
CSV_HEADER = ("snr_db", "sectors", "sector_errors", "ser", "ber", "mean_iters", "seconds")
BLOCK = 50  # sectors between early-termination checks


@dataclass
class SweepConfig:
    system: str = "tppc_qldpc"
    preset: str = "TPPC-C"
    snr_start: float = 5.0
    snr_stop: float = 5.5
    snr_step: float = 0.25
    delta: float = 1.0
    sectors: int = 1000
    seed: int = 0
    code_seed: int = 0
    max_sector_errors: int = 200  # 0 disables early termination
    noise_sigma: float | None = None  # override the SNR-derived noise (0 = noiseless)
    global_iters: int = 3
    ldpc_iters: int = 50
    taps: tuple[float, ...] = (1.0, 0.85)
    geometry: dict = field(default_factory=dict)  # used when preset == "custom"

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ValueError(f"system must be one of {SYSTEMS}")
        if self.preset != "custom" and self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)} or custom")
        if self.sectors < 1:
            raise ValueError("sectors must be >= 1")
        if self.snr_step <= 0 or self.snr_stop < self.snr_start:
            raise ValueError("SNR grid must be strictly increasing")
        if self.noise_sigma is not None and self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        self.taps = tuple(float(t) for t in self.taps)

    def snr_grid(self) -> list[float]:
        n = int(np.floor((self.snr_stop - self.snr_start) / self.snr_step + 1e-9)) + 1
        return [round(self.snr_start + i * self.snr_step, 10) for i in range(n)]

    def decoder_config(self) -> DecoderConfig:
        return DecoderConfig(global_iters=self.global_iters, ldpc_iters=self.ldpc_iters)

    def geometry_spec(self) -> str | Geometry:
        if self.preset != "custom":
            return self.preset
        g = dict(self.geometry)
        if "outer" in g and isinstance(g["outer"], str):
            g["outer"] = tuple(int(x) for x in g["outer"].split(","))
        return Geometry(name="custom", **g)


@dataclass
class SweepPoint:
    snr_db: float
    sectors: int
    sector_errors: int
    bit_errors: int
    ser: float
    ber: float
    mean_iters: float
    seconds: float
    statuses: dict[str, int] = field(default_factory=dict)
    errors_by_iteration: list[int] = field(default_factory=list)
    # paired first-pass vs last-pass outcomes: (fixed by iterating, broken by iterating)
    discordant: tuple[int, int] = (0, 0)


@dataclass
class SweepResult:
    config: SweepConfig
    points: list[SweepPoint]


@dataclass
class SectorOutcome:
    sector_error: bool
    bit_errors: int
    iterations: int
    status: str
    errors_by_iteration: list[bool]


_DECODERS: dict = {}


def _decoder(system: CodeSystem, dcfg: DecoderConfig) -> SoftDecoder:
    key = (id(system), tuple(sorted(asdict(dcfg).items())))
    if key not in _DECODERS:
        _DECODERS[key] = SoftDecoder(system, dcfg)
    return _DECODERS[key]


def run_sector(cfg: SweepConfig, system: CodeSystem, point: int, snr_db: float, sector: int) -> SectorOutcome:
    rng = np.random.default_rng([cfg.seed, point, sector])
    user = rng.integers(0, 2, system.user_bits, dtype=np.uint8)
    word = system.encode(user)
    sigma = snr_to_sigma(snr_db, float(system.rate), cfg.delta, cfg.taps)
    model = ChannelModel(cfg.taps, sigma)
    clean = channel_output(cfg.taps, to_bipolar(word))
    noise = cfg.noise_sigma if cfg.noise_sigma is not None else sigma
    received = clean + noise * rng.standard_normal(clean.size)
    if cfg.system == "tppc_qldpc":
        res = _decoder(system, cfg.decoder_config()).decode(model, received)
    else:
        res = hard_decode_sector(system, model, received)
    wrong = res.user != user
    by_iter = [bool((u != user).any()) for u in res.user_by_iteration]
    by_iter += [bool(wrong.any())] * (cfg.global_iters - len(by_iter))
    return SectorOutcome(bool(wrong.any()), int(wrong.sum()), res.iterations, res.status, by_iter)


def _run_block(args) -> list[SectorOutcome]:
    cfg, point, snr_db, start, stop = args
    system = build_system(cfg.geometry_spec(), cfg.code_seed)
    return [run_sector(cfg, system, point, snr_db, s) for s in range(start, stop)]


def run_sweep(cfg: SweepConfig, workers: int = 1, progress=None) -> SweepResult:
    """Simulate every SNR point; stop a point early once it has collected
    ``max_sector_errors`` sector errors (checked every BLOCK sectors)."""
    system = build_system(cfg.geometry_spec(), cfg.code_seed)
    if cfg.system == "tppc_rs_hard" and not hasattr(system.tppc.c2, "t"):
        raise ValueError("tppc_rs_hard needs a geometry with an RS signature code")
    if cfg.system == "tppc_qldpc" and hasattr(system.tppc.c2, "t"):
        raise ValueError("tppc_qldpc needs a geometry with a QC-LDPC signature code")
    pool = None
    if workers > 1:
        import multiprocessing as mp

        pool = mp.get_context("fork").Pool(workers)
    points = []
    try:
        for i, snr in enumerate(cfg.snr_grid()):
            t0 = time.perf_counter()
            blocks = [(a, min(a + BLOCK, cfg.sectors)) for a in range(0, cfg.sectors, BLOCK)]
            outcomes: list[SectorOutcome] = []
            errors, stop = 0, False
            for b0 in range(0, len(blocks), max(workers, 1)):
                jobs = [(cfg, i, snr, a, b) for a, b in blocks[b0 : b0 + max(workers, 1)]]
                results = pool.map(_run_block, jobs) if pool else [_run_block(j) for j in jobs]
                # blocks are consumed in order so the stopping point ignores the worker count
                for block in results:
                    outcomes.extend(block)
                    errors += sum(o.sector_error for o in block)
                    if cfg.max_sector_errors and errors >= cfg.max_sector_errors:
                        stop = True
                        break
                if progress:
                    progress(snr, len(outcomes))
                if stop:
                    break
            points.append(_summarise(snr, outcomes, system.user_bits, cfg.global_iters, time.perf_counter() - t0))
    finally:
        if pool:
            pool.close()
    return SweepResult(cfg, points)


def _summarise(snr, outcomes, user_bits, iters, seconds) -> SweepPoint:
    n = len(outcomes)
    se = sum(o.sector_error for o in outcomes)
    be = sum(o.bit_errors for o in outcomes)
    statuses: dict[str, int] = {}
    for o in outcomes:
        statuses[o.status] = statuses.get(o.status, 0) + 1
    by_iter = [sum(o.errors_by_iteration[k] for o in outcomes) for k in range(iters)]
    fixed = sum(o.errors_by_iteration[0] and not o.errors_by_iteration[-1] for o in outcomes)
    broken = sum(o.errors_by_iteration[-1] and not o.errors_by_iteration[0] for o in outcomes)
    return SweepPoint(
        snr_db=snr,
        sectors=n,
        sector_errors=se,
        bit_errors=be,
        ser=se / n,
        ber=be / (n * user_bits),
        mean_iters=sum(o.iterations for o in outcomes) / n,
        seconds=seconds,
        statuses=dict(sorted(statuses.items())),
        errors_by_iteration=by_iter,
        discordant=(fixed, broken),
    )


# ------------------------------------------------------------------ output


def _row(p: SweepPoint) -> list[str]:
    return [
        f"{p.snr_db:.4f}",
        str(p.sectors),
        str(p.sector_errors),
        f"{p.ser:.6e}",
        f"{p.ber:.6e}",
        f"{p.mean_iters:.4f}",
        f"{p.seconds:.3f}",
    ]


def format_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for p in result.points:
        w.writerow(_row(p))
    return buf.getvalue()


def format_text(result: SweepResult) -> str:
    lines = ["# sweep results", *dump_config(result.config).splitlines(), ""]
    for p in result.points:
        lines.append("[point]")
        for key, val in zip(CSV_HEADER, _row(p)):
            lines.append(f"{key} = {val}")
        lines.append(f"bit_errors = {p.bit_errors}")
        lines.append("statuses = " + ",".join(f"{k}:{v}" for k, v in p.statuses.items()))
        lines.append("errors_by_iteration = " + ",".join(map(str, p.errors_by_iteration)))
        lines.append("discordant = " + ",".join(map(str, p.discordant)))
        lines.append("")
    return "\n".join(lines)


def emit(result: SweepResult, fmt: str = "csv", path: str | Path | None = None) -> str:
    if fmt == "csv":
        text = format_csv(result)
    elif fmt == "text":
        text = format_text(result)
    else:
        raise ValueError("format must be csv or text")
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as err:
            raise OSError(f"cannot write results to {path}: {err}") from err
    return text


def parse_csv(text: str) -> list[dict]:
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for r in rows:
        out.append(
            {
                "snr_db": float(r["snr_db"]),
                "sectors": int(r["sectors"]),
                "sector_errors": int(r["sector_errors"]),
                "ser": float(r["ser"]),
                "ber": float(r["ber"]),
                "mean_iters": float(r["mean_iters"]),
                "seconds": float(r["seconds"]),
            }
        )
    return out


def parse_text(text: str) -> list[dict]:
    points = []
    cur = None
    for line in text.splitlines():
        line = line.strip()
        if line == "[point]":
            cur = {}
            points.append(cur)
        elif cur is not None and "=" in line:
            k, v = (x.strip() for x in line.split("=", 1))
            cur[k] = v
    typed = []
    for p in points:
        row = {k: (int(p[k]) if k in ("sectors", "sector_errors") else float(p[k])) for k in CSV_HEADER}
        row["bit_errors"] = int(p["bit_errors"])
        typed.append(row)
    return typed


# ------------------------------------------------------------------ config files


def dump_config(cfg: SweepConfig) -> str:
    lines = []
    for f in fields(cfg):
        val = getattr(cfg, f.name)
        if f.name == "geometry":
            for k, v in sorted(val.items()):
                lines.append(f"geometry.{k} = {v}")
            continue
        if isinstance(val, tuple):
            val = ",".join(repr(x) for x in val)
        lines.append(f"{f.name} = {'none' if val is None else val}")
    return "\n".join(lines) + "\n"


def load_config(text: str, base: SweepConfig | None = None) -> SweepConfig:
    """Parse ``key = value`` lines ('#' comments allowed) over ``base``."""
    values = asdict(base) if base is not None else {}
    types = {f.name: f.type for f in fields(SweepConfig)}
    geometry = dict(values.get("geometry", {}))
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {n}: expected key = value")
        key, val = (x.strip() for x in line.split("=", 1))
        if key.startswith("geometry."):
            sub = key.split(".", 1)[1]
            geometry[sub] = val if sub in ("name", "inner", "outer") else int(val)
            continue
        if key not in types:
            raise ValueError(f"line {n}: unknown key {key!r}")
        values[key] = _convert(key, val)
    values["geometry"] = geometry
    return SweepConfig(**values)


def _convert(key: str, val: str):
    if key in ("system", "preset"):
        return val
    if key == "taps":
        return tuple(float(x) for x in val.split(","))
    if key == "noise_sigma":
        return None if val.lower() == "none" else float(val)
    if key in ("snr_start", "snr_stop", "snr_step", "delta"):
        return float(val)
    return int(val)
