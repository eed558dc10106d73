"""Word-error-rate simulation harness.

Every trial (snr index k, trial index i) draws its transmitted word and its
noise from its own PCG64 stream seeded with (seed, k, i), so decoder lists and
batch sizes can change without shifting noise realizations. Trials are
decoded in fixed-size chunks; each decoder stops at the first trial index
where both the minimum trial count and the error target are reached (or at
the cap), so the result does not depend on chunking or on worker count.
"""
from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channels import ChannelSpec, llr, quantize_rank, sigma_to_snr, snr_to_sigma, transmit, trial_rng
from .codes import (
    ConstraintSet,
    StCodeParams,
    bounded_distance_decode,
    codebook_array,
    derangement_constraints,
    encode_st,
    enumerate_words,
    random_message,
    read_constraints,
    st_constraints,
)
from .core import InitialVector, Multipermutation, MultiplicityVector, parse_float_list, parse_int_list
from .decoders import AdmmOptions, admm_decode_batch, build_graph, chebyshev_lp_decode, ml_costs
from .initvec import turbo_decode

CSV_HEADER = ["snr_db", "decoder", "trials", "word_errors", "wer", "avg_iterations", "avg_decode_ms"]
DECODERS = ("admm", "ml", "min-dist", "cheb-lp-soft", "cheb-lp-hard", "bdd", "turbo")


class ConfigError(ValueError):
    pass


@dataclass
class SimConfig:
    decoders: list[str]
    code: str = "st"
    r: int | None = None
    d: int | None = None
    m: int | None = None
    mult: MultiplicityVector | None = None
    zeros_file: str | None = None
    t: InitialVector | None = None
    channel: str = "awgn"
    snr_db: list[float] | None = None
    sigma: list[float] | None = None
    p: list[float] | None = None
    codeword: tuple[int, ...] | None = None  # None = random per trial
    target_errors: int = 100
    max_trials: int = 10**6
    min_trials: int = 0
    seed: int = 0
    out: str | None = None
    batch: int = 256
    workers: int = 1
    timing: bool = False
    turbo_iters: int = 1
    turbo_soft: str = "cheb-lp"
    turbo_hard: str = "cheb-lp"
    delta: float = 1.0
    mu: float = 5.5
    admm_max_iter: int = 200

    def points(self) -> list[tuple[float, ChannelSpec]]:
        """(csv label, channel) per simulated point."""
        if self.channel == "qsc":
            return [(p, ChannelSpec.qsc(p)) for p in self.p]
        if self.sigma is not None:
            return [(sigma_to_snr(s), ChannelSpec.awgn(s)) for s in self.sigma]
        return [(s, ChannelSpec.awgn(snr_to_sigma(s))) for s in self.snr_db]


def _bool(v: str) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _str_list(v: str) -> list[str]:
    return [s.strip() for s in v.split(",") if s.strip()]


_PARSERS = {
    "decoders": _str_list,
    "code": str.strip,
    "r": int,
    "d": int,
    "m": int,
    "mult": MultiplicityVector.parse,
    "zeros_file": str.strip,
    "t": lambda v: InitialVector(parse_float_list(v)),
    "channel": str.strip,
    "snr_db": parse_float_list,
    "sigma": parse_float_list,
    "p": parse_float_list,
    "codeword": lambda v: None if v.strip() == "random" else parse_int_list(v),
    "target_errors": int,
    "max_trials": int,
    "min_trials": int,
    "seed": int,
    "out": str.strip,
    "batch": int,
    "workers": int,
    "timing": _bool,
    "turbo_iters": int,
    "turbo_soft": str.strip,
    "turbo_hard": str.strip,
    "delta": float,
    "mu": float,
    "admm_max_iter": int,
}
KEYS = tuple(_PARSERS)


def config_from_items(items: list[tuple[str, str, str]]) -> SimConfig:
    """Build a config from (key, value, location) triples; later keys win."""
    values = {}
    where = {}
    for key, value, loc in items:
        key = key.strip().replace("-", "_")
        if key not in _PARSERS:
            raise ConfigError(f"{loc}: unknown key {key!r}")
        try:
            values[key] = _PARSERS[key](value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{loc}: bad value for {key!r}: {exc}") from None
        where[key] = loc
    if "decoders" not in values or not values["decoders"]:
        raise ConfigError("missing required key 'decoders'")
    cfg = SimConfig(**values)
    _validate(cfg, where)
    return cfg


def parse_config(path: str | Path) -> SimConfig:
    return config_from_items(read_config_items(path))


def read_config_items(path: str | Path) -> list[tuple[str, str, str]]:
    """Raw (key, value, "path:line") triples of a ``key = value`` file."""
    items = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        items.append((key, value, f"{path}:{lineno}"))
    return items


def _validate(cfg: SimConfig, where: dict) -> None:
    def err(key, msg):
        loc = where.get(key, "config")
        raise ConfigError(f"{loc}: {msg}")

    for dec in cfg.decoders:
        if dec not in DECODERS:
            err("decoders", f"unknown decoder {dec!r} (choose from {', '.join(DECODERS)})")
    if cfg.code == "st":
        if None in (cfg.r, cfg.d, cfg.m):
            err("code", "st code needs r, d and m")
        try:
            StCodeParams(cfg.r, cfg.d, cfg.m)
        except ValueError as exc:
            err("m", str(exc))
    elif cfg.code in ("derangement", "custom"):
        if cfg.mult is None:
            err("code", f"{cfg.code} code needs mult")
        if cfg.code == "custom" and not cfg.zeros_file:
            err("code", "custom code needs zeros_file")
    else:
        err("code", f"unknown code {cfg.code!r}")
    if "bdd" in cfg.decoders and cfg.code != "st":
        err("decoders", "bdd is only available for st codes")
    if cfg.channel == "awgn":
        given = [k for k in ("snr_db", "sigma") if getattr(cfg, k) is not None]
        if len(given) != 1 or cfg.p is not None:
            err("channel", "awgn needs exactly one of snr_db or sigma")
        if cfg.sigma is not None and any(s <= 0 for s in cfg.sigma):
            err("sigma", "sigma must be > 0")
    elif cfg.channel == "qsc":
        if cfg.p is None or cfg.snr_db is not None or cfg.sigma is not None:
            err("channel", "qsc needs p and no snr_db/sigma")
        if any(not 0 <= p < 1 for p in cfg.p):
            err("p", "p must lie in [0, 1)")
        if "turbo" in cfg.decoders:
            err("decoders", "turbo decoding assumes an AWGN channel")
    else:
        err("channel", f"unknown channel {cfg.channel!r}")
    if cfg.max_trials < 1 or cfg.target_errors < 1 or cfg.min_trials < 0 or cfg.batch < 1 or cfg.workers < 1:
        err("max_trials", "trial counts, batch and workers must be positive")
    if cfg.turbo_soft not in ("cheb-lp", "admm") or cfg.turbo_hard not in ("cheb-lp", "bdd"):
        err("turbo_soft", "turbo_soft must be cheb-lp|admm and turbo_hard cheb-lp|bdd")
    if cfg.turbo_hard == "bdd" and cfg.code != "st":
        err("turbo_hard", "bdd is only available for st codes")
    mult = _mult(cfg)
    if cfg.t is not None and cfg.t.m != mult.m:
        err("t", f"initial vector has {cfg.t.m} levels, code has m={mult.m}")
    if cfg.codeword is not None:
        try:
            Multipermutation(cfg.codeword, mult)
        except ValueError as exc:
            err("codeword", str(exc))


def _mult(cfg: SimConfig) -> MultiplicityVector:
    return StCodeParams(cfg.r, cfg.d, cfg.m).mult if cfg.code == "st" else cfg.mult


def build_code(cfg: SimConfig) -> tuple[ConstraintSet, StCodeParams | None]:
    if cfg.code == "st":
        st = StCodeParams(cfg.r, cfg.d, cfg.m)
        return st_constraints(st), st
    if cfg.code == "derangement":
        return derangement_constraints(cfg.mult), None
    return read_constraints(cfg.zeros_file, cfg.mult), None


class _Context:
    """Per-process decoding state built once from the config."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.c, self.st = build_code(cfg)
        self.mult = self.c.mult
        self.t = cfg.t or InitialVector.natural(self.mult.m)
        self.tv = self.t.array()
        self.g = build_graph(self.c)
        needs_book = cfg.codeword is None and self.st is None
        needs_book |= any(d in cfg.decoders for d in ("ml", "min-dist"))
        self.words = codebook_array(enumerate_words(self.c)) if needs_book else None
        if cfg.codeword is not None and not _is_codeword(cfg.codeword, self):
            raise ConfigError("codeword is not a member of the code")
        self.admm = AdmmOptions(mu=cfg.mu, max_iter=cfg.admm_max_iter)

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        if self.cfg.codeword is not None:
            return np.asarray(self.cfg.codeword, dtype=np.int64)
        if self.st is not None:
            return np.asarray(encode_st(random_message(self.st, rng), self.st).x, dtype=np.int64)
        return self.words[int(rng.integers(len(self.words)))]


def _is_codeword(word, ctx: _Context) -> bool:
    from .codes import word_is_member

    return word_is_member(Multipermutation(tuple(word), ctx.mult), ctx.c)


def _decode_chunk(ctx: _Context, dec: str, ch: ChannelSpec, Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Decoded words (B, n) (0 rows mark failures) and iteration counts."""
    B, n = Y.shape
    out = np.zeros((B, n), dtype=np.int64)
    its = np.zeros(B)
    ranked = lambda y: np.asarray(quantize_rank(y, ctx.mult).x)  # noqa: E731
    if dec in ("admm", "ml"):
        G = np.stack([llr(y, ctx.t, ch).G for y in Y]) if B else np.zeros((0, ctx.mult.m, n))
        if dec == "ml":
            out[:] = ctx.words[np.argmin(ml_costs(G, ctx.words), axis=1)]
        else:
            for b, res in enumerate(admm_decode_batch(G, ctx.g, ctx.c, ctx.admm)):
                out[b] = res.rounded
                its[b] = res.iterations
    elif dec == "min-dist":
        vals = ctx.tv[ctx.words - 1]
        for b, y in enumerate(Y):
            yr = ctx.tv[ranked(y) - 1]
            out[b] = ctx.words[int(np.argmin(np.max(np.abs(vals - yr), axis=1)))]
    elif dec == "bdd":
        for b, y in enumerate(Y):
            hit = bounded_distance_decode(ranked(y), ctx.st)
            if hit is not None:
                out[b] = hit.x
    elif dec in ("cheb-lp-soft", "cheb-lp-hard"):
        mode = dec.rsplit("-", 1)[1]
        for b, y in enumerate(Y):
            res = chebyshev_lp_decode(y, ctx.c, ctx.t, mode, ctx.g)
            if res.rounded:
                out[b] = res.rounded
            its[b] = res.iterations
    elif dec == "turbo":
        cfg = ctx.cfg
        for b, y in enumerate(Y):
            tr = turbo_decode(
                y, ctx.c, cfg.delta, cfg.turbo_iters, cfg.turbo_hard, cfg.turbo_soft,
                ctx.g, ctx.st, ch.sigma, ctx.admm,
            )
            if tr.result.rounded:
                out[b] = tr.result.rounded
            its[b] = tr.result.iterations
    else:
        raise ValueError(f"unknown decoder {dec!r}")
    return out, its


def _run_chunk(ctx: _Context, k: int, ch: ChannelSpec, start: int, stop: int, decs: list[str]):
    X, Y = [], []
    for i in range(start, stop):
        rng = trial_rng(ctx.cfg.seed, k, i)
        x = ctx.draw(rng)
        X.append(x)
        Y.append(transmit(ctx.tv[x - 1], ch, rng, ctx.t))
    X = np.asarray(X)
    Y = np.asarray(Y)
    res = {}
    for dec in decs:
        t0 = time.perf_counter()
        words, its = _decode_chunk(ctx, dec, ch, Y)
        dt = time.perf_counter() - t0
        res[dec] = (np.any(words != X, axis=1), its, dt)
    return res


_WORKER_CTX: _Context | None = None


def _worker_init(cfg: SimConfig) -> None:
    global _WORKER_CTX
    _WORKER_CTX = _Context(cfg)


def _worker_chunk(args):
    return _run_chunk(_WORKER_CTX, *args)


@dataclass
class PointResult:
    label: float
    decoder: str
    trials: int
    word_errors: int
    iterations: float
    seconds: float

    @property
    def wer(self) -> float:
        return self.word_errors / self.trials


def simulate(cfg: SimConfig, progress=None) -> list[PointResult]:
    ctx = _Context(cfg)
    pool = ProcessPoolExecutor(cfg.workers, initializer=_worker_init, initargs=(cfg,)) if cfg.workers > 1 else None
    results = []
    try:
        for k, (label, ch) in enumerate(cfg.points()):
            state = {d: _Tally() for d in cfg.decoders}
            start = 0
            while start < cfg.max_trials and any(not s.done for s in state.values()):
                active = [d for d in cfg.decoders if not state[d].done]
                span = cfg.batch * cfg.workers
                bounds = [
                    (a, min(a + cfg.batch, cfg.max_trials))
                    for a in range(start, min(start + span, cfg.max_trials), cfg.batch)
                ]
                if pool is None:
                    chunks = [_run_chunk(ctx, k, ch, a, b, active) for a, b in bounds]
                else:
                    chunks = list(pool.map(_worker_chunk, [(k, ch, a, b, active) for a, b in bounds]))
                for chunk in chunks:
                    for d in active:
                        state[d].add(*chunk[d], cfg)
                start = bounds[-1][1]
            for d in cfg.decoders:
                s = state[d]
                results.append(PointResult(label, d, s.trials, s.errors, s.its / max(s.trials, 1), s.seconds))
                if progress:
                    progress(results[-1])
    finally:
        if pool is not None:
            pool.shutdown()
    return results


class _Tally:
    """Running counts for one (point, decoder) cell, truncated at the stopping trial."""

    def __init__(self):
        self.trials = 0
        self.errors = 0
        self.its = 0.0
        self.seconds = 0.0
        self.done = False

    def add(self, errs: np.ndarray, its: np.ndarray, sec: float, cfg: SimConfig) -> None:
        if self.done or errs.size == 0:
            return
        cum = self.errors + np.cumsum(errs)
        idx = self.trials + np.arange(1, errs.size + 1)
        hit = np.flatnonzero((cum >= cfg.target_errors) & (idx >= cfg.min_trials))
        take = int(hit[0] + 1) if hit.size else errs.size
        self.trials += take
        self.errors = int(cum[take - 1])
        self.its += float(its[:take].sum())
        self.seconds += sec * take / errs.size
        self.done = bool(hit.size) or self.trials >= cfg.max_trials


def format_rows(results: list[PointResult], timing: bool) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in results:
        ms = repr(1e3 * r.seconds / r.trials) if timing else ""
        w.writerow([repr(float(r.label)), r.decoder, r.trials, r.word_errors, repr(r.wer), repr(r.iterations), ms])
    return buf.getvalue()


def wilson_interval(errors: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    p = errors / trials
    den = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / den
    half = z * np.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / den
    return max(0.0, centre - half), min(1.0, centre + half)
