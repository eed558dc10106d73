"""Memoryless channels, negative log-likelihood matrices and hard ranking.

Randomness: numpy's PCG64 bit generator seeded through ``SeedSequence`` with
``(seed, *keys)`` so every Monte Carlo trial owns an independent,
reproducible stream. Gaussian noise comes from ``Generator.standard_normal``
(numpy's ziggurat sampler).
"""
from __future__ import annotations

from dataclasses import dataclass
from math import log, pi, sqrt

import numpy as np

from .core import InitialVector, Multipermutation, MultiplicityVector

PROB_CLAMP = 1e-12


def trial_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, keys)])))


def snr_to_sigma(snr_db: float) -> float:
    """SNR = 10 log10(1 / sigma^2)."""
    return 10.0 ** (-snr_db / 20.0)


def sigma_to_snr(sigma: float) -> float:
    return -20.0 * np.log10(sigma)


@dataclass(frozen=True)
class ChannelSpec:
    kind: str  # "awgn" | "qsc"
    sigma: float | None = None
    p: float | None = None

    def __post_init__(self):
        if self.kind == "awgn":
            if self.sigma is None or self.sigma < 0 or self.p is not None:
                raise ValueError("awgn channel needs sigma >= 0 and no p")
        elif self.kind == "qsc":
            if self.p is None or not 0 <= self.p < 1 or self.sigma is not None:
                raise ValueError("qsc channel needs 0 <= p < 1 and no sigma")
        else:
            raise ValueError(f"unknown channel kind {self.kind!r}")

    @classmethod
    def awgn(cls, sigma: float) -> "ChannelSpec":
        return cls("awgn", sigma=float(sigma))

    @classmethod
    def awgn_snr(cls, snr_db: float) -> "ChannelSpec":
        return cls("awgn", sigma=snr_to_sigma(snr_db))

    @classmethod
    def qsc(cls, p: float) -> "ChannelSpec":
        return cls("qsc", p=float(p))


@dataclass(frozen=True, eq=False)
class LlrMatrix:
    """Gamma(y): entry (i, j) is -log Pr(y_j | t_i).

    For AWGN, ``G = bias + scale * (y_j - t_i)^2`` with ``bias = log(sqrt(2 pi) sigma)``
    and ``scale = 1 / (2 sigma^2)``; both are kept so objectives can be
    reported with or without the affine terms.
    """

    G: np.ndarray
    bias: float = 0.0
    scale: float = 1.0

    @property
    def shape(self) -> tuple[int, int]:
        return self.G.shape


def transmit(x, ch: ChannelSpec, rng: np.random.Generator | int, alphabet=None) -> np.ndarray:
    """Send real symbols ``x`` through the channel.

    ``alphabet`` (the initial vector) is required for the q-ary symmetric
    channel, which substitutes one of the other m-1 levels with probability p.
    """
    if not isinstance(rng, np.random.Generator):
        rng = trial_rng(rng)
    x = np.asarray(x, dtype=float)
    if ch.kind == "awgn":
        if ch.sigma == 0:
            return x.copy()
        return x + ch.sigma * rng.standard_normal(x.shape)
    t = np.asarray(getattr(alphabet, "t", alphabet), dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("qsc transmission needs an alphabet with at least two levels")
    idx = np.searchsorted(t, x)
    if np.any(idx >= t.size) or np.any(t[np.minimum(idx, t.size - 1)] != x):
        raise ValueError("qsc input symbols must be alphabet levels")
    flip = rng.random(x.shape) < ch.p
    shift = rng.integers(1, t.size, size=x.shape)
    return t[np.where(flip, (idx + shift) % t.size, idx)]


def llr(y, t: InitialVector, ch: ChannelSpec) -> LlrMatrix:
    y = np.asarray(y, dtype=float)
    tv = t.array() if isinstance(t, InitialVector) else np.asarray(t, dtype=float)
    if ch.kind == "awgn":
        if ch.sigma <= 0:
            raise ValueError("log-likelihoods need sigma > 0")
        bias = log(sqrt(2 * pi) * ch.sigma)
        scale = 1.0 / (2 * ch.sigma**2)
        G = bias + scale * (y[None, :] - tv[:, None]) ** 2
        return LlrMatrix(G, bias, scale)
    m = tv.size
    p = min(max(ch.p, PROB_CLAMP), 1 - PROB_CLAMP)
    hit = y[None, :] == tv[:, None]
    G = np.where(hit, -log(1 - p), -log(p / (m - 1)))
    return LlrMatrix(G, -log(p / (m - 1)), log(p / ((1 - p) * (m - 1))))


def indicator_matrix(y, t) -> np.ndarray:
    """Y = [e(y_1)^T | ... | e(y_n)^T] for q-ary outputs."""
    tv = np.asarray(getattr(t, "t", t), dtype=float)
    return (np.asarray(y, dtype=float)[None, :] == tv[:, None]).astype(np.uint8)


def quantize_rank(y, r: MultiplicityVector) -> Multipermutation:
    """Smallest r_1 outputs get symbol 1, the next r_2 symbol 2, ...; ties by index."""
    y = np.asarray(y, dtype=float)
    if y.shape != (r.n,):
        raise ValueError(f"received word length {y.shape} != n={r.n}")
    order = np.argsort(y, kind="stable")
    out = np.empty(r.n, dtype=np.int64)
    out[order] = np.repeat(np.arange(1, r.m + 1), r.r)
    return Multipermutation(tuple(int(v) for v in out), r)
