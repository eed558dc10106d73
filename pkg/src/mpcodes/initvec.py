"""Estimating an unknown initial vector on a grid of resolution delta.

``grid_qp`` fits t to the received word under the gap constraints
t_{i+1} - t_i >= delta, t_m - t_{m-1} = delta (largest cell), t_1 >= 0.
With g_1 = t_1 and g_i = t_i - t_{i-1} - delta this becomes a weighted
nonnegative least squares problem, solved by Lawson-Hanson active set.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import ChannelSpec, llr, quantize_rank
from .codes import ConstraintSet, StCodeParams, bounded_distance_decode
from .core import InitialVector, Multipermutation, MultiplicityVector, to_matrix
from .decoders import AdmmOptions, DecodeResult, FactorGraph, admm_decode, build_graph, chebyshev_lp_decode


@dataclass(frozen=True)
class GridSpec:
    delta: float
    largest_cell: bool = True

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("grid resolution must be positive")


def estimate_offset(y, r: MultiplicityVector, delta: float) -> float:
    """Sample-mean offset estimate for t = (delta, 2 delta, ..., m delta) + eta."""
    y = np.asarray(y, dtype=float)
    if y.shape != (r.n,):
        raise ValueError(f"received word length {y.shape} != n={r.n}")
    tn = delta * np.arange(1, r.m + 1)
    return float((y.sum() - np.dot(r.r, tn)) / r.n)


def nnls(A: np.ndarray, b: np.ndarray, max_iter: int | None = None) -> tuple[np.ndarray, list[float]]:
    """Lawson-Hanson: argmin ||A g - b|| s.t. g >= 0. Also returns the objective trace."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    k = A.shape[1]
    g = np.zeros(k)
    P = np.zeros(k, dtype=bool)
    trace = [float(np.sum((A @ g - b) ** 2))]
    tol = 1e-12 * max(1.0, np.abs(A).max() * np.abs(b).max(initial=1.0))
    for _ in range(max_iter or 3 * k + 10):
        w = A.T @ (b - A @ g)
        cand = np.flatnonzero(~P & (w > tol))
        if cand.size == 0:
            break
        P[cand[np.argmax(w[cand])]] = True
        while True:
            s = np.zeros(k)
            s[P] = np.linalg.lstsq(A[:, P], b, rcond=None)[0]
            if np.all(s[P] > 0):
                g = s
                break
            bad = P & (s <= 0)
            alpha = np.min(g[bad] / (g[bad] - s[bad]))
            g = g + alpha * (s - g)
            P &= g > tol
            g[~P] = 0.0
        trace.append(float(np.sum((A @ g - b) ** 2)))
    return g, trace


def _gap_system(y, X: np.ndarray, delta: float, largest_cell: bool):
    m = X.shape[0]
    counts = X.sum(axis=1).astype(float)
    if np.any(counts == 0):
        raise ValueError("every symbol must occur at least once in the decoded word")
    means = (X @ y) / counts
    k = m - 1 if largest_cell else m  # free gaps; g_m = 0 under the largest-cell condition
    L = np.tril(np.ones((m, m)))[:, :k]
    base = delta * np.arange(m)
    w = np.sqrt(counts)
    return w[:, None] * L, w * (means - base), L, base


def grid_qp(y, X_hat, delta: float, largest_cell: bool = True, return_trace: bool = False):
    """Least-squares t for y ~ t X_hat under the grid gap constraints."""
    X = np.asarray(getattr(X_hat, "X", X_hat), dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[1] != y.size:
        raise ValueError("decoded matrix and received word disagree in length")
    if X.shape[0] == 1:
        t = np.array([max(y.mean(), 0.0)])
        return (InitialVector(tuple(t)), [0.0]) if return_trace else InitialVector(tuple(t))
    A, b, L, base = _gap_system(y, X, delta, largest_cell)
    g, trace = nnls(A, b)
    t = L @ g + base
    out = InitialVector(tuple(t))
    return (out, trace) if return_trace else out


def grid_qp_objective(y, X_hat, t) -> float:
    X = np.asarray(getattr(X_hat, "X", X_hat), dtype=float)
    tv = np.asarray(getattr(t, "t", t), dtype=float)
    return float(np.sum((np.asarray(y, dtype=float) - tv @ X) ** 2))


def round_to_grid(t, delta: float, largest_cell: bool = False) -> InitialVector:
    """Nearest multiples of delta, then pushed up left to right until gaps are >= delta.

    With ``largest_cell`` the last gap is re-imposed to exactly delta.
    """
    tv = np.asarray(getattr(t, "t", t), dtype=float)
    k = np.floor(tv / delta + 0.5)
    for i in range(1, k.size):
        if k[i] < k[i - 1] + 1:
            k[i] = k[i - 1] + 1
    if largest_cell and k.size > 1:
        k[-1] = k[-2] + 1
    return InitialVector(tuple(delta * k))


@dataclass
class TurboResult:
    result: DecodeResult
    hard: DecodeResult
    t_star: list[InitialVector] = field(default_factory=list)
    t_hat: list[InitialVector] = field(default_factory=list)


def _bdd_result(y, c: ConstraintSet, st: StCodeParams) -> DecodeResult:
    ranked = quantize_rank(y, c.mult)
    hit = bounded_distance_decode(ranked, st)
    m, n = c.mult.m, c.mult.n
    if hit is None:
        return DecodeResult(np.full((m, n), np.nan), (), False, 0, np.nan, "infeasible")
    return DecodeResult(to_matrix(hit).X.astype(float), hit.x, True, 0, 0.0, "converged")


def _estimate_matrix(word, y, mult: MultiplicityVector) -> np.ndarray:
    """Matrix used for re-estimation; the ranked word stands in for invalid output."""
    try:
        x = Multipermutation(tuple(word), mult)
    except (ValueError, TypeError):
        x = quantize_rank(y, mult)
    return (np.asarray(x.x)[None, :] == np.arange(1, mult.m + 1)[:, None]).astype(float)


def turbo_decode(
    y,
    c: ConstraintSet,
    delta: float,
    iters: int = 1,
    hard: str = "cheb-lp",
    soft: str = "cheb-lp",
    g: FactorGraph | None = None,
    st: StCodeParams | None = None,
    sigma: float | None = None,
    admm: AdmmOptions | None = None,
) -> TurboResult:
    """Hard decode the ranking, then alternate grid re-estimation of t and soft decoding.

    ``hard`` is "cheb-lp" (ranking with nominal t = delta (1..m)) or "bdd"
    (needs ``st``); ``soft`` is "cheb-lp" or "admm" (needs ``sigma``).
    """
    if iters < 0:
        raise ValueError("iters must be >= 0")
    y = np.asarray(y, dtype=float)
    g = g or build_graph(c)
    mult = c.mult
    nominal = InitialVector(tuple(delta * np.arange(1, mult.m + 1)))
    if hard == "cheb-lp":
        res = chebyshev_lp_decode(y, c, nominal, "hard", g)
    elif hard == "bdd":
        if st is None:
            raise ValueError("bounded-distance hard decoding needs ST code parameters")
        res = _bdd_result(y, c, st)
    else:
        raise ValueError(f"unknown hard decoder {hard!r}")
    out = TurboResult(res, res)
    for _ in range(iters):
        X_hat = _estimate_matrix(res.rounded, y, mult)
        t_star = grid_qp(y, X_hat, delta, largest_cell=True)
        t_hat = round_to_grid(t_star, delta, largest_cell=True)
        out.t_star.append(t_star)
        out.t_hat.append(t_hat)
        if soft == "cheb-lp":
            res = chebyshev_lp_decode(y, c, t_hat, "soft", g)
        elif soft == "admm":
            if sigma is None:
                raise ValueError("ADMM soft decoding needs the noise level sigma")
            res = admm_decode(llr(y, t_hat, ChannelSpec.awgn(sigma)), g, c, admm)
        else:
            raise ValueError(f"unknown soft decoder {soft!r}")
        out.result = res
    return out
