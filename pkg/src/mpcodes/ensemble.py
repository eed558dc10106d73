"""Random fixed-at-zero / fixed-at-equality code ensembles.

Counts are exact integers / Fractions; ball-size bounds are evaluated in the
log domain so large parameters (n = 90, kappa in the thousands) do not
overflow.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, exp, lgamma, log

import numpy as np

from .channels import trial_rng
from .codes import ConstraintSet, StCodeParams, _iter_words, codebook_array, enumerate_words
from .core import MultiplicityVector
from .ranking import unrank_combination

KINDS = ("zeros", "equalities")


@dataclass(frozen=True)
class EnsembleParams:
    mult: MultiplicityVector
    kind: str  # "zeros" | "equalities"
    count: int  # kappa or iota
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if not 0 <= self.count <= self.pool:
            raise ValueError(f"count {self.count} outside 0..{self.pool}")

    @property
    def cells(self) -> int:
        return self.mult.m * self.mult.n

    @property
    def pool(self) -> int:
        """Number of candidate entries (zeros) or entry pairs (equalities)."""
        return self.cells if self.kind == "zeros" else comb(self.cells, 2)


def choice_space_size(p: EnsembleParams) -> int:
    return comb(p.pool, p.count)


def compatible_count(p: EnsembleParams) -> int:
    """Number of constraint choices a fixed multipermutation matrix satisfies."""
    mn, n = p.cells, p.mult.n
    if p.kind == "zeros":
        return comb(mn - n, p.count)
    # pairs of equal entries: both zero or both one
    return comb(comb(mn - n, 2) + comb(n, 2), p.count)


def expected_cardinality(p: EnsembleParams) -> Fraction:
    return Fraction(compatible_count(p) * p.mult.size, choice_space_size(p))


def _log_comb(a: int, b: int) -> float:
    return lgamma(a + 1) - lgamma(b + 1) - lgamma(a - b + 1)


def log_compatible_ratio(p: EnsembleParams) -> float:
    """log(compatible_count / choice_space_size)."""
    mn, n = p.cells, p.mult.n
    if p.kind == "zeros":
        return _log_comb(mn - n, p.count) - _log_comb(mn, p.count)
    return _log_comb(comb(mn - n, 2) + comb(n, 2), p.count) - _log_comb(comb(mn, 2), p.count)


def log_ball_volume_bounds(r: int, m: int, d: float) -> tuple[float, float]:
    """log of the lower/upper bounds on the Chebyshev ball size V(r, n, d)."""
    n = r * m
    k = 2 * d * r + r
    lf_r = lgamma(r + 1)
    lower = n * log(k) + lgamma(n + 1) - 2 * d * r * log(2) - n * log(n) - m * lf_r
    upper = (n / k) * lgamma(k + 1) - m * lf_r
    return lower, upper


def ball_size_bounds(r: int, m: int, d: float, p: EnsembleParams | None = None) -> tuple[float, float]:
    """(lower, upper) bounds on the expected number of codewords within distance d.

    Without ensemble parameters this is the bound on the plain ball volume.
    """
    lo, hi = log_ball_volume_bounds(r, m, d)
    if p is not None:
        if p.mult != MultiplicityVector.regular(r, m):
            raise ValueError("ensemble multiplicity must be r-regular with the given r, m")
        s = log_compatible_ratio(p)
        lo, hi = lo + s, hi + s
    return exp(lo), exp(hi)


def _sparse_fisher_yates(pool: int, k: int, rng: np.random.Generator) -> list[int]:
    """First k entries of a uniformly shuffled range(pool), O(k) memory."""
    swapped: dict[int, int] = {}
    out = []
    for i in range(k):
        j = int(rng.integers(i, pool))
        vi, vj = swapped.get(i, i), swapped.get(j, j)
        swapped[j] = vi
        out.append(vj)
    return out


def sample_constraints(p: EnsembleParams, seed: int | None = None) -> ConstraintSet:
    rng = trial_rng(p.seed if seed is None else seed)
    n = p.mult.n

    def entry(e: int) -> tuple[int, int]:
        return (e // n + 1, e % n + 1)

    picks = _sparse_fisher_yates(p.pool, p.count, rng)
    if p.kind == "zeros":
        return ConstraintSet(p.mult, frozenset(entry(e) for e in picks))
    pairs = set()
    for v in picks:
        a, b = unrank_combination(v, 2)  # a < b
        pairs.add((entry(a), entry(b)))
    return ConstraintSet(p.mult, frozenset(), frozenset(pairs))


def code_size(c: ConstraintSet) -> int:
    return len(enumerate_words(c))


def monte_carlo_cardinality(p: EnsembleParams, trials: int, seed: int | None = None) -> tuple[float, float]:
    """Mean and standard error of |code| over independent constraint draws."""
    base = p.seed if seed is None else seed
    sizes = np.array([code_size(sample_constraints(p, seed=_trial_seed(base, k))) for k in range(trials)], dtype=float)
    return float(sizes.mean()), float(sizes.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0


def _trial_seed(seed: int, k: int) -> int:
    return int(np.random.SeedSequence([int(seed), k]).generate_state(1, np.uint64)[0])


def ball_words(y, mult: MultiplicityVector, d: float) -> np.ndarray:
    """All multipermutations within Chebyshev distance d of y (symbol values 1..m)."""
    y = np.asarray(getattr(y, "x", y), dtype=float)
    far = frozenset(
        (i, j + 1) for j in range(mult.n) for i in range(1, mult.m + 1) if abs(i - y[j]) > d
    )
    words = list(_iter_words(ConstraintSet(mult, far)))
    return np.asarray(words, dtype=np.int64).reshape(len(words), mult.n)


def monte_carlo_ball(p: EnsembleParams, d: float, trials: int, seed: int | None = None) -> tuple[float, float]:
    """Mean/stderr of the number of codewords within distance d of a random origin.

    Each trial draws a code and a uniformly random multipermutation origin y,
    enumerates the ball around y exhaustively and counts members of the code.
    """
    base = p.seed if seed is None else seed
    counts = []
    cols = np.arange(p.mult.n)
    sorted_word = np.asarray(p.mult.sorted_word())
    cache: dict[tuple[int, ...], np.ndarray] = {}
    for k in range(trials):
        rng = trial_rng(base, k, 1)
        y = tuple(int(v) for v in rng.permutation(sorted_word))
        c = sample_constraints(p, seed=_trial_seed(base, k))
        if y not in cache:
            cache[y] = ball_words(y, p.mult, d)
        W = cache[y]
        if p.kind == "zeros":
            mask = c.zero_mask()
            ok = ~mask[W - 1, cols].any(axis=1)
        else:
            ok = np.ones(len(W), dtype=bool)
            for (i1, j1), (i2, j2) in c.equalities:
                ok &= (W[:, j1 - 1] == i1) == (W[:, j2 - 1] == i2)
        counts.append(int(ok.sum()))
    a = np.asarray(counts, dtype=float)
    return float(a.mean()), float(a.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0


def st_kappa(r: int, m: int, d: int) -> int:
    """Number of fixed-at-zero entries of the ST code C(r, m, d)."""
    return m * r * m - (m * r * m) // d


def scaling_report(r: int, ratio: int, d_values) -> list[tuple[int, float, float]]:
    """Rows (d, C_ST, C_R) with m = ratio * d and kappa equal to the ST code's zero count."""
    rows = []
    for d in d_values:
        m = ratio * d
        st = StCodeParams(r, d, m)
        c_st = log(st.cardinality) / d
        p = EnsembleParams(st.mult, "zeros", st_kappa(r, m, d))
        log_ea = lgamma(st.n + 1) - m * lgamma(r + 1) + log_compatible_ratio(p)
        rows.append((d, c_st, log_ea / d))
    return rows


def exhaustive_average_cardinality(p: EnsembleParams, cap: int = 10**5) -> Fraction:
    """Average code size over every constraint choice (tiny instances only)."""
    from itertools import combinations

    if choice_space_size(p) > cap:
        raise ValueError("choice space too large for exhaustive averaging")
    words = codebook_array(enumerate_words(ConstraintSet(p.mult)))
    cols = np.arange(p.mult.n)
    total = 0
    n = p.mult.n
    if p.kind == "zeros":
        for Z in combinations(range(p.cells), p.count):
            mask = np.zeros((p.mult.m, n), dtype=bool)
            for e in Z:
                mask[e // n, e % n] = True
            total += int((~mask[words - 1, cols].any(axis=1)).sum())
    else:
        pairs = list(combinations(range(p.cells), 2))
        for E in combinations(pairs, p.count):
            ok = np.ones(len(words), dtype=bool)
            for a, b in E:
                ok &= (words[:, a % n] == a // n + 1) == (words[:, b % n] == b // n + 1)
            total += int(ok.sum())
    return Fraction(total, choice_space_size(p))
