"""Mixed-radix ranking of multipermutations.

Each symbol ``i`` contributes one digit: the combinatorial-number-system rank
of the positions it occupies among the positions not yet taken by symbols
``1..i-1``. Digit ``i`` ranges over ``C(n_y, r_i)`` values, where ``n_y`` is the
number of free positions at stage ``i``; bases are the running products of
those ranges.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

from .core import Multipermutation, MultiplicityVector


def binomial(a: int, b: int) -> int:
    if b < 0 or a < b:
        return 0
    return comb(a, b)


@dataclass(frozen=True)
class RadixSystem:
    mult: MultiplicityVector
    bases: tuple[int, ...]
    digit_ranges: tuple[int, ...]

    @property
    def size(self) -> int:
        return self.bases[-1] * self.digit_ranges[-1]


@lru_cache(maxsize=256)
def radix_system(mult: MultiplicityVector) -> RadixSystem:
    bases, ranges = [], []
    b, n_y = 1, mult.n
    for r_i in mult.r:
        bases.append(b)
        ranges.append(binomial(n_y, r_i))
        b *= ranges[-1]
        n_y -= r_i
    rs = RadixSystem(mult, tuple(bases), tuple(ranges))
    if rs.size != mult.size:
        raise AssertionError(f"radix product {rs.size} != multinomial {mult.size}")
    return rs


def rank_combination(positions) -> int:
    """Rank of a sorted 0-based position set: sum_j C(alpha_j, j), j from 1."""
    return sum(binomial(a, j) for j, a in enumerate(positions, start=1))


def unrank_combination(value: int, k: int) -> list[int]:
    """Inverse of :func:`rank_combination` for a ``k``-subset."""
    out = [0] * k
    for j in range(k, 0, -1):
        # largest alpha with C(alpha, j) <= value
        alpha = j - 1
        while binomial(alpha + 1, j) <= value:
            alpha += 1
        out[j - 1] = alpha
        value -= binomial(alpha, j)
    if value != 0:
        raise ValueError("combination rank out of range")
    return out


def rank_mp(x: Multipermutation) -> int:
    rs = radix_system(x.mult)
    y = list(x.x)
    total = 0
    for i, r_i in enumerate(x.mult.r, start=1):
        alphas = [k for k, v in enumerate(y) if v == i]
        assert len(alphas) == r_i
        total += rank_combination(alphas) * rs.bases[i - 1]
        y = [v for v in y if v != i]
    return total


def unrank_mp(M: int, mult: MultiplicityVector) -> Multipermutation:
    rs = radix_system(mult)
    M = int(M)
    if not 0 <= M < rs.size:
        raise ValueError(f"index {M} outside 0..{rs.size - 1}")
    out = [0] * mult.n
    free = list(range(mult.n))
    for i, r_i in enumerate(mult.r, start=1):
        digit = (M // rs.bases[i - 1]) % rs.digit_ranges[i - 1]
        alphas = unrank_combination(digit, r_i)
        for a in alphas:
            out[free[a]] = i
        taken = set(alphas)
        free = [p for k, p in enumerate(free) if k not in taken]
    return Multipermutation(tuple(out), mult)
