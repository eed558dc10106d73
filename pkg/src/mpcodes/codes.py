"""Codes defined by fixed-at-zero / fixed-at-equality constraints, ST codes."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import factorial
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .core import (
    Multipermutation,
    MultipermutationMatrix,
    MultiplicityVector,
    to_matrix,
)
from .ranking import rank_mp, unrank_mp

Entry = tuple[int, int]  # 1-based (row, column)

DEFAULT_CODEBOOK_CAP = 10**6


class CodebookTooLarge(ValueError):
    pass


def _entry(e) -> Entry:
    i, j = (int(v) for v in e)
    return (i, j)


@dataclass(frozen=True)
class ConstraintSet:
    mult: MultiplicityVector
    zeros: frozenset[Entry] = frozenset()
    equalities: frozenset[tuple[Entry, Entry]] = frozenset()

    def __post_init__(self):
        m, n = self.mult.m, self.mult.n
        zeros = frozenset(_entry(e) for e in self.zeros)
        eqs = set()
        for a, b in self.equalities:
            a, b = _entry(a), _entry(b)
            if a == b:
                raise ValueError(f"equality pair repeats entry {a}")
            eqs.add((min(a, b), max(a, b)))
        for i, j in zeros | {e for pair in eqs for e in pair}:
            if not (1 <= i <= m and 1 <= j <= n):
                raise ValueError(f"entry {(i, j)} outside the {m}x{n} grid")
        object.__setattr__(self, "zeros", zeros)
        object.__setattr__(self, "equalities", frozenset(eqs))

    @property
    def kappa(self) -> int:
        return len(self.zeros)

    @property
    def iota(self) -> int:
        return len(self.equalities)

    def zero_mask(self) -> np.ndarray:
        mask = np.zeros((self.mult.m, self.mult.n), dtype=bool)
        for i, j in self.zeros:
            mask[i - 1, j - 1] = True
        return mask


@dataclass(frozen=True)
class StCodeParams:
    r: int
    d: int
    m: int

    def __post_init__(self):
        if self.r < 1 or self.d < 1 or self.m < 1:
            raise ValueError("r, d, m must be positive")
        if self.m % self.d:
            raise ValueError(f"d={self.d} must divide m={self.m}")

    @property
    def a(self) -> int:
        return self.m // self.d

    @property
    def n(self) -> int:
        return self.m * self.r

    @property
    def mult(self) -> MultiplicityVector:
        return MultiplicityVector.regular(self.r, self.m)

    @property
    def sub_mult(self) -> MultiplicityVector:
        return MultiplicityVector.regular(self.r, self.a)

    @property
    def sub_size(self) -> int:
        return factorial(self.a * self.r) // factorial(self.r) ** self.a

    @property
    def cardinality(self) -> int:
        return self.sub_size**self.d


def is_member(X: MultipermutationMatrix, c: ConstraintSet) -> bool:
    if X.mult != c.mult:
        raise ValueError("matrix and constraint set have different multiplicity vectors")
    A = X.X
    if any(A[i - 1, j - 1] for i, j in c.zeros):
        return False
    return all(A[a[0] - 1, a[1] - 1] == A[b[0] - 1, b[1] - 1] for a, b in c.equalities)


def word_is_member(x: Multipermutation, c: ConstraintSet) -> bool:
    def val(e):
        return 1 if x.x[e[1] - 1] == e[0] else 0

    if any(val(e) for e in c.zeros):
        return False
    return all(val(a) == val(b) for a, b in c.equalities)


def st_constraints(p: StCodeParams) -> ConstraintSet:
    zeros = {
        (i, j)
        for j in range(1, p.n + 1)
        for i in range(1, p.m + 1)
        if (i - j) % p.d
    }
    return ConstraintSet(p.mult, frozenset(zeros))


def derangement_constraints(mult: MultiplicityVector) -> ConstraintSet:
    zeros = {(i, j) for i, block in enumerate(mult.index_sets(), start=1) for j in block}
    return ConstraintSet(mult, frozenset(zeros))


def _iter_words(c: ConstraintSet) -> Iterator[tuple[int, ...]]:
    """Depth-first over symbol position sets, skipping fixed-at-zero entries."""
    mult = c.mult
    n = mult.n
    forbidden = [set() for _ in range(mult.m)]
    for i, j in c.zeros:
        forbidden[i - 1].add(j - 1)
    word = [0] * n

    def rec(i: int, free: list[int]):
        if i == mult.m:
            yield tuple(word)
            return
        allowed = [p for p in free if p not in forbidden[i]]
        for chosen in combinations(allowed, mult.r[i]):
            for p in chosen:
                word[p] = i + 1
            chosen_set = set(chosen)
            yield from rec(i + 1, [p for p in free if p not in chosen_set])
        # word entries are overwritten on the next branch; no reset needed

    yield from rec(0, list(range(n)))


def enumerate_words(c: ConstraintSet, cap: int = DEFAULT_CODEBOOK_CAP) -> list[Multipermutation]:
    """All codewords as multipermutations, in unrank order."""
    out = []
    for w in _iter_words(c):
        x = Multipermutation(w, c.mult)
        if c.equalities and not word_is_member(x, c):
            continue
        out.append(x)
        if len(out) > cap:
            raise CodebookTooLarge(f"codebook exceeds cap of {cap} codewords")
    out.sort(key=rank_mp)
    return out


def enumerate_codebook(c: ConstraintSet, cap: int = DEFAULT_CODEBOOK_CAP) -> list[MultipermutationMatrix]:
    return [to_matrix(x) for x in enumerate_words(c, cap)]


def codebook_array(words: Iterable[Multipermutation]) -> np.ndarray:
    """Stack codewords into a (K, n) int array of symbols."""
    return np.array([w.x for w in words], dtype=np.int64)


# ---------------------------------------------------------------- ST codes


def _sub_symbols_to_word(subwords: list[tuple[int, ...]], p: StCodeParams) -> tuple[int, ...]:
    out = [0] * p.n
    for k, sub in enumerate(subwords, start=1):
        for q, s in enumerate(sub):
            out[(k - 1) + q * p.d] = k + (s - 1) * p.d
    return tuple(out)


def encode_st(M: int, p: StCodeParams) -> Multipermutation:
    M = int(M)
    if not 0 <= M < p.cardinality:
        raise ValueError(f"message {M} outside 0..{p.cardinality - 1}")
    radix = p.sub_size
    digits = []
    for _ in range(p.d):
        M, l = divmod(M, radix)
        digits.append(l)
    digits.reverse()  # l_1 is the most significant digit
    subwords = [unrank_mp(l, p.sub_mult).x for l in digits]
    return Multipermutation(_sub_symbols_to_word(subwords, p), p.mult)


def random_message(p: StCodeParams, rng: np.random.Generator) -> int:
    """Uniform message index, drawn digit by digit so huge codes stay exact."""
    M = 0
    for _ in range(p.d):
        M = M * p.sub_size + int(rng.integers(p.sub_size))
    return M


def decode_st(x, p: StCodeParams) -> int:
    word = tuple(int(v) for v in getattr(x, "x", x))
    if len(word) != p.n:
        raise ValueError(f"codeword length {len(word)} != n={p.n}")
    M = 0
    for k in range(1, p.d + 1):
        sub = word[k - 1 :: p.d]
        if any((v - k) % p.d or not 1 <= v <= p.m for v in sub):
            raise ValueError(f"positions of sub-vector {k} violate the congruence x_j = j mod {p.d}")
        symbols = tuple((v - k) // p.d + 1 for v in sub)
        try:
            sub_mp = Multipermutation(symbols, p.sub_mult)
        except ValueError as exc:
            raise ValueError(f"sub-vector {k} has wrong multiplicities") from exc
        M = M * p.sub_size + rank_mp(sub_mp)
    return M


def bounded_distance_decode(y_ranked, p: StCodeParams) -> Multipermutation | None:
    """Snap each position to the nearest value congruent to it mod d.

    Returns None when some position is at distance >= d/2 from every
    admissible value or the snapped word is not a codeword.
    """
    y = np.asarray(getattr(y_ranked, "x", y_ranked), dtype=float)
    if y.shape != (p.n,):
        raise ValueError(f"received word length {y.shape} != n={p.n}")
    d = p.d
    k = np.arange(p.n) % d + 1  # smallest admissible symbol per position
    q = np.clip(np.rint((y - k) / d), 0, p.a - 1)
    v = k + d * q
    if np.any(np.abs(v - y) * 2 >= d):
        return None
    try:
        return Multipermutation(tuple(int(s) for s in v), p.mult)
    except ValueError:
        return None


def radius_search(y, words: np.ndarray, radius: float, strict: bool = True) -> list[int]:
    """Indices of codewords (rows of ``words``) within Chebyshev ``radius`` of ``y``."""
    dist = np.max(np.abs(words - np.asarray(y, dtype=float)), axis=1)
    hit = dist < radius if strict else dist <= radius
    return [int(i) for i in np.flatnonzero(hit)]


def min_chebyshev_distance(words: np.ndarray) -> float:
    best = np.inf
    for i in range(len(words) - 1):
        dist = np.max(np.abs(words[i + 1 :] - words[i]), axis=1)
        best = min(best, float(dist.min()))
    return best


# ---------------------------------------------------------------- files


def read_constraints(path: str | Path, mult: MultiplicityVector) -> ConstraintSet:
    """Read ``i,j`` (fixed-at-zero) and ``i,j = k,l`` (fixed-at-equality) lines."""
    zeros, eqs = set(), set()
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if "=" in line:
                lhs, rhs = line.split("=", 1)
                a = tuple(int(s) for s in lhs.split(","))
                b = tuple(int(s) for s in rhs.split(","))
                if len(a) != 2 or len(b) != 2:
                    raise ValueError
                eqs.add((a, b))
            else:
                e = tuple(int(s) for s in line.split(","))
                if len(e) != 2:
                    raise ValueError
                zeros.add(e)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: cannot parse constraint {raw!r}") from None
    return ConstraintSet(mult, frozenset(zeros), frozenset(eqs))


def write_codebook(words: Iterable[Multipermutation], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for w in words:
            fh.write(str(w) + "\n")

