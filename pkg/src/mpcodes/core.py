"""Multiplicity vectors, multipermutations and multipermutation matrices.

Symbols are 1-based integers ``1..m``. Real-valued initial vectors are only
applied at the channel boundary (see :func:`from_matrix`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial, prod
from typing import Iterable, Sequence

import numpy as np


def parse_int_list(text: str) -> tuple[int, ...]:
    """Parse ``"2,1,4"`` into ``(2, 1, 4)``."""
    items = [s.strip() for s in text.split(",")]
    if not items or any(s == "" for s in items):
        raise ValueError(f"malformed integer list: {text!r}")
    return tuple(int(s) for s in items)


def parse_float_list(text: str) -> tuple[float, ...]:
    items = [s.strip() for s in text.split(",")]
    if not items or any(s == "" for s in items):
        raise ValueError(f"malformed number list: {text!r}")
    return tuple(float(s) for s in items)


def format_list(values: Iterable) -> str:
    return ",".join(str(v) for v in values)


@dataclass(frozen=True)
class MultiplicityVector:
    r: tuple[int, ...]

    def __post_init__(self):
        r = tuple(int(v) for v in self.r)
        if len(r) < 1:
            raise ValueError("multiplicity vector must be non-empty")
        if any(v < 1 for v in r):
            raise ValueError(f"multiplicities must be >= 1, got {r}")
        object.__setattr__(self, "r", r)

    @classmethod
    def parse(cls, text: str) -> "MultiplicityVector":
        return cls(parse_int_list(text))

    @classmethod
    def regular(cls, r: int, m: int) -> "MultiplicityVector":
        return cls((r,) * m)

    @property
    def m(self) -> int:
        return len(self.r)

    @property
    def n(self) -> int:
        return sum(self.r)

    @property
    def size(self) -> int:
        """Number of distinct multipermutations, n! / prod(r_i!)."""
        return factorial(self.n) // prod(factorial(v) for v in self.r)

    def index_sets(self) -> list[range]:
        """1-based position ranges occupied by each symbol in the sorted word."""
        out, start = [], 1
        for v in self.r:
            out.append(range(start, start + v))
            start += v
        return out

    def sorted_word(self) -> tuple[int, ...]:
        return tuple(i + 1 for i, v in enumerate(self.r) for _ in range(v))

    def __str__(self) -> str:
        return format_list(self.r)


@dataclass(frozen=True)
class InitialVector:
    t: tuple[float, ...]

    def __post_init__(self):
        t = tuple(float(v) for v in self.t)
        if len(t) < 1:
            raise ValueError("initial vector must be non-empty")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError(f"initial vector must be strictly increasing, got {t}")
        object.__setattr__(self, "t", t)

    @classmethod
    def natural(cls, m: int) -> "InitialVector":
        return cls(tuple(range(1, m + 1)))

    @property
    def m(self) -> int:
        return len(self.t)

    def array(self) -> np.ndarray:
        return np.asarray(self.t, dtype=float)


@dataclass(frozen=True)
class Multipermutation:
    x: tuple[int, ...]
    mult: MultiplicityVector

    def __post_init__(self):
        x = tuple(int(v) for v in self.x)
        object.__setattr__(self, "x", x)
        m = self.mult.m
        if len(x) != self.mult.n:
            raise ValueError(f"length {len(x)} does not match n={self.mult.n}")
        counts = [0] * m
        for v in x:
            if not 1 <= v <= m:
                raise ValueError(f"symbol {v} outside 1..{m}")
            counts[v - 1] += 1
        if tuple(counts) != self.mult.r:
            raise ValueError(f"symbol counts {tuple(counts)} differ from r={self.mult.r}")

    @classmethod
    def infer(cls, x: Sequence[int]) -> "Multipermutation":
        """Build from a word, taking r from its histogram (symbols 1..max(x))."""
        x = tuple(int(v) for v in x)
        m = max(x)
        return cls(x, MultiplicityVector(tuple(x.count(i) for i in range(1, m + 1))))

    @property
    def n(self) -> int:
        return len(self.x)

    def array(self) -> np.ndarray:
        return np.asarray(self.x, dtype=np.int64)

    def __str__(self) -> str:
        return format_list(self.x)


@dataclass(frozen=True, eq=False)
class MultipermutationMatrix:
    X: np.ndarray = field(repr=False)
    mult: MultiplicityVector

    def __post_init__(self):
        X = np.array(self.X, dtype=np.uint8)
        if X.shape != (self.mult.m, self.mult.n):
            raise ValueError(f"shape {X.shape} != ({self.mult.m}, {self.mult.n})")
        if np.any(X > 1):
            raise ValueError("entries must be binary")
        if np.any(X.sum(axis=0) != 1):
            raise ValueError("every column must sum to 1")
        if tuple(int(v) for v in X.sum(axis=1)) != self.mult.r:
            raise ValueError("row sums must equal the multiplicity vector")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)

    def __eq__(self, other):
        if not isinstance(other, MultipermutationMatrix):
            return NotImplemented
        return self.mult == other.mult and np.array_equal(self.X, other.X)

    def __hash__(self):
        return hash((self.mult, self.X.tobytes()))

    @property
    def shape(self) -> tuple[int, int]:
        return self.X.shape

    def symbols(self) -> Multipermutation:
        return Multipermutation(tuple(int(i) + 1 for i in self.X.argmax(axis=0)), self.mult)


def to_matrix(x: Multipermutation) -> MultipermutationMatrix:
    X = np.zeros((x.mult.m, x.n), dtype=np.uint8)
    X[np.asarray(x.x) - 1, np.arange(x.n)] = 1
    return MultipermutationMatrix(X, x.mult)


def from_matrix(X: MultipermutationMatrix, t: InitialVector | Sequence[float]) -> np.ndarray:
    """Return the real word ``t X``."""
    t = t.array() if isinstance(t, InitialVector) else np.asarray(t, dtype=float)
    if t.shape != (X.mult.m,):
        raise ValueError(f"initial vector has {t.shape[0]} entries, matrix has {X.mult.m} rows")
    return t @ X.X


def hamming_vec(x, y) -> int:
    a = np.asarray(getattr(x, "x", x))
    b = np.asarray(getattr(y, "x", y))
    if a.shape != b.shape:
        raise ValueError("length mismatch")
    return int(np.count_nonzero(a != b))


def hamming_mat(X: MultipermutationMatrix, Y: MultipermutationMatrix) -> int:
    """Entrywise Hamming distance, cross-checked against tr(X^T (E - Y))."""
    if X.shape != Y.shape:
        raise ValueError("shape mismatch")
    a = X.X.astype(np.int64)
    b = Y.X.astype(np.int64)
    direct = int(np.count_nonzero(a != b))
    via_trace = 2 * int(np.trace(a.T @ (1 - b)))
    # tr(X^T(E-Y)) counts each disagreeing column once; the matrices differ in two entries there
    assert direct == via_trace, (direct, via_trace)
    return direct


def chebyshev(x, y) -> float:
    a = np.asarray(getattr(x, "x", x), dtype=float)
    b = np.asarray(getattr(y, "x", y), dtype=float)
    if a.shape != b.shape:
        raise ValueError("length mismatch")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))
