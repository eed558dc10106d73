"""Convex hull of multipermutation matrices and the projections used by ADMM."""
from __future__ import annotations

import numpy as np

from .core import MultipermutationMatrix, MultiplicityVector


class NotInHull(ValueError):
    pass


def _r_array(r) -> np.ndarray:
    return np.asarray(getattr(r, "r", r), dtype=float)


def in_hull(Z, r, tol: float = 1e-9) -> bool:
    Z = np.asarray(Z, dtype=float)
    ra = _r_array(r)
    if Z.ndim != 2 or Z.shape != (ra.size, int(round(ra.sum()))):
        return False
    return bool(
        np.all(np.abs(Z.sum(axis=0) - 1.0) <= tol)
        and np.all(np.abs(Z.sum(axis=1) - ra) <= tol)
        and np.all(Z >= -tol)
        and np.all(Z <= 1.0 + tol)
    )


def _capacitated_matching(support: np.ndarray, caps: list[int]) -> list[int] | None:
    """Assign each column a row with support, row i receiving exactly caps[i] columns."""
    m, n = support.shape
    owner = [-1] * n
    load = [[] for _ in range(m)]
    rows_of = [np.flatnonzero(support[:, j]).tolist() for j in range(n)]

    def augment(j, seen):
        for i in rows_of[j]:
            if i in seen:
                continue
            seen.add(i)
            if len(load[i]) < caps[i]:
                load[i].append(j)
                owner[j] = i
                return True
            for k in list(load[i]):
                if augment(k, seen):
                    load[i].remove(k)
                    load[i].append(j)
                    owner[j] = i
                    return True
        return False

    for j in range(n):
        if not augment(j, set()):
            return None
    return owner


def decompose(Z, r, tol: float = 1e-9) -> list[tuple[float, MultipermutationMatrix]]:
    """Write a hull point as a convex combination of multipermutation matrices.

    Greedy: repeatedly take the support assignment whose smallest entry is
    largest (bisection over entry values), peel it off with that weight.
    Each step zeroes at least one entry.
    """
    mult = r if isinstance(r, MultiplicityVector) else MultiplicityVector(tuple(r))
    Z = np.array(Z, dtype=float)
    if not in_hull(Z, mult, tol):
        raise NotInHull("matrix violates the row/column sum or box conditions")
    R = np.clip(Z, 0.0, 1.0)
    caps = list(mult.r)
    cols = np.arange(mult.n)
    terms: list[tuple[float, MultipermutationMatrix]] = []
    remaining = 1.0
    while remaining > 1e-12:
        values = np.unique(R[R > 1e-15])
        lo, hi, best = 0, len(values) - 1, None
        while lo <= hi:
            mid = (lo + hi) // 2
            owner = _capacitated_matching(R >= values[mid], caps)
            if owner is None:
                hi = mid - 1
            else:
                best, lo = owner, mid + 1
        if best is None:
            break
        rows = np.asarray(best)
        w = float(min(R[rows, cols].min(), remaining))
        X = np.zeros_like(R, dtype=np.uint8)
        X[rows, cols] = 1
        terms.append((w, MultipermutationMatrix(X, mult)))
        R[rows, cols] -= w
        k = int(np.argmin(R[rows, cols]))
        R[rows[k], cols[k]] = 0.0
        R[R < 0] = 0.0
        remaining -= w
    if terms and remaining > 0:
        # residual dust below tolerance goes to the largest term
        k = max(range(len(terms)), key=lambda h: terms[h][0])
        terms[k] = (terms[k][0] + remaining, terms[k][1])
    return terms


def project_simplex(v) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum x = 1} (sort-and-threshold)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def project_capped_sum(v, r: float, pivot_sample: int | None = None) -> np.ndarray:
    """Euclidean projection onto {0 <= x <= 1, sum x = r}.

    Binary search over the break points {v_i, v_i - 1} using median pivots.
    Coordinates whose break points both fall outside the current bracket are
    folded into running counts/sums, so each round only touches the
    still-uncertain coordinates. ``pivot_sample`` takes the median of only the
    first few break points instead of all of them.
    """
    v = np.asarray(v, dtype=float)
    n = v.size
    if not 0 <= r <= n:
        raise ValueError(f"target sum {r} outside [0, {n}]")
    if n == 0:
        return v.copy()

    U = v  # uncertain coordinates
    B = np.concatenate([v, v - 1.0])
    lo, hi = -np.inf, np.inf  # sum(x(lo)) >= r >= sum(x(hi))
    n_clip = 0.0  # fixed at 1
    n_act = 0  # fixed active: contribute v - theta
    s_act = 0.0
    theta_star = None

    while B.size:
        if pivot_sample and B.size > pivot_sample:
            head = B[:pivot_sample]
            theta = float(np.partition(head, head.size // 2)[head.size // 2])
        else:
            theta = float(np.partition(B, B.size // 2)[B.size // 2])
        clipped = U > theta + 1.0
        zero = U < theta
        active = ~(clipped | zero)
        total = n_clip + s_act - n_act * theta + clipped.sum() + (U[active] - theta).sum()
        if total > r:
            lo = theta
            B = B[B > theta]
        elif total < r:
            hi = theta
            B = B[B < theta]
        else:
            theta_star = theta
            break
        # retire coordinates with no break point left inside (lo, hi)
        keep = ((U > lo) & (U < hi)) | ((U - 1.0 > lo) & (U - 1.0 < hi))
        if not keep.all():
            gone = U[~keep]
            c = gone - 1.0 >= hi  # clipped throughout the bracket
            a = (gone >= hi) & (gone - 1.0 <= lo)  # active throughout
            n_clip += c.sum()
            n_act += int(a.sum())
            s_act += gone[a].sum()
            U = U[keep]

    if theta_star is None:
        # no break point strictly inside (lo, hi): the sum is affine there
        mid = 0.5 * (lo + hi) if np.isfinite(lo) and np.isfinite(hi) else (lo if np.isfinite(lo) else hi)
        clipped = U > mid + 1.0
        active = ~clipped & (U >= mid)
        k = n_act + int(active.sum())
        if k == 0:
            theta_star = mid
        else:
            theta_star = (n_clip + clipped.sum() + s_act + U[active].sum() - r) / k
    return np.clip(v - theta_star, 0.0, 1.0)


def project_capped_sum_batch(V, target, weights=None) -> np.ndarray:
    """Row-wise projection onto {0 <= x <= 1, sum_k w_k x_k = target}.

    Projection is in the w-weighted metric (unit weights give the Euclidean
    case). Sort-based: evaluates the piecewise-linear sum at every sorted
    break point and interpolates inside the crossing interval.
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    k, L = V.shape
    W = np.ones_like(V) if weights is None else np.broadcast_to(np.asarray(weights, dtype=float), V.shape)
    tgt = np.broadcast_to(np.asarray(target, dtype=float), (k,))
    bp = np.concatenate([V, V - 1.0], axis=1)
    dslope = np.concatenate([W, -W], axis=1)
    order = np.argsort(-bp, axis=1, kind="stable")
    bp = np.take_along_axis(bp, order, axis=1)
    slope = np.cumsum(np.take_along_axis(dslope, order, axis=1), axis=1)
    gaps = bp[:, :-1] - bp[:, 1:]
    f = np.concatenate([np.zeros((k, 1)), np.cumsum(slope[:, :-1] * gaps, axis=1)], axis=1)
    # first break point where the sum reaches the target
    hit = f >= tgt[:, None] * (1.0 - 1e-14)
    idx = np.where(hit.any(axis=1), np.argmax(hit, axis=1), 2 * L - 1)
    idx = np.maximum(idx, 1)
    rows = np.arange(k)
    s = slope[rows, idx - 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = np.where(s > 0, bp[rows, idx - 1] - (tgt - f[rows, idx - 1]) / s, bp[rows, idx])
    return np.clip(V - theta[:, None], 0.0, 1.0)


def project_capped_sum_sorted(v, r: float) -> np.ndarray:
    """Sort-based projection onto {0 <= x <= 1, sum x = r} (baseline)."""
    v = np.asarray(v, dtype=float)
    if not 0 <= r <= v.size:
        raise ValueError(f"target sum {r} outside [0, {v.size}]")
    return project_capped_sum_batch(v[None, :], r)[0]
