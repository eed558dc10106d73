"""Small dense two-phase primal simplex (tableau form).

Entering variable: most negative reduced cost, switching to Bland's
smallest-index rule after a run of degenerate pivots so the method cannot
cycle. Meant for desk-scale problems (a few thousand variables at most).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOL = 1e-9
DEGENERATE_RUN = 20


@dataclass
class LpResult:
    x: np.ndarray | None
    objective: float
    status: str  # "optimal" | "infeasible" | "unbounded" | "max_iter"
    iterations: int


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    nz = np.flatnonzero(T[:, col])
    nz = nz[nz != row]
    T[nz] -= T[nz, col, None] * T[row]


def _simplex(T: np.ndarray, basis: list[int], max_iter: int, drop_from: int | None = None) -> tuple[str, int, np.ndarray]:
    """Minimise the objective in the last row of T. Returns (status, pivots, T).

    Columns at index >= ``drop_from`` (phase-1 artificials) are deleted once
    they leave the basis; they can never re-enter usefully.
    """
    m = T.shape[0] - 1
    degenerate = 0
    for it in range(max_iter):
        cost = T[-1, :-1]
        cand = np.flatnonzero(cost < -TOL)
        if cand.size == 0:
            return "optimal", it, T
        bland = degenerate >= DEGENERATE_RUN
        col = int(cand[0]) if bland else int(cand[np.argmin(cost[cand])])
        colv = T[:m, col]
        pos = np.flatnonzero(colv > TOL)
        if pos.size == 0:
            return "unbounded", it, T
        ratios = T[pos, -1] / colv[pos]
        best = ratios.min()
        ties = pos[ratios <= best + TOL * max(1.0, abs(best))]
        row = int(ties[np.argmin([basis[i] for i in ties])]) if ties.size > 1 else int(ties[0])
        degenerate = degenerate + 1 if best <= TOL else 0
        _pivot(T, row, col)
        leaving = basis[row]
        basis[row] = col
        if drop_from is not None and leaving >= drop_from:
            T = np.delete(T, leaving, axis=1)
            for i, b in enumerate(basis):
                if b > leaving:
                    basis[i] = b - 1
    return "max_iter", max_iter, T


def lp_solve(c, A_eq=None, b_eq=None, A_ub=None, b_ub=None, bounds=None, max_iter: int = 50_000) -> LpResult:
    """minimise c^T x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  bounds (default x >= 0).

    ``bounds`` is a list of (lo, hi) pairs; ``None`` means unbounded on that side.
    """
    c = np.asarray(c, dtype=float)
    nv = c.size
    A_eq = np.zeros((0, nv)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    A_ub = np.zeros((0, nv)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    if bounds is None:
        bounds = [(0.0, None)] * nv
    if len(bounds) != nv:
        raise ValueError("bounds must have one entry per variable")

    # x = offset + S @ x' with x' >= 0
    cols, offset = [], np.zeros(nv)
    extra_ub_rows = []
    for k, (lo, hi) in enumerate(bounds):
        if lo is not None:
            offset[k] = lo
            cols.append((k, 1.0))
            if hi is not None:
                extra_ub_rows.append((len(cols) - 1, hi - lo))
        elif hi is not None:
            offset[k] = hi
            cols.append((k, -1.0))
        else:
            cols.append((k, 1.0))
            cols.append((k, -1.0))
    S = np.zeros((nv, len(cols)))
    for j, (k, s) in enumerate(cols):
        S[k, j] = s
    ne = len(cols)

    Ae = A_eq @ S
    be = b_eq - A_eq @ offset
    Au = A_ub @ S
    bu = b_ub - A_ub @ offset
    if extra_ub_rows:
        bound_rows = np.zeros((len(extra_ub_rows), ne))
        for r_, (j, ub) in enumerate(extra_ub_rows):
            bound_rows[r_, j] = 1.0
        Au = np.vstack([Au, bound_rows])
        bu = np.concatenate([bu, [ub for _, ub in extra_ub_rows]])
    cc = S.T @ c

    n_eq, n_ub = Ae.shape[0], Au.shape[0]
    m = n_eq + n_ub
    # columns: structural | slacks | artificials | rhs
    A = np.zeros((m, ne + n_ub))
    A[:n_eq, :ne] = Ae
    A[n_eq:, :ne] = Au
    A[n_eq:, ne:] = np.eye(n_ub)
    b = np.concatenate([be, bu])
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    basis: list[int] = [-1] * m
    need_art = []
    for i in range(m):
        if i >= n_eq and not neg[i]:
            basis[i] = ne + (i - n_eq)
        else:
            need_art.append(i)
    na = len(need_art)
    ntot = ne + n_ub + na
    T = np.zeros((m + 1, ntot + 1))
    T[:m, : ne + n_ub] = A
    T[:m, -1] = b
    for a, i in enumerate(need_art):
        T[i, ne + n_ub + a] = 1.0
        basis[i] = ne + n_ub + a
    iters = 0

    if na:
        T[-1, ne + n_ub : ntot] = 1.0
        for i in need_art:
            T[-1] -= T[i]
        status, it, T = _simplex(T, basis, max_iter, drop_from=ne + n_ub)
        iters += it
        ntot = T.shape[1] - 1
        if status == "max_iter":
            return LpResult(None, np.nan, status, iters)
        if -T[-1, -1] > 1e-7 * max(1.0, np.abs(b).max()):
            return LpResult(None, np.nan, "infeasible", iters)
        # drive remaining artificials out of the basis, dropping redundant rows
        keep = []
        for i in range(m):
            if basis[i] >= ne + n_ub:
                row = T[i, : ne + n_ub]
                j = int(np.argmax(np.abs(row)))
                if abs(row[j]) > TOL:
                    _pivot(T, i, j)
                    basis[i] = j
                    keep.append(i)
            else:
                keep.append(i)
        T = np.vstack([T[keep], T[-1:]])
        basis = [basis[i] for i in keep]
        T = np.delete(T, np.s_[ne + n_ub : ntot], axis=1)
        ntot = ne + n_ub

    T[-1] = 0.0
    T[-1, :ne] = cc
    for i, bcol in enumerate(basis):
        if T[-1, bcol] != 0.0:
            T[-1] -= T[-1, bcol] * T[i]
    status, it, T = _simplex(T, basis, max_iter)
    iters += it
    if status != "optimal":
        return LpResult(None, np.nan, status, iters)
    xp = np.zeros(ntot)
    for i, bcol in enumerate(basis):
        xp[bcol] = T[i, -1]
    x = offset + S @ xp[:ne]
    return LpResult(x, float(c @ x), "optimal", iters)
