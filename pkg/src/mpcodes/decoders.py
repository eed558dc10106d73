"""Decoders for constraint-defined multipermutation codes.

ADMM LP decoding works on a factor graph with one variable per surviving
matrix entry (fixed-at-zero entries removed, fixed-at-equality classes
merged), m row checks (sum r_i) and n column checks (sum 1). A merged
variable that touches the same check k times gets a single edge of weight k.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import LlrMatrix, quantize_rank
from .codes import ConstraintSet, is_member
from .core import InitialVector, Multipermutation, MultipermutationMatrix, MultiplicityVector
from .lp import lp_solve
from .polytope import project_capped_sum_batch

EXHAUSTIVE_CAP = 10**6


@dataclass(eq=False)
class FactorGraph:
    mult: MultiplicityVector
    var_of: np.ndarray  # (m, n) variable index, -1 where fixed at zero
    rep: list[tuple[int, int]]  # 1-based representative entry per variable
    edge_check: np.ndarray  # checks 0..m-1 are rows, m..m+n-1 columns
    edge_var: np.ndarray
    edge_weight: np.ndarray
    target: np.ndarray  # per check
    groups: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)  # (check ids, (k, L) edge ids)

    @property
    def n_vars(self) -> int:
        return len(self.rep)

    @property
    def n_edges(self) -> int:
        return self.edge_var.size

    @property
    def n_checks(self) -> int:
        return self.target.size

    def degree(self) -> np.ndarray:
        return np.bincount(self.edge_var, weights=self.edge_weight, minlength=self.n_vars)

    def check_edges(self, check: int) -> list[tuple[tuple[int, int], int]]:
        """(representative entry, weight) pairs incident to one check."""
        idx = np.flatnonzero(self.edge_check == check)
        return [(self.rep[self.edge_var[e]], int(self.edge_weight[e])) for e in idx]

    def is_feasible(self) -> bool:
        cap = np.bincount(self.edge_check, weights=self.edge_weight, minlength=self.n_checks)
        return bool(np.all(cap >= self.target))

    def matrix(self, x: np.ndarray) -> np.ndarray:
        """Expand per-variable values (..., n_vars) to (..., m, n) matrices."""
        x = np.asarray(x, dtype=float)
        padded = np.concatenate([x, np.zeros(x.shape[:-1] + (1,))], axis=-1)
        return padded[..., self.var_of]  # -1 picks the trailing zero


def build_graph(c: ConstraintSet) -> FactorGraph:
    m, n = c.mult.m, c.mult.n
    parent = {(i, j): (i, j) for i in range(1, m + 1) for j in range(1, n + 1)}

    def find(e):
        while parent[e] != e:
            parent[e] = parent[parent[e]]
            e = parent[e]
        return e

    for a, b in sorted(c.equalities):
        ra, rb = find(a), find(b)
        if ra != rb:
            lo, hi = min(ra, rb), max(ra, rb)
            parent[hi] = lo  # smallest entry stays representative
    dead = {find(e) for e in c.zeros}  # an equality class touching a zero is zero

    var_of = np.full((m, n), -1, dtype=np.int64)
    rep: list[tuple[int, int]] = []
    index: dict[tuple[int, int], int] = {}
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            root = find((i, j))
            if root in dead:
                continue
            if root not in index:
                index[root] = len(rep)
                rep.append(root)
            var_of[i - 1, j - 1] = index[root]

    incid: dict[tuple[int, int], int] = {}
    for i in range(m):
        for j in range(n):
            v = var_of[i, j]
            if v < 0:
                continue
            for chk in (i, m + j):
                incid[(chk, int(v))] = incid.get((chk, int(v)), 0) + 1
    keys = sorted(incid)
    edge_check = np.array([k[0] for k in keys], dtype=np.int64)
    edge_var = np.array([k[1] for k in keys], dtype=np.int64)
    edge_weight = np.array([incid[k] for k in keys], dtype=float)
    target = np.concatenate([np.asarray(c.mult.r, dtype=float), np.ones(n)])
    g = FactorGraph(c.mult, var_of, rep, edge_check, edge_var, edge_weight, target)

    counts = np.bincount(edge_check, minlength=m + n)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    for L in sorted(set(counts.tolist()) - {0}):
        chks = np.flatnonzero(counts == L)
        g.groups.append((chks, starts[chks][:, None] + np.arange(L)[None, :]))
    return g


@dataclass
class AdmmOptions:
    mu: float = 5.5
    max_iter: int = 200
    eps: float = 1e-5
    int_tol: float = 1e-5


@dataclass
class AdmmState:
    x: np.ndarray  # (B, n_vars)
    z: np.ndarray  # (B, n_edges)
    lam: np.ndarray  # (B, n_edges)
    mu: float
    iter: np.ndarray  # (B,) iterations used per problem
    converged: np.ndarray  # (B,) residuals met before max_iter


@dataclass(eq=False)
class DecodeResult:
    matrix: np.ndarray
    rounded: tuple[int, ...]
    integral: bool
    iterations: int
    objective: float
    status: str  # "converged" | "max_iter" | "infeasible"
    delta: float | None = None


def round_argmax(X: np.ndarray) -> tuple[int, ...]:
    """x_j = argmax_i X_ij (1-based symbols, lowest row wins ties)."""
    return tuple(int(v) + 1 for v in np.argmax(np.asarray(X), axis=0))


def _certify(X: np.ndarray, word: tuple[int, ...], c: ConstraintSet, tol: float) -> bool:
    if np.max(np.abs(X - np.rint(X))) > tol:
        return False
    try:
        x = Multipermutation(word, c.mult)
    except ValueError:
        return False
    return is_member(MultipermutationMatrix(np.rint(X).astype(np.uint8), c.mult), c) and np.array_equal(
        np.rint(X), x.array()[None, :] == np.arange(1, c.mult.m + 1)[:, None]
    )


def _gamma(G) -> np.ndarray:
    return np.asarray(G.G if isinstance(G, LlrMatrix) else G, dtype=float)


def admm_iterate(gam_v: np.ndarray, g: FactorGraph, opts: AdmmOptions) -> AdmmState:
    """Run ADMM on a batch of per-variable cost vectors ``gam_v`` (B, n_vars)."""
    B, nv = gam_v.shape
    E = g.n_edges
    mu = float(opts.mu)
    w = g.edge_weight
    deg = g.degree()
    ev = g.edge_var
    flat_var = (np.arange(B)[:, None] * nv + ev[None, :]).ravel()
    thresh = opts.eps * np.sqrt(E)

    z = np.empty((B, E))
    cap = np.bincount(g.edge_check, weights=w, minlength=g.n_checks)
    z[:] = (g.target / cap)[g.edge_check]
    lam = np.zeros((B, E))
    x = np.zeros((B, nv))
    iters = np.zeros(B, dtype=np.int64)
    converged = np.zeros(B, dtype=bool)
    act = np.arange(B)
    for it in range(1, opts.max_iter + 1):
        za, la, ga = z[act], lam[act], gam_v[act]
        k = act.size
        fv = flat_var[: k * E]
        s = np.bincount(fv, weights=(w * (za - la / mu)).ravel(), minlength=k * nv).reshape(k, nv)
        xa = (s - ga / mu) / deg
        px = xa[:, ev]
        v = px + la / mu
        zn = np.empty_like(za)
        for chks, eidx in g.groups:
            V = v[:, eidx].reshape(-1, eidx.shape[1])
            W = np.broadcast_to(w[eidx], (k,) + eidx.shape).reshape(V.shape)
            T = np.broadcast_to(g.target[chks], (k, chks.size)).ravel()
            zn[:, eidx] = project_capped_sum_batch(V, T, W).reshape(k, *eidx.shape)
        la = la + mu * (px - zn)
        primal = np.sqrt(((px - zn) ** 2).sum(axis=1))
        dual = mu * np.sqrt(((zn - za) ** 2).sum(axis=1))
        x[act], z[act], lam[act] = xa, zn, la
        iters[act] = it
        done = (primal <= thresh) & (dual <= thresh)
        if done.any():
            converged[act[done]] = True
            act = act[~done]
            if act.size == 0:
                break
    return AdmmState(x, z, lam, mu, iters, converged)


def admm_decode_batch(G, g: FactorGraph, c: ConstraintSet, opts: AdmmOptions | None = None) -> list[DecodeResult]:
    """ADMM LP decoding of a stack of Gamma matrices (B, m, n)."""
    opts = opts or AdmmOptions()
    G = np.asarray(G, dtype=float)
    if G.ndim == 2:
        G = G[None]
    B = G.shape[0]
    if not g.is_feasible():
        nan = np.full(G.shape[1:], np.nan)
        return [DecodeResult(nan, (), False, 0, np.nan, "infeasible") for _ in range(B)]
    alive = g.var_of >= 0
    gam_v = np.zeros((B, g.n_vars))
    for b in range(B):
        gam_v[b] = np.bincount(g.var_of[alive], weights=G[b][alive], minlength=g.n_vars)
    st = admm_iterate(gam_v, g, opts)
    X = g.matrix(st.x)
    out = []
    for b in range(B):
        word = round_argmax(X[b])
        conv = bool(st.converged[b])
        integral = conv and _certify(X[b], word, c, opts.int_tol)
        out.append(
            DecodeResult(
                X[b], word, integral, int(st.iter[b]), float((G[b] * X[b]).sum()),
                "converged" if conv else "max_iter",
            )
        )
    return out


def admm_decode(G, g: FactorGraph, c: ConstraintSet, opts: AdmmOptions | None = None) -> DecodeResult:
    return admm_decode_batch(_gamma(G), g, c, opts)[0]


# ---------------------------------------------------------------- exhaustive references


def _words(codebook) -> np.ndarray:
    W = np.asarray([getattr(w, "x", w) for w in codebook], dtype=np.int64)
    if W.ndim != 2 or W.shape[0] == 0:
        raise ValueError("codebook must be a non-empty list of equal-length words")
    if W.shape[0] > EXHAUSTIVE_CAP:
        raise ValueError(f"codebook larger than {EXHAUSTIVE_CAP} words")
    return W


def ml_costs(G, words: np.ndarray) -> np.ndarray:
    """Gamma . vec(X) for every codeword; G may be (m, n) or (B, m, n)."""
    G = np.asarray(G, dtype=float)
    cols = np.arange(words.shape[1])
    return G[..., words - 1, cols].sum(axis=-1)


def exhaustive_ml(G, codebook, mult: MultiplicityVector | None = None) -> Multipermutation:
    """Codeword minimising Gamma . vec(X); ties go to the first word (lowest rank)."""
    W = _words(codebook)
    k = int(np.argmin(ml_costs(_gamma(G), W)))
    return Multipermutation(tuple(int(s) for s in W[k]), mult or Multipermutation.infer(W[k]).mult)


def exhaustive_min_chebyshev(y_ranked, codebook, t, mult: MultiplicityVector | None = None) -> Multipermutation:
    """Codeword whose values t[x] are Chebyshev-closest to the ranked word's values."""
    W = _words(codebook)
    tv = np.asarray(getattr(t, "t", t), dtype=float)
    yr = np.asarray(getattr(y_ranked, "x", y_ranked), dtype=np.int64)
    dist = np.max(np.abs(tv[W - 1] - tv[yr - 1]), axis=1)
    k = int(np.argmin(dist))
    return Multipermutation(tuple(int(s) for s in W[k]), mult or Multipermutation.infer(W[k]).mult)


# ---------------------------------------------------------------- Chebyshev LP


def chebyshev_lp_decode(
    y, c: ConstraintSet, t, mode: str = "soft", g: FactorGraph | None = None, tie_break: str = "l1"
) -> DecodeResult:
    """minimise delta s.t. X in the code polytope, -delta <= tX - y <= delta.

    In hard mode the channel output is first ranked to a multipermutation and
    its values t[x] are used as y. The optimal face is usually large; with
    ``tie_break="l1"`` a second LP picks, among points with deviation at most
    delta*, one minimising the total deviation sum_j |(tX)_j - y_j|.
    ``tie_break="vertex"`` returns whatever vertex the simplex lands on.
    """
    if mode not in ("soft", "hard"):
        raise ValueError(f"mode must be soft or hard, not {mode!r}")
    if tie_break not in ("l1", "vertex"):
        raise ValueError(f"tie_break must be l1 or vertex, not {tie_break!r}")
    g = g or build_graph(c)
    m, n = c.mult.m, c.mult.n
    tv = t.array() if isinstance(t, InitialVector) else np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.shape != (n,):
        raise ValueError(f"received word length {y.shape} != n={n}")
    if mode == "hard":
        y = tv[np.asarray(quantize_rank(y, c.mult).x) - 1]
    nv = g.n_vars
    A_eq = np.zeros((g.n_checks, nv))
    np.add.at(A_eq, (g.edge_check, g.edge_var), g.edge_weight)
    TX = np.zeros((n, nv))  # (tX)_j = sum_i t_i x_var(i,j)
    alive = g.var_of >= 0
    np.add.at(TX, (np.nonzero(alive)[1], g.var_of[alive]), np.broadcast_to(tv[:, None], (m, n))[alive])

    # stage 1: variables x (nv), delta' = delta - D with D making every rhs >= 0
    D = float(np.abs(y).max() + np.abs(tv).max())
    A_ub = np.block([[TX, -np.ones((n, 1))], [-TX, -np.ones((n, 1))]])
    cost = np.zeros(nv + 1)
    cost[nv] = 1.0
    res = lp_solve(
        cost,
        np.hstack([A_eq, np.zeros((g.n_checks, 1))]),
        g.target,
        A_ub,
        np.concatenate([y + D, D - y]),
        [(0.0, None)] * nv + [(None, None)],
    )
    iters = res.iterations
    if res.status != "optimal":
        return DecodeResult(np.full((m, n), np.nan), (), False, iters, np.nan, "infeasible")
    res.x[nv] += D
    delta = float(res.x[nv])
    xv = res.x[:nv]
    if tie_break == "l1":
        # stage 2: variables x (nv), s (n); min sum s, |tX - y| <= s <= delta*
        eye = np.eye(n)
        cap = delta + 1e-9 * max(1.0, delta)
        res2 = lp_solve(
            np.concatenate([np.zeros(nv), np.ones(n)]),
            np.hstack([A_eq, np.zeros((g.n_checks, n))]),
            g.target,
            np.block([[TX, -eye], [-TX, -eye]]),
            np.concatenate([y, -y]),
            [(0.0, None)] * nv + [(0.0, cap)] * n,
        )
        iters += res2.iterations
        if res2.status == "optimal":
            xv = res2.x[:nv]
    X = g.matrix(xv)
    word = round_argmax(X)
    return DecodeResult(X, word, _certify(X, word, c, 1e-7), iters, delta, "converged", delta)
