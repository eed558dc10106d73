"""Acceptance criteria 1-11, one PASS/FAIL line each.

Run alone with ``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``.
"""
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from mpcodes.channels import ChannelSpec, llr, snr_to_sigma, transmit, trial_rng
from mpcodes.codes import (
    StCodeParams,
    codebook_array,
    decode_st,
    derangement_constraints,
    encode_st,
    enumerate_codebook,
    enumerate_words,
    min_chebyshev_distance,
    random_message,
    st_constraints,
)
from mpcodes.core import InitialVector, Multipermutation, MultiplicityVector, to_matrix
from mpcodes.decoders import AdmmOptions, admm_decode_batch, admm_iterate, build_graph, chebyshev_lp_decode, ml_costs
from mpcodes.ensemble import (
    EnsembleParams,
    ball_size_bounds,
    exhaustive_average_cardinality,
    expected_cardinality,
    monte_carlo_ball,
    monte_carlo_cardinality,
    scaling_report,
)
from mpcodes.initvec import estimate_offset, grid_qp, turbo_decode
from mpcodes.polytope import decompose, project_capped_sum, project_capped_sum_sorted, project_simplex
from mpcodes.ranking import rank_mp, unrank_mp
from mpcodes.sim import config_from_items, simulate, wilson_interval

import conftest
from oracles import bisect_projection, grid_ls_active_set


def report(capsys, k, checks: dict, note: str = ""):
    ok = all(checks.values())
    failed = [name for name, v in checks.items() if not v]
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}"
    if failed:
        line += " [failed: " + "; ".join(failed) + "]"
    if note:
        line += f" ({note})"
    conftest.ACCEPTANCE.append(line)
    with capsys.disabled():
        print("\n" + line)
    return ok


def _timed(f):
    t0 = time.perf_counter()
    out = f()
    return out, time.perf_counter() - t0


def _best_time(f, reps=5):
    best = np.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        f()
        best = min(best, time.perf_counter() - t0)
    return best


ST236 = StCodeParams(2, 3, 6)


# 1 ------------------------------------------------------------------ ranking


def test_criterion_1_ranking_bijection(capsys):
    def run():
        res = {}
        for r, N in [((2, 2, 2), 90), ((1, 2, 1), 12), ((1, 1, 1, 1), 24)]:
            mult = MultiplicityVector(r)
            words = [unrank_mp(k, mult) for k in range(N)]
            ranks = [rank_mp(w) for w in words]
            res[f"r={r} bijection"] = mult.size == N and ranks == list(range(N)) and len({w.x for w in words}) == N
        mult = MultiplicityVector((2, 2, 2))
        res["rank(3,3,2,1,1,2)=84"] = rank_mp(Multipermutation((3, 3, 2, 1, 1, 2), mult)) == 84
        res["unrank(84)"] = unrank_mp(84, mult).x == (3, 3, 2, 1, 1, 2)
        return res

    checks, dt = _timed(run)
    checks["runtime < 1 s"] = dt < 1.0
    assert report(capsys, 1, checks, f"{dt:.3f} s")


# 2 ------------------------------------------------------------------ ST encoding


def test_criterion_2_st_encoding(capsys):
    def run():
        p = ST236
        res = {"encode(137)": encode_st(137, p).x == (1, 5, 6, 4, 2, 6, 4, 5, 3, 1, 2, 3)}
        res["decode o encode = id"] = all(decode_st(encode_st(k, p), p) == k for k in range(216))
        book = enumerate_codebook(st_constraints(p))
        res["216 codewords"] = len(book) == 216 and len(set(book)) == 216
        W = np.array([X.symbols().x for X in book])
        res["min distance 3"] = min_chebyshev_distance(W) == 3
        return res

    checks, dt = _timed(run)
    checks["runtime < 5 s"] = dt < 5.0
    assert report(capsys, 2, checks, f"{dt:.3f} s")


# 3 ------------------------------------------------------------------ derangement


def test_criterion_3_derangement_codebook(capsys):
    listed = {
        (3, 3, 1, 1, 2, 2), (2, 2, 3, 3, 1, 1), (2, 3, 1, 3, 2, 1), (2, 3, 1, 3, 1, 2), (2, 3, 3, 1, 2, 1),
        (2, 3, 3, 1, 1, 2), (3, 2, 1, 3, 2, 1), (3, 2, 1, 3, 1, 2), (3, 2, 3, 1, 2, 1), (3, 2, 3, 1, 1, 2),
    }
    got = {X.symbols().x for X in enumerate_codebook(derangement_constraints(MultiplicityVector((2, 2, 2))))}
    assert report(capsys, 3, {"codebook equals the 10 listed words": got == listed}, f"{len(got)} codewords")


# 4 ------------------------------------------------------------------ projections


def test_criterion_4_projections(capsys):
    rng = np.random.default_rng(4)
    N = 10_000
    err_s = err_c = 0.0
    idem = nonexp = True
    for _ in range(N):
        n = int(rng.integers(1, 40))
        v = rng.normal(size=n) * rng.choice([0.3, 1.0, 5.0])
        err_s = max(err_s, np.abs(project_simplex(v) - bisect_projection(v, 1.0, np.inf)[0]).max())
        r = rng.uniform(0, n)
        x = project_capped_sum(v, r)
        err_c = max(err_c, np.abs(x - bisect_projection(v, r)[0]).max())
        idem &= bool(np.abs(project_capped_sum(x, r) - x).max() <= 1e-9)
        u = v + rng.normal(size=n)
        nonexp &= bool(np.linalg.norm(project_capped_sum(u, r) - x) <= np.linalg.norm(u - v) + 1e-9)
        ps = project_simplex(v)
        idem &= bool(np.abs(project_simplex(ps) - ps).max() <= 1e-9)
        nonexp &= bool(np.linalg.norm(project_simplex(u) - ps) <= np.linalg.norm(u - v) + 1e-9)
    v = rng.normal(size=100_000) * 2
    r = 100_000 / 3
    t_med = _best_time(lambda: project_capped_sum(v, r), 7)
    t_sort = _best_time(lambda: project_capped_sum_sorted(v, r), 7)
    checks = {
        "simplex vs KKT oracle <= 1e-9": err_s <= 1e-9,
        "capped vs KKT oracle <= 1e-9": err_c <= 1e-9,
        "idempotent": idem,
        "non-expansive": nonexp,
        "(2,2,-1), r=2 -> (1,1,0)": np.abs(project_capped_sum([2, 2, -1], 2) - [1, 1, 0]).max() <= 1e-9,
        "median >= 1.5x faster than sort at n=1e5": t_sort / t_med >= 1.5,
    }
    note = f"max err simplex {err_s:.1e}, capped {err_c:.1e}; speedup {t_sort / t_med:.2f}x"
    assert report(capsys, 4, checks, note)


# 5 ------------------------------------------------------------------ decomposition


def test_criterion_5_convex_hull(capsys):
    rng = np.random.default_rng(5)
    worst_rec = worst_w = 0.0
    valid = True
    for r in [(2, 2, 2), (1, 2, 1)]:
        mult = MultiplicityVector(r)
        for _ in range(100):
            k = int(rng.integers(1, 10))
            w = rng.dirichlet(np.ones(k))
            Z = sum(a * to_matrix(unrank_mp(int(rng.integers(mult.size)), mult)).X for a in w)
            terms = decompose(Z, mult)
            worst_rec = max(worst_rec, np.abs(sum(a * X.X for a, X in terms) - Z).max())
            worst_w = max(worst_w, abs(sum(a for a, _ in terms) - 1.0))
            # the constructor validates binary entries, row sums r and unit column sums
            valid &= all(X.mult == mult and a >= 0 for a, X in terms)
    checks = {
        "reconstruction <= 1e-9": worst_rec <= 1e-9,
        "weights sum to 1 within 1e-12": worst_w <= 1e-12,
        "every term a valid multipermutation matrix": valid,
    }
    assert report(capsys, 5, checks, f"max residual {worst_rec:.1e}, weight error {worst_w:.1e}")


# 6 ------------------------------------------------------------------ ML certificate


def _awgn_batch(p, t, ch, seed, k, start, stop):
    X, Y = [], []
    for i in range(start, stop):
        rng = trial_rng(seed, k, i)
        x = np.asarray(encode_st(random_message(p, rng), p).x)
        X.append(x)
        Y.append(transmit(t.array()[x - 1], ch, rng))
    return np.asarray(X), np.asarray(Y)


def test_criterion_6_ml_certificate(capsys):
    p = ST236
    c = st_constraints(p)
    g = build_graph(c)
    t = InitialVector.natural(p.m)
    W = codebook_array(enumerate_words(c))
    trials = 10_000
    checks, notes = {}, []
    for k, snr in enumerate([6.0, 8.0, 10.0]):
        ch = ChannelSpec.awgn(snr_to_sigma(snr))
        mismatches = admm_err = ml_err = integral = 0
        for start in range(0, trials, 1000):
            X, Y = _awgn_batch(p, t, ch, 606, k, start, start + 1000)
            G = np.stack([llr(y, t, ch).G for y in Y])
            ml = W[np.argmin(ml_costs(G, W), axis=1)]
            for b, res in enumerate(admm_decode_batch(G, g, c)):
                if res.integral:
                    integral += 1
                    mismatches += tuple(ml[b]) != res.rounded
                admm_err += tuple(X[b]) != res.rounded
            ml_err += int(np.any(ml != X, axis=1).sum())
        a, m = wilson_interval(admm_err, trials), wilson_interval(ml_err, trials)
        checks[f"{snr:g} dB integral ADMM == ML"] = mismatches == 0
        checks[f"{snr:g} dB Wilson intervals overlap"] = a[0] <= m[1] and m[0] <= a[1]
        notes.append(f"{snr:g} dB: ADMM {admm_err}/{trials}, ML {ml_err}/{trials}, integral {integral}")
    assert report(capsys, 6, checks, "; ".join(notes))


# 7 ------------------------------------------------------------------ decoder ordering


def test_criterion_7_decoder_ordering(capsys):
    t0 = time.perf_counter()
    items = {
        "decoders": "admm,ml,bdd,cheb-lp-soft,cheb-lp-hard",
        "r": "2", "d": "3", "m": "6", "snr_db": "5",
        "target_errors": "100", "max_trials": "400000", "seed": "707", "batch": "1000",
    }
    res = {r.decoder: r for r in simulate(config_from_items([(k, v, "acceptance") for k, v in items.items()]))}
    ci = {d: wilson_interval(r.word_errors, r.trials) for d, r in res.items()}
    wer = {d: r.wer for d, r in res.items()}
    bdd = ci["bdd"]

    def between(d):
        inside = wer["ml"] <= wer[d] <= wer["bdd"]
        overlap = ci[d][0] <= bdd[1] and bdd[0] <= ci[d][1]
        return inside or overlap

    checks = {
        "BDD WER in [1e-3, 1e-1]": 1e-3 <= wer["bdd"] <= 1e-1,
        ">= 100 errors per decoder": all(r.word_errors >= 100 for r in res.values()),
        "ADMM < BDD, disjoint intervals": wer["admm"] < wer["bdd"] and ci["admm"][1] < bdd[0],
        "soft Chebyshev LP between ML and BDD": between("cheb-lp-soft"),
        "hard Chebyshev LP between ML and BDD": between("cheb-lp-hard"),
        "runtime < 30 min": time.perf_counter() - t0 < 1800,
    }
    note = "5 dB: " + ", ".join(f"{d} {res[d].word_errors}/{res[d].trials}" for d in res)
    assert report(capsys, 7, checks, note)


# 8 ------------------------------------------------------------------ Chebyshev LP


def test_criterion_8_chebyshev_lp(capsys):
    p = ST236
    c = st_constraints(p)
    g = build_graph(c)
    t = InitialVector.natural(p.m)
    words = enumerate_words(c)
    W = codebook_array(words).astype(float)
    exact = max(chebyshev_lp_decode(w.array().astype(float), c, t, "soft", g, "vertex").delta for w in words)
    rng = np.random.default_rng(8)
    worst = -np.inf
    for _ in range(1000):
        x = W[int(rng.integers(len(W)))]
        y = x + rng.normal(scale=rng.uniform(0.1, 1.0), size=p.n)
        delta = chebyshev_lp_decode(y, c, t, "soft", g, "vertex").delta
        nearest = np.abs(W - y).max(axis=1).min()
        worst = max(worst, delta - nearest)
    checks = {
        "delta* = 0 on every codeword": exact <= 1e-9,
        "delta* <= nearest-codeword distance (1000 instances)": worst <= 1e-9,
    }
    assert report(capsys, 8, checks, f"max delta* on codewords {exact:.1e}, max(delta* - d_min) {worst:.3f}")


# 9 ------------------------------------------------------------------ ensemble


def test_criterion_9_ensemble(capsys):
    checks = {}
    p = EnsembleParams(MultiplicityVector((1, 2, 1)), "zeros", 2)
    checks["r=(1,2,1), kappa=2: formula = exhaustive = 56/11"] = (
        expected_cardinality(p) == exhaustive_average_cardinality(p) == Fraction(56, 11)
    )
    notes = []
    mult = MultiplicityVector((2, 2, 2))
    for kappa in (5, 10, 20):
        try:
            q = EnsembleParams(mult, "zeros", kappa, seed=900 + kappa)
        except ValueError as exc:
            checks[f"kappa={kappa} Monte Carlo"] = False
            notes.append(f"kappa={kappa}: {exc}")
            continue
        mean, se = monte_carlo_cardinality(q, 1000)
        exact = float(expected_cardinality(q))
        checks[f"kappa={kappa} Monte Carlo within 4 SE"] = abs(mean - exact) <= 4 * se
        notes.append(f"kappa={kappa}: MC {mean:.3f}+-{se:.3f} vs {exact:.3f}")
    b = EnsembleParams(MultiplicityVector.regular(2, 6), "zeros", 30, seed=909)
    lo, hi = ball_size_bounds(2, 6, 1, b)
    mean, se = monte_carlo_ball(b, 1, 200)
    checks["ball bounds bracket Monte Carlo E[L_d] (r=2, m=6, d=1)"] = lo <= mean <= hi
    notes.append(f"ball: {lo:.2f} <= {mean:.2f} <= {hi:.2f}")
    cst = [row[1] for row in scaling_report(3, 5, range(2, 11))]
    checks["C_ST = 18.9405 +- 1e-3, d=2..10"] = all(abs(v - 18.9405) <= 1e-3 for v in cst)
    line_ok = report(capsys, 9, checks, "; ".join(notes))
    attainable = {k: v for k, v in checks.items() if not k.startswith("kappa=20")}
    assert all(attainable.values()), line_ok


@pytest.mark.xfail(strict=True, raises=ValueError, reason="kappa=20 exceeds the 18 entries of a 3x6 matrix")
def test_criterion_9_kappa_20():
    p = EnsembleParams(MultiplicityVector((2, 2, 2)), "zeros", 20)
    mean, se = monte_carlo_cardinality(p, 1000)
    assert abs(mean - float(expected_cardinality(p))) <= 4 * se


# 10 ----------------------------------------------------------------- initial vector


def test_criterion_10_initial_vector(capsys):
    checks, notes = {}, []
    p = ST236
    eta = 0.731
    err = 0.0
    for w in enumerate_words(st_constraints(p)):
        y = 0.8 * w.array() + eta
        err = max(err, abs(estimate_offset(y, p.mult, 0.8) - eta))
    checks["estimate_offset exact on all ST(2,3,6) codewords"] = err <= 1e-12

    rng = np.random.default_rng(10)
    worst = 0.0
    for m in range(1, 6):
        mult = MultiplicityVector(tuple(int(v) for v in rng.integers(1, 4, size=m)))
        for _ in range(40):
            X = to_matrix(unrank_mp(int(rng.integers(mult.size)), mult)).X
            y = rng.uniform(-1, m + 2, size=mult.n)
            for largest in (True, False):
                if m == 1:
                    continue
                t = grid_qp(y, X, 0.9, largest_cell=largest).array()
                worst = max(worst, np.abs(t - grid_ls_active_set(y, X, 0.9, largest)).max())
    checks["grid_qp matches active-set oracle within 1e-8, m <= 5"] = worst <= 1e-8

    st = StCodeParams(3, 4, 16)
    c = st_constraints(st)
    g = build_graph(c)
    t_true = InitialVector.natural(16)
    snr, trials = 6.5, 1000
    ch = ChannelSpec.awgn(snr_to_sigma(snr))
    soft_err = turbo_err = 0
    for i in range(trials):
        rng = trial_rng(1010, 0, i)
        x = encode_st(random_message(st, rng), st).x
        y = transmit(t_true.array()[np.asarray(x) - 1], ch, rng)
        soft_err += chebyshev_lp_decode(y, c, t_true, "soft", g).rounded != x
        turbo_err += turbo_decode(y, c, 1.0, iters=1, g=g).result.rounded != x
    checks["turbo (1 iteration) WER <= 2x true-t soft WER"] = turbo_err <= 2 * soft_err
    notes.append(f"ST(3,4,16) {snr} dB, {trials} paired trials: soft {soft_err}, turbo {turbo_err}")
    notes.append(f"grid_qp max error {worst:.1e}")
    assert report(capsys, 10, checks, "; ".join(notes))


# 11 ----------------------------------------------------------------- scaling


def test_criterion_11_scaling(capsys):
    admm_times = []
    opts = AdmmOptions(max_iter=30, eps=0.0)
    sizes = [(r, 16) for r in (8, 16, 32, 64)]  # mn doubles with r
    for r, m in sizes:
        st = StCodeParams(r, 2, m)
        g = build_graph(st_constraints(st))
        gam = np.random.default_rng(11).normal(size=(1, g.n_vars))
        admm_times.append(_best_time(lambda: admm_iterate(gam, g, opts), 5) / opts.max_iter)
    proj_times = []
    for n in (100_000, 200_000, 400_000, 800_000):
        v = np.random.default_rng(n).normal(size=n) * 2
        proj_times.append(_best_time(lambda: project_capped_sum(v, n / 3), 7))
    ra = [b / a for a, b in zip(admm_times, admm_times[1:])]
    rp = [b / a for a, b in zip(proj_times, proj_times[1:])]
    checks = {
        "ADMM per-iteration ratio <= 2.5 per doubling": max(ra) <= 2.5,
        "project_capped_sum ratio <= 2.5 per doubling": max(rp) <= 2.5,
    }
    note = "ADMM ratios " + ",".join(f"{x:.2f}" for x in ra) + "; projection ratios " + ",".join(f"{x:.2f}" for x in rp)
    assert report(capsys, 11, checks, note)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
