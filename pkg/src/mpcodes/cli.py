"""Command-line front end.

Exit codes: 0 success, 2 configuration / usage error, 3 decode failure.
"""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .channels import ChannelSpec, llr, quantize_rank, snr_to_sigma, transmit, trial_rng
from .codes import (
    StCodeParams,
    bounded_distance_decode,
    decode_st,
    derangement_constraints,
    encode_st,
    enumerate_words,
    read_constraints,
    st_constraints,
    word_is_member,
)
from .core import InitialVector, Multipermutation, MultiplicityVector, format_list, parse_float_list, parse_int_list
from .decoders import admm_decode, build_graph, chebyshev_lp_decode, exhaustive_min_chebyshev, exhaustive_ml
from .ensemble import (
    EnsembleParams,
    ball_size_bounds,
    expected_cardinality,
    monte_carlo_ball,
    monte_carlo_cardinality,
    scaling_report,
)
from .polytope import project_capped_sum, project_simplex
from .ranking import rank_mp, unrank_mp
from .sim import KEYS, ConfigError, config_from_items, format_rows, read_config_items, simulate

EXIT_CONFIG = 2
EXIT_DECODE = 3


class UsageError(Exception):
    pass


def _add_code_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--code", choices=["st", "derangement", "custom"], default="st")
    p.add_argument("--r", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--mult", help="multiplicity vector, e.g. 2,2,2")
    p.add_argument("--zeros-file", help="constraint file for --code custom")


def _code(args):
    if args.code == "st":
        if None in (args.r, args.d, args.m):
            raise UsageError("st code needs --r, --d and --m")
        st = StCodeParams(args.r, args.d, args.m)
        return st_constraints(st), st
    if not args.mult:
        raise UsageError(f"{args.code} code needs --mult")
    mult = MultiplicityVector.parse(args.mult)
    if args.code == "derangement":
        return derangement_constraints(mult), None
    if not args.zeros_file:
        raise UsageError("custom code needs --zeros-file")
    return read_constraints(args.zeros_file, mult), None


def _st(args) -> StCodeParams:
    return StCodeParams(args.r, args.d, args.m)


def cmd_st_encode(args) -> int:
    print(encode_st(args.msg, _st(args)))
    return 0


def cmd_st_decode(args) -> int:
    try:
        print(decode_st(parse_int_list(args.word), _st(args)))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DECODE
    return 0


def cmd_rank(args) -> int:
    mult = MultiplicityVector.parse(args.mult)
    print(rank_mp(Multipermutation(parse_int_list(args.word), mult)))
    return 0


def cmd_unrank(args) -> int:
    print(unrank_mp(args.index, MultiplicityVector.parse(args.mult)))
    return 0


def cmd_project(args) -> int:
    v = np.asarray(parse_float_list(args.vec))
    if args.set == "simplex":
        x = project_simplex(v)
    else:
        if args.r is None:
            raise UsageError("--set capped needs --r")
        x = project_capped_sum(v, args.r, pivot_sample=args.pivot_sample)
    print(format_list(repr(float(a)) for a in x))
    return 0


def _channel(args) -> ChannelSpec:
    if args.channel == "qsc":
        if args.p is None:
            raise UsageError("qsc needs --p")
        return ChannelSpec.qsc(args.p)
    if (args.sigma is None) == (args.snr is None):
        raise UsageError("awgn needs exactly one of --sigma or --snr")
    return ChannelSpec.awgn(args.sigma if args.sigma is not None else snr_to_sigma(args.snr))


def cmd_decode(args) -> int:
    c, st = _code(args)
    mult = c.mult
    t = InitialVector(parse_float_list(args.t)) if args.t else InitialVector.natural(mult.m)
    needs_channel = args.received is None or args.decoder in ("admm", "ml")
    ch = _channel(args) if needs_channel else None
    sent = parse_int_list(args.word) if args.word else None
    if args.received:
        y = np.asarray(parse_float_list(args.received))
    elif sent is not None:
        y = transmit(t.array()[np.asarray(sent) - 1], ch, trial_rng(args.seed), t)
    else:
        raise UsageError("give --received, or --word to transmit it through the channel")
    if y.size != mult.n:
        raise UsageError(f"received word has length {y.size}, code has n={mult.n}")

    dec = args.decoder
    word, extra = None, ""
    if dec == "admm":
        if ch.kind == "awgn" and ch.sigma == 0:
            raise UsageError("ADMM needs sigma > 0")
        res = admm_decode(llr(y, t, ch), build_graph(c), c)
        word = res.rounded
        extra = f"status={res.status} integral={res.integral} iterations={res.iterations} objective={res.objective!r}"
    elif dec in ("ml", "min-dist"):
        words = enumerate_words(c)
        if dec == "ml":
            word = exhaustive_ml(llr(y, t, ch), words, mult).x
        else:
            word = exhaustive_min_chebyshev(quantize_rank(y, mult), words, t, mult).x
    elif dec in ("cheb-lp-soft", "cheb-lp-hard"):
        res = chebyshev_lp_decode(y, c, t, dec.rsplit("-", 1)[1])
        word = res.rounded or None
        extra = f"status={res.status} integral={res.integral} delta={res.delta!r}"
    elif dec == "bdd":
        if st is None:
            raise UsageError("bdd needs --code st")
        hit = bounded_distance_decode(quantize_rank(y, mult), st)
        word = hit.x if hit else None
    ok = word is not None
    if ok:
        try:
            ok = word_is_member(Multipermutation(tuple(word), mult), c)
        except ValueError:
            ok = False
    print(f"received {format_list(repr(float(v)) for v in y)}")
    if extra:
        print(extra)
    if not ok:
        print("decode failure" + (f": {format_list(word)}" if word else ""))
        return EXIT_DECODE
    print(f"decoded {format_list(word)}")
    if sent is not None:
        print("correct" if tuple(word) == tuple(sent) else "wrong")
    return 0


def cmd_simulate(args) -> int:
    items = read_config_items(args.config) if args.config else []
    for key in KEYS:
        val = getattr(args, f"opt_{key}", None)
        if val is not None:
            items.append((key, str(val), "--" + key.replace("_", "-")))
    cfg = config_from_items(items)
    text = format_rows(simulate(cfg), cfg.timing)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_ensemble(args) -> int:
    w = csv.writer(sys.stdout, lineterminator="\n")
    if args.scaling:
        lo, hi = (int(s) for s in args.d_range.split(":"))
        w.writerow(["d", "c_st", "c_r"])
        for d, cst, cr in scaling_report(args.r, args.ratio, range(lo, hi + 1)):
            w.writerow([d, repr(cst), repr(cr)])
        return 0
    if not args.mult or args.kind is None:
        raise UsageError("ensemble needs --kind and --mult (or --scaling)")
    mult = MultiplicityVector.parse(args.mult)
    count = args.kappa if args.kind == "zeros" else args.iota
    if count is None:
        raise UsageError("--kind zeros needs --kappa, --kind equalities needs --iota")
    p = EnsembleParams(mult, args.kind, count, args.seed)
    exact = expected_cardinality(p)
    mean, se = monte_carlo_cardinality(p, args.trials)
    header = ["kind", "mult", "count", "trials", "mc_mean", "mc_stderr", "analytic", "analytic_exact"]
    row = [args.kind, str(mult), count, args.trials, repr(mean), repr(se), repr(float(exact)), str(exact)]
    if args.ball_d is not None:
        if len(set(mult.r)) != 1:
            raise UsageError("ball statistics need an r-regular multiplicity vector")
        bm, bse = monte_carlo_ball(p, args.ball_d, args.trials)
        lo, hi = ball_size_bounds(mult.r[0], mult.m, args.ball_d, p)
        header += ["ball_d", "ball_mean", "ball_stderr", "ball_lower", "ball_upper"]
        row += [repr(args.ball_d), repr(bm), repr(bse), repr(lo), repr(hi)]
    w.writerow(header)
    w.writerow(row)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mpcodes", description="LP-decodable multipermutation codes")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("simulate", help="word-error-rate simulation, CSV output")
    p.add_argument("config", nargs="?", help="key = value config file")
    for key in KEYS:
        p.add_argument("--" + key.replace("_", "-"), dest=f"opt_{key}")
    p.add_argument("--decoder", dest="opt_decoders", help="alias of --decoders")
    p.add_argument("--snr", dest="opt_snr_db", help="alias of --snr-db")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("st-encode", help="message index -> ST codeword")
    for k in ("--r", "--d", "--m", "--msg"):
        p.add_argument(k, type=int, required=True)
    p.set_defaults(func=cmd_st_encode)

    p = sub.add_parser("st-decode", help="ST codeword -> message index")
    for k in ("--r", "--d", "--m"):
        p.add_argument(k, type=int, required=True)
    p.add_argument("--word", required=True)
    p.set_defaults(func=cmd_st_decode)

    p = sub.add_parser("rank", help="multipermutation -> index")
    p.add_argument("--mult", required=True)
    p.add_argument("--word", required=True)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("unrank", help="index -> multipermutation")
    p.add_argument("--mult", required=True)
    p.add_argument("--index", type=int, required=True)
    p.set_defaults(func=cmd_unrank)

    p = sub.add_parser("project", help="Euclidean projection onto the simplex or capped-sum set")
    p.add_argument("--set", choices=["simplex", "capped"], required=True)
    p.add_argument("--r", type=int)
    p.add_argument("--vec", required=True)
    p.add_argument("--pivot-sample", type=int)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("decode", help="decode one received word")
    p.add_argument("--decoder", required=True, choices=["admm", "ml", "min-dist", "cheb-lp-soft", "cheb-lp-hard", "bdd"])
    _add_code_args(p)
    p.add_argument("--channel", choices=["awgn", "qsc"], default="awgn")
    p.add_argument("--sigma", type=float)
    p.add_argument("--snr", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--t", help="initial vector, default 1..m")
    p.add_argument("--word", help="transmitted codeword (symbols)")
    p.add_argument("--received", help="channel output; drawn from --word when omitted")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("ensemble", help="random code ensemble statistics, CSV output")
    p.add_argument("--kind", choices=["zeros", "equalities"])
    p.add_argument("--mult")
    p.add_argument("--kappa", type=int)
    p.add_argument("--iota", type=int)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ball-d", type=float)
    p.add_argument("--scaling", action="store_true", help="print (d, C_ST, C_R) rows instead")
    p.add_argument("--r", type=int, default=3)
    p.add_argument("--ratio", type=int, default=5)
    p.add_argument("--d-range", default="2:10")
    p.set_defaults(func=cmd_ensemble)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
