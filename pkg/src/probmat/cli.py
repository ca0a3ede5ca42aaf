"""Command-line entry point: ``probmat <subcommand> ...``.

Exit codes: 0 success, 2 configuration/usage error, 3 sweep finished with
failed cells.
"""
import argparse
import csv
import json
import sys
import warnings

import numpy as np

from probmat import io, lowerbound
from probmat.estimator import EstimatorParams, baseline_naive, baseline_scaled, l1_error, recover
from probmat.harness import ConfigError, emit_plot_data, load_config, run_sweep
from probmat.hmm import emission_error, hmm_learn
from probmat.models import (
    HmmModel,
    generate_sbm_model,
    generate_topic_model,
    hmm_sample_sequence,
    sample_batches,
    uniform_disjoint_hmm,
)
from probmat.spectral import spectral_norm

EXIT_CONFIG = 2
EXIT_PARTIAL = 3


def _emit(doc, out=None):
    text = json.dumps(doc, indent=1, default=io._jsonable)
    if out:
        with open(out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)


def cmd_generate(args):
    if args.family == "sbm":
        io.save_model(args.out, generate_sbm_model(args.M, args.R, args.alpha, args.beta))
    elif args.family == "topic":
        mixing = args.mixing or [1.0 / args.R] * args.R
        io.save_model(args.out, generate_topic_model(args.M, args.R, mixing, args.concentration, args.seed))
    else:
        h = uniform_disjoint_hmm(args.M, args.t)
        io.save_hmm(args.out, h)
    return 0


def cmd_sample(args):
    if args.hmm:
        h = io.load_hmm(args.hmm)
        io.save_sequence(args.out, hmm_sample_sequence(h, args.length, args.seed))
        return 0
    model = io.load_model(args.model)
    for C in sample_batches(model, args.N, args.batches, args.scheme, args.seed):
        io.save_counts(f"{args.out}{C.batch_id}.coo", C)
    return 0


def _params(args):
    return EstimatorParams(R=args.R, eps=args.eps, w_min=args.wmin, c0=args.c0,
                           k0_override=args.k0, bin_prune_coeff=args.prune)


def _finish_estimate(args, est):
    io.save_estimate(args.out, est)
    report = dict(est.report)
    if args.truth:
        B = io.load_model(args.truth).B
        Bh = est.dense()
        report["metrics"] = {"l1": l1_error(Bh, B), "spec": spectral_norm(Bh - B)}
    if args.report:
        io.write_json(args.report, report)
    return 0


def cmd_estimate(args):
    counts = [io.load_counts(p) for p in args.counts]
    if len(counts) != 3:
        raise ConfigError("estimate needs exactly three count batches")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        est = recover(*counts, _params(args))
    return _finish_estimate(args, est)


def cmd_baseline(args):
    counts = [io.load_counts(p) for p in args.counts]
    if args.method == "naive":
        est = baseline_naive(counts[0], args.R)
    else:
        if len(counts) < 2:
            raise ConfigError("the scaled baseline needs two count batches")
        est = baseline_scaled(counts[0], counts[1], args.R)
    return _finish_estimate(args, est)


def cmd_hmm_learn(args):
    seq = io.load_sequence(args.sequence)
    params = EstimatorParams(R=2, eps=args.eps, w_min=args.wmin, c0=args.c0,
                             k0_override=args.k0, bin_prune_coeff=args.prune)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        est = hmm_learn(seq, args.M, params)
    doc = {
        "status": est.status,
        "t_hat": est.t_hat,
        "p_hat": est.p_hat,
        "q_hat": est.q_hat,
        "delta_hat": est.delta_hat,
        "anchor_set": est.anchor_set,
        "rho_hat": est.rho_hat,
    }
    io.write_json(args.out, doc)
    if args.truth:
        h = io.load_hmm(args.truth)
        metrics = {"status": est.status}
        if est.ok:
            metrics.update(t_error=abs(est.t_hat - h.t),
                           emission_l1=emission_error(est.p_hat, est.q_hat, h.p, h.q))
        _emit(metrics, args.metrics)
    return 0


def cmd_lb(args):
    if args.lb_cmd == "bound":
        _emit({"c": args.c, "tv_bound": lowerbound.tv_bound(args.c),
               "variance_bound": lowerbound.variance_bound(args.c)}, args.out)
    elif args.lb_cmd == "oracle":
        rows = []
        for a in range(args.n // 2 + 1):
            p = 2 * a / args.n
            rows.append({
                "a": a, "p": p,
                "closed_form": lowerbound.r_closed_form(p, args.k, args.n),
                "recurrence": lowerbound.r_recurrence(p, args.k, args.n),
                "bruteforce": lowerbound.r_bruteforce(a, args.k, args.n),
            })
        out = open(args.out, "w", newline="") if args.out else sys.stdout
        w = csv.DictWriter(out, fieldnames=list(rows[0]))
        w.writeheader()
        for row in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
        if args.out:
            out.close()
    elif args.lb_cmd == "variance":
        k = args.k if args.k is not None else int(np.floor(args.c * args.n))
        doc = {"n": args.n, "k": k, "E_Y2": lowerbound.variance_sum(args.n, k)}
        if args.c is not None:
            doc["bound"] = lowerbound.variance_bound(args.c)
        _emit(doc, args.out)
    else:
        s = lowerbound.sample_Yn(args.n, args.k, args.trials, args.seed)
        lo, hi = s.mean_ci()
        _emit({"n": s.n, "k": s.k, "trials": s.trials, "mean": s.mean, "mean_ci3": [lo, hi],
               "var": s.var, "var_se": s.var_se,
               "var_exact": lowerbound.variance_sum(s.n, s.k) - 1.0}, args.out)
    return 0


def cmd_bench(args):
    config = load_config(args.config)
    config.out_csv = args.out
    if args.summary:
        config.out_summary = args.summary
    result = run_sweep(config)
    if args.plot_data:
        emit_plot_data(result, args.plot_data)
    return EXIT_PARTIAL if result.failed else 0


def _add_estimator_args(p, counts=True):
    if counts:
        p.add_argument("--counts", nargs="+", required=True)
        p.add_argument("--R", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--wmin", type=float, default=None)
    p.add_argument("--c0", type=float, default=1.0)
    p.add_argument("--k0", type=int, default=None)
    p.add_argument("--prune", type=float, default=20.0, help="bin pruning coefficient")


def build_parser():
    parser = argparse.ArgumentParser(prog="probmat")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("generate", help="write a ground-truth model")
    p.add_argument("--family", choices=["sbm", "topic", "hmm"], required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--R", type=int, default=2)
    p.add_argument("--alpha", type=float, default=4.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--mixing", type=float, nargs="+")
    p.add_argument("--concentration", type=float, default=1.0)
    p.add_argument("--t", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sample", help="sample count batches or an HMM sequence")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model")
    src.add_argument("--hmm")
    p.add_argument("--N", type=int, default=1000)
    p.add_argument("--length", type=int, default=1000)
    p.add_argument("--scheme", choices=["poisson", "multinomial"], default="poisson")
    p.add_argument("--batches", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="file for sequences, prefix for count batches")
    p.set_defaults(func=cmd_sample)

    for name, func in (("estimate", cmd_estimate), ("baseline", cmd_baseline)):
        p = sub.add_parser(name)
        _add_estimator_args(p)
        if name == "baseline":
            p.add_argument("--method", choices=["naive", "scaled"], default="naive")
        p.add_argument("--out", required=True)
        p.add_argument("--report")
        p.add_argument("--truth")
        p.set_defaults(func=func)

    p = sub.add_parser("hmm-learn")
    p.add_argument("--sequence", required=True)
    p.add_argument("--M", type=int, required=True)
    _add_estimator_args(p, counts=False)
    p.set_defaults(wmin=0.5, k0=0)
    p.add_argument("--out", required=True)
    p.add_argument("--truth")
    p.add_argument("--metrics")
    p.set_defaults(func=cmd_hmm_learn)

    p = sub.add_parser("lb", help="lower-bound numerics")
    lb = p.add_subparsers(dest="lb_cmd", required=True)
    q = lb.add_parser("bound")
    q.add_argument("--c", type=float, required=True)
    q = lb.add_parser("oracle")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--k", type=int, required=True)
    q = lb.add_parser("variance")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--c", type=float)
    q.add_argument("--k", type=int)
    q = lb.add_parser("mc")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--trials", type=int, default=10_000)
    q.add_argument("--seed", type=int, default=0)
    for q in lb.choices.values():
        q.add_argument("--out")
    p.set_defaults(func=cmd_lb)

    p = sub.add_parser("bench", help="run a sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--summary")
    p.add_argument("--plot-data")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.cmd == "lb" and args.lb_cmd == "variance" and args.c is None and args.k is None:
        print("lb variance needs --c or --k", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
