"""Command-line front end.

    rnsens mean  --model bd.json --t 1 --samples 100000 --seed 7
    rnsens sens1 --model bd.json --t 1 --param 1
    rnsens sens2 --model bd.json --t 1 --pi 0 --pj 1 -c 1
    rnsens fd2   --model bd.json --t 1 --pi 0 --pj 1 --eps 0.1
    rnsens oracle --x0 0 --th1 10 --th2 1 --t 1 --wrt th1,th2

Parameters are addressed by zero-based position in the model file.
Every command prints a single flat record (JSON or CSV) on stdout.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys

from . import backend, oracle
from .errors import ModelError, SampleError
from .estimators import (EstimatorConfig, FDSecondOrderSampler, FirstOrderSampler,
                         MeanSampler, SecondOrderSampler)
from .model import Model, load_model
from .montecarlo import run_estimator

log = logging.getLogger("rnsens")


def parse_model(path) -> Model:
    return load_model(path)


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _samples(text):
    v = int(text)
    if v < 2:
        raise argparse.ArgumentTypeError("--samples must be at least 2 (variance needs n >= 2)")
    return v


def _seed(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("--seed must be an unsigned 64-bit integer")
    return v


def _shared(p):
    p.add_argument("--model", required=True, help="model file (JSON)")
    p.add_argument("--t", type=float, required=True, help="time horizon")
    p.add_argument("--samples", type=_samples, default=10000)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--backend", choices=("auto", "cython", "python"), default="auto")


def build_parser():
    parser = argparse.ArgumentParser(prog="rnsens", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _shared(sub.add_parser("mean", help="plain SSA estimate of E f(X(t))"))

    p = sub.add_parser("sens1", help="first-order sensitivity (Poisson path estimator)")
    _shared(p)
    p.add_argument("--param", type=int, required=True)
    p.add_argument("-c", type=float, default=1.0)

    p = sub.add_parser("sens2", help="unbiased second-order sensitivity")
    _shared(p)
    p.add_argument("--pi", type=int, required=True)
    p.add_argument("--pj", type=int, required=True)
    p.add_argument("-c", type=float, default=1.0)

    p = sub.add_parser("fd2", help="finite-difference second-order baseline")
    _shared(p)
    p.add_argument("--pi", type=int, required=True)
    p.add_argument("--pj", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)

    p = sub.add_parser("oracle", help="closed-form birth-death mean and derivatives")
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--th1", type=float, required=True)
    p.add_argument("--th2", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--wrt", default="", help="comma-separated subset of th1,th2 (empty: mean)")
    p.add_argument("--eps", type=float, default=None,
                   help="evaluate the four-point finite difference instead (needs two names)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


def _emit(record, fmt, out):
    if fmt == "json":
        out.write(json.dumps(record) + "\n")
        return
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(record), lineterminator="\n")
    w.writeheader()
    w.writerow(record)
    out.write(buf.getvalue())


def _param(net, q, flag):
    if not 0 <= q < net.param_count:
        raise ModelError(f"{flag} {q} out of range; model has {net.param_count} parameters")
    return q


def _run_oracle(args):
    wrt = [w for w in args.wrt.split(",") if w]
    if args.eps is not None:
        if len(wrt) != 2:
            raise ValueError("--eps needs exactly two names in --wrt")
        idx = {"th1": 0, "th2": 1}
        value = oracle.fd_on_oracle(
            idx[wrt[0]], idx[wrt[1]], args.eps,
            lambda th: oracle.linear_bd_mean(args.x0, th[0], th[1], args.t),
            (args.th1, args.th2),
        )
    else:
        value = oracle.linear_bd_sens(args.x0, args.th1, args.th2, args.t, wrt)
    record = {"command": "oracle", "x0": args.x0, "th1": args.th1, "th2": args.th2,
              "t": args.t, "wrt": ",".join(wrt), "eps": args.eps, "value": value}
    return record


def run(args, out=None):
    out = sys.stdout if out is None else out
    if args.command == "oracle":
        _emit(_run_oracle(args), args.format, out)
        return 0
    model = parse_model(args.model)
    net, theta, x0, f = model.network, model.parameters, model.initial_state, model.output
    be = None if args.backend == "auto" else args.backend
    record = {"command": args.command, "model_path": args.model, "t": args.t}
    if args.command == "mean":
        sampler = MeanSampler(net, x0, f, theta, args.t, backend=be)
    elif args.command == "sens1":
        q = _param(net, args.param, "--param")
        record.update(c=args.c, param_i=q, param_i_name=net.param_names[q])
        sampler = FirstOrderSampler(net, x0, f, theta, q, args.t, args.c, backend=be)
    elif args.command == "sens2":
        i, j = _param(net, args.pi, "--pi"), _param(net, args.pj, "--pj")
        record.update(c=args.c, param_i=i, param_j=j,
                      param_i_name=net.param_names[i], param_j_name=net.param_names[j])
        cfg = EstimatorConfig(args.t, i, j, args.c, args.samples)
        sampler = SecondOrderSampler(net, x0, f, theta, cfg, backend=be)
    else:
        i, j = _param(net, args.pi, "--pi"), _param(net, args.pj, "--pj")
        record.update(eps=args.eps, param_i=i, param_j=j,
                      param_i_name=net.param_names[i], param_j_name=net.param_names[j])
        sampler = FDSecondOrderSampler(net, x0, f, theta, i, j, args.t, args.eps, backend=be)
    log.info("backend %s, %d samples", sampler.backend, args.samples)
    res = run_estimator(sampler, args.samples, args.seed, args.workers)
    record.update(
        n=res.n, seed=args.seed, mean=res.mean, variance=res.variance, stderr=res.stderr,
        ci_low=res.ci_low, ci_high=res.ci_high, wall_time_s=res.wall_time,
    )
    _emit(record, args.format, out)
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except (ModelError, SampleError, ValueError, OSError) as exc:
        print(f"rnsens: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
