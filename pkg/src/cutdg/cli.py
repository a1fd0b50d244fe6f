"""Batch CLI for the verification experiments."""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import harness


def _add_common(p):
    p.add_argument("--out", default="out", help="output directory")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cutdg",
        description="Stabilized cut-cell DG experiments for linear advection")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test1", help="small-cell eigenvalues and the "
                                     "trapezoidal overshoot snapshot")
    p.add_argument("--alpha", type=float, default=0.001)
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    _add_common(p)

    p = sub.add_parser("mp-convergence", help="1D convergence (Test 2) or "
                                              "TV series (Test 3)")
    p.add_argument("--test", type=int, choices=(2, 3), default=2)
    p.add_argument("--scenario", default="S2", choices=("S1", "S2", "S3",
                                                        "s1", "s2", "s3"))
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--N", type=int, default=20)
    p.add_argument("--levels", type=int, nargs="+",
                   default=[20, 40, 80, 160, 320])
    p.add_argument("--lambda", dest="lam", type=float, default=1.0 / 6.0)
    p.add_argument("--degree", type=int, choices=(0, 1), default=1)
    p.add_argument("--limiter", action="store_true")
    p.add_argument("--T", type=float, default=1.0)
    _add_common(p)

    p = sub.add_parser("eigen-sweep", help="spectrum of the stability "
                                           "operator over alpha and rho")
    p.add_argument("--alphas", type=float, nargs="+",
                   default=[0.5 ** i for i in range(1, 11)])
    p.add_argument("--rho", type=float, nargs="+", default=[0.5])
    p.add_argument("--N", type=int, default=5)
    _add_common(p)

    p = sub.add_parser("monotone-grid", help="B^-1 C positivity over the "
                                             "theta/lambda/alpha grid")
    p.add_argument("--alphas", type=float, nargs="+",
                   default=[0.5, 1e-2, 1e-8])
    _add_common(p)

    p = sub.add_parser("ramp-convergence", help="2D convergence study (Test 4)")
    p.add_argument("--gamma", type=float, default=30.0)
    p.add_argument("--beta", choices=("V", "C"), default="V")
    p.add_argument("--levels", type=int, nargs="+", default=[20, 40, 80, 160])
    p.add_argument("--degree", type=int, choices=(0, 1), default=1)
    p.add_argument("--T", type=float, default=0.5)
    _add_common(p)

    p = sub.add_parser("ramp-step", help="2D step transport (Test 5)")
    p.add_argument("--N", type=int, default=30)
    p.add_argument("--gamma", type=float, default=30.0)
    p.add_argument("--beta", choices=("V", "C"), default="V")
    p.add_argument("--degree", type=int, choices=(0, 1), default=0)
    p.add_argument("--limiter", action="store_true")
    p.add_argument("--T", type=float, default=0.4)
    _add_common(p)

    args = parser.parse_args(argv)
    os.makedirs(args.out, exist_ok=True)

    if args.command == "test1":
        cfg = harness.ExperimentConfig(test=1, alpha=args.alpha, lam=args.lam,
                                       out=args.out)
    elif args.command == "mp-convergence":
        cfg = harness.ExperimentConfig(
            test=args.test, scenario=args.scenario.upper(), alpha=args.alpha,
            seed=args.seed, N=args.N, levels=tuple(args.levels), lam=args.lam,
            degree=args.degree, limiter=args.limiter or args.test == 3,
            T=args.T, out=args.out)
    elif args.command == "eigen-sweep":
        cfg = None
        harness.ExperimentConfig(test=1, out=args.out).to_json(
            os.path.join(args.out, "config.json"))
        summary = harness.run_eigen_sweep(args.out, alphas=tuple(args.alphas),
                                          rhos=tuple(args.rho), N=args.N)
        print(f"wrote {len(summary['spectra'])} spectra to {args.out}/eigen.csv")
        return 0
    elif args.command == "monotone-grid":
        summary = harness.run_monotone_grid(args.out,
                                            alphas=tuple(args.alphas))
        print(json.dumps({"all_monotone": summary["all_monotone"],
                          "worst_entry": summary["worst_entry"]}))
        return 0 if summary["all_monotone"] else 1
    elif args.command == "ramp-convergence":
        cfg = harness.ExperimentConfig(test=4, gamma=args.gamma,
                                       beta_kind=args.beta,
                                       levels=tuple(args.levels),
                                       degree=args.degree, T=args.T,
                                       out=args.out)
    else:
        cfg = harness.ExperimentConfig(test=5, N=args.N, gamma=args.gamma,
                                       beta_kind=args.beta, degree=args.degree,
                                       limiter=args.limiter, T=args.T,
                                       out=args.out)

    summary = harness.run_test(cfg)
    printable = {k: v for k, v in summary.items()
                 if isinstance(v, (int, float, str, bool))}
    if "rates" in summary:
        printable["rates"] = summary["rates"]
    print(json.dumps(printable, indent=2, default=float))
    return 0


if __name__ == "__main__":
    sys.exit(main())
