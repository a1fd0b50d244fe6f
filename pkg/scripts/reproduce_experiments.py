#!/usr/bin/env python3
"""Run the full experiment battery into out/ (one directory per test).

This is a thin wrapper over the CLI; pass --quick to shrink the convergence
studies for a fast smoke run.
"""
import argparse
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from cutdg.cli import main as cli  # noqa: E402


def run(args):
    print("+ cutdg " + " ".join(args))
    rc = cli(args)
    if rc != 0:
        raise SystemExit(rc)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out")
    ap.add_argument("--quick", action="store_true")
    ns = ap.parse_args()
    out = pathlib.Path(ns.out)
    levels_1d = ["20", "40", "80"] if ns.quick else ["20", "40", "80", "160", "320"]
    levels_2d = ["20", "40"] if ns.quick else ["20", "40", "80", "160"]

    run(["test1", "--out", str(out / "test1")])
    run(["eigen-sweep", "--out", str(out / "eigen_alpha")])
    run(["eigen-sweep", "--rho", "0.0", "0.25", "0.5", "0.75", "1.0",
         "--alphas", "0.01", "--out", str(out / "eigen_rho")])
    run(["monotone-grid", "--out", str(out / "monotone")])
    for scen in ("S1", "S2", "S3"):
        run(["mp-convergence", "--scenario", scen, "--levels", *levels_1d,
             "--out", str(out / f"test2_{scen.lower()}")])
    run(["mp-convergence", "--test", "3", "--out", str(out / "test3")])
    for gamma in ("15", "30", "45"):
        for beta in ("V", "C"):
            run(["ramp-convergence", "--gamma", gamma, "--beta", beta,
                 "--levels", *levels_2d,
                 "--out", str(out / f"test4_g{gamma}_{beta}")])
    run(["ramp-step", "--degree", "0", "--out", str(out / "test5_p0")])
    run(["ramp-step", "--degree", "1", "--limiter",
         "--out", str(out / "test5_p1")])


if __name__ == "__main__":
    main()
