#!/usr/bin/env python3
"""Run every applicable named check over the standard model zoo.

Writes one JSON report per (model, check) under --out and prints a summary
table; exits nonzero if anything fails.
"""
import argparse
import sys

from fluxlab import cli

ZOO = [
    ("maxwell", "interval", 6),
    ("maxwell", "disk", 1),
    ("ym_su2", "interval", 4),
    ("ym_su2", "disk", 1),
    ("theta_ym", "disk", 1),
    ("chern_simons_disk", "disk", 2),
]

ELECTRIC_ONLY = {"hodge_split", "constraint_ideal", "kernel_identification",
                 "second_stage", "faddeev_popov"}
ABELIAN_ELECTRIC_ONLY = {"gauss_law"}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/checks")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    failures = 0
    for name, mesh, n in ZOO:
        suite = []
        for check in sorted(cli.CHECKS):
            if check in ELECTRIC_ONLY and name == "chern_simons_disk":
                continue
            if check in ABELIAN_ELECTRIC_ONLY and name != "maxwell":
                continue
            if check == "theta" and name != "theta_ym":
                continue
            suite.append(check)
        argv = ["run", "--model", name, "--mesh", mesh, "--mesh-parameter", str(n),
                "--seed", str(args.seed), "--out", f"{args.out}/{name}_{mesh}{n}",
                "--suite", *suite]
        if name == "theta_ym":
            argv += ["--theta", "1.3"]
        print(f"== {name} on {mesh}({n})")
        code = cli.main(argv)
        failures += int(code != 0)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
