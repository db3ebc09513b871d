#!/usr/bin/env python3
"""Sector census across the shipped models.

Samples on-shell configurations, labels their flux orbits (pointwise Casimirs
of the boundary electric trace; boundary holonomy for connection models), and
writes one JSON census per model.  The Abelian disk realizes one continuous
family constrained by the vanishing net flux; a disk of flat connections
realizes a single sector.
"""
import argparse
import sys

from fluxlab import cli


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/census")
    ap.add_argument("--samples", type=int, default=40)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rc = 0
    for name, mesh, n in (("maxwell", "disk", 1), ("maxwell", "annulus", 2),
                          ("ym_su2", "disk", 1), ("chern_simons_disk", "disk", 2)):
        rc |= cli.main(["census", "--model", name, "--mesh", mesh,
                        "--mesh-parameter", str(n), "--samples", str(args.samples),
                        "--seed", str(args.seed), "--out", f"{args.out}/{name}_{mesh}{n}"])
    return rc


if __name__ == "__main__":
    sys.exit(main())
