"""Amplifier maximizer z_star as a function of p at fixed q, and the p values hitting a target z."""

import argparse
import csv
import sys

import numpy as np

from gaussmax.moe import find_p_for_z, z_star_of_p
from gaussmax.serialize import fmt_float


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--kappa", type=float, default=2.0)
    ap.add_argument("--q", type=float, default=1.3)
    ap.add_argument("--z", type=float, default=0.3, help="target thermal parameter, reported on stderr")
    ap.add_argument("--points", type=int, default=60)
    ap.add_argument("--out")
    args = ap.parse_args()
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["p", "z_star"])
    for p in 1.0 + (args.q - 1.0) * np.linspace(0.005, 0.995, args.points):
        w.writerow([fmt_float(p), fmt_float(z_star_of_p(args.kappa, float(p), args.q))])
    if args.out:
        fh.close()
    found, _ = find_p_for_z(args.kappa, args.z, args.q)
    print(f"p with z_star(p) = {args.z}: {found}", file=sys.stderr)


if __name__ == "__main__":
    main()
