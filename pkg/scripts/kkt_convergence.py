"""Finite-N simplex maximizers against N: objective, KKT residual and l1 distance to the geometric profile."""

import argparse
import csv
import sys

from gaussmax.kkt import geometric_l1_gap, kkt_residuals, maximize_simplex
from gaussmax.sobolev import SobolevPoint, thermal_reference
from gaussmax.serialize import fmt_float


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--z", type=float, default=0.25)
    ap.add_argument("--a", type=float, default=0.5)
    ap.add_argument("--dims", default="2,4,8,12,16,24,32,48")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args()
    pt = SobolevPoint(args.z, args.a)
    ref = thermal_reference(pt)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["N", "objective", "reference_minus_objective", "max_interior_residual", "boundary_residual",
                "w0", "xi", "geometric_l1_gap", "n_local_maxima"])
    for N in (int(s) for s in args.dims.split(",")):
        sp = maximize_simplex(pt, N, seed=args.seed)
        rep = kkt_residuals(sp, pt)
        w.writerow([N, fmt_float(sp.objective), fmt_float(ref - sp.objective), fmt_float(rep.max_residual),
                    fmt_float(rep.boundary_residual), fmt_float(rep.w[0]), fmt_float(pt.xi),
                    fmt_float(geometric_l1_gap(sp, pt.xi)), len(sp.local_maxima)])
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
