"""Thermal-scan p->q norms over a (channel, p, q) grid, with a brute-force check column.

    python3 scripts/norm_table.py --out norms.csv [--brute-dim 16]
"""

import argparse
import csv
import sys

from gaussmax import ChannelSpec, brute_force_ratio, norm
from gaussmax.serialize import fmt_float

CHANNELS = [ChannelSpec.attenuator(l) for l in (0.2, 0.4, 0.6, 0.8)] + [ChannelSpec.amplifier(k) for k in (1.5, 2.0, 4.0)]
EXPONENTS = [(1.2, 2.0), (1.5, 2.5), (2.0, 3.0), (2.0, 2.0), (3.0, 1.5)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out")
    ap.add_argument("--brute-dim", type=int, default=0, help="0 disables the brute-force column")
    args = ap.parse_args()
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["kind", "lambda", "kappa", "p", "q", "method", "z_star", "value", "brute_value"])
    for spec in CHANNELS:
        for p, q in EXPONENTS:
            r = norm(spec, p, q)
            b = ""
            if args.brute_dim and not r.infinite:
                b = fmt_float(brute_force_ratio(spec, p, q, args.brute_dim, n_starts=8).value)
            z = "" if r.z_star is None else fmt_float(r.z_star)
            w.writerow([spec.kind, spec.lam, spec.kappa, p, q, r.method, z, fmt_float(r.value), b])
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
