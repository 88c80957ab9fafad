"""Log-log slopes of G_0 on anti-trees against the predicted exponent.

Prints one CSV row per (p, gamma): fitted slope on [lo, hi], the predicted
-(2 gamma - p + 1)/(p - 1), and the relative gap.
"""

import argparse
import csv
import sys

import numpy as np

from plandis.model import antitree_spec, green0_profile, is_subcritical


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, nargs="+", default=[1.5, 2.0, 3.0])
    ap.add_argument("--gamma", type=float, nargs="+", default=[1.0, 2.0])
    ap.add_argument("--lo", type=int, default=10)
    ap.add_argument("--hi", type=int, default=40)
    ap.add_argument("--R", type=int, default=400)
    args = ap.parse_args(argv)

    out = csv.writer(sys.stdout)
    out.writerow(["p", "gamma", "lo", "hi", "slope", "predicted", "rel_gap"])
    r = np.arange(args.lo, args.hi + 1)
    for p in args.p:
        for gamma in args.gamma:
            spec = antitree_spec(gamma, args.R)
            if not is_subcritical(spec, p):
                out.writerow([p, gamma, args.lo, args.hi, "", "", "not subcritical"])
                continue
            G = green0_profile(spec, p).value
            slope = np.polyfit(np.log(r), np.log(G[r]), 1)[0]
            target = -(2 * gamma - p + 1) / (p - 1)
            out.writerow([p, gamma, args.lo, args.hi, f"{slope:.6f}", f"{target:.6f}",
                          f"{abs(slope / target - 1):.4f}"])


if __name__ == "__main__":
    main()
