"""Landis verdicts on d-regular trees for u = d^{-2|x|} and u = beta^{|x|}.

One CSV row per (p, d, u) with the verdict and each condition flag, from
both the tree checker and the general checker run on the radial quotient.
"""

import argparse
import csv
import sys

import numpy as np

from plandis.criticality import hardy_weight
from plandis.landis import landis_check_general, landis_check_tree
from plandis.model import green0_profile, radial_graph, tree_spec
from plandis.operators import SchrodingerOperator
from plandis.solvers import ball_green, tree_beta


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, nargs="+", default=[1.5, 2.0, 3.0])
    ap.add_argument("--d", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--R", type=int, default=30)
    args = ap.parse_args(argv)

    out = csv.writer(sys.stdout)
    out.writerow(["p", "d", "u", "tree_verdict", "growth", "gradient", "decay",
                  "general_verdict"])
    for p in args.p:
        for d in args.d:
            spec = tree_spec(d, args.R)
            g = radial_graph(spec)
            beta = tree_beta(p, d)
            G1 = ball_green(g, p, 1.0).u
            pkg = hardy_weight(g, p, green0_profile(spec, p).value)
            H = SchrodingerOperator(g, p, np.ones(g.n))
            region = [x for x in g.interior if x != g.root]
            r = g.depth.astype(float)
            for name, u, harmonic in (("d^(-2|x|)", float(d) ** (-2 * r), False),
                                      ("beta^|x|", beta ** r, True)):
                tree = landis_check_tree(p, d, u)
                general = landis_check_general(H, u, pkg, G1,
                                               range(args.R // 2, args.R), region,
                                               check_harmonic=harmonic)
                flags = [tree.conditions[k].flag for k in ("growth", "gradient", "decay")]
                out.writerow([p, d, name, tree.verdict, *flags, general.verdict])


if __name__ == "__main__":
    main()
