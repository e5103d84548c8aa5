"""Counting SP estimate versus exhaustive fixed-point count on small CNFs.

Trees must agree exactly (one fixed point).  On loopy formulas the survey
integral is only an estimate; the table shows how far off it is.
"""

import argparse
import random

from semiring_gm.factor_graph import is_tree
from semiring_gm.generators import random_ksat
from semiring_gm.oracle import encode_cnf
from semiring_gm.sp import enumerate_bp_fixed_points, run_sp, sp_integral


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instances", type=int, default=20)
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--m", type=int, default=4)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    print(f"{'#':>3} {'tree':>5} {'exact':>6} {'estimate':>10} {'converged':>9}")
    for t in range(args.instances):
        fg = encode_cnf(random_ksat(rng, args.n, args.m, args.k), n_vars=args.n)
        exact = len(enumerate_bp_fixed_points(fg, "or-and"))
        state, rep = run_sp(fg, "or-and", compress=False, max_iter=500, seed=t)
        est = sp_integral(state)
        print(f"{t:>3} {str(is_tree(fg)):>5} {exact:>6} {float(est.value):>10.4g} {str(rep.converged):>9}")


if __name__ == "__main__":
    main()
