"""Polar chart worked example: solve the transformation system for a few orders.

    python scripts/polar_example.py --r 2 --theta 1.0471975512
"""

import argparse
import math

from fracforms.coords import polar_example
from fracforms.errors import FracFormsError

KEYS = ("dx_dr", "dx_dtheta", "dy_dr", "dy_dtheta")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--r", type=float, default=2.0)
    ap.add_argument("--theta", type=float, default=math.pi / 3)
    ap.add_argument("--orders", default="-1,-0.5,0.5,1")
    args = ap.parse_args()

    print(f"{'order':>6} " + " ".join(f"{k:>14}" for k in KEYS) + f" {'residual':>10}")
    for nu in (float(s) for s in args.orders.split(",")):
        try:
            ex = polar_example(args.r, args.theta, nu)
        except FracFormsError as exc:
            print(f"{nu:>6g}  {type(exc).__name__}: {exc}")
            continue
        J = ex["J"]
        vals = (J[0][0], J[1][0], J[0][1], J[1][1])
        print(f"{nu:>6g} " + " ".join(f"{v:>14.10f}" for v in vals) + f" {ex['residual']:>10.1e}")
        for key, c in ex["comparison"].items():
            print(f"       {key:<10} computed {c['computed']:.6f}  printed {c['reference']:.6f}  delta {c['delta']:+.6f}")


if __name__ == "__main__":
    main()
