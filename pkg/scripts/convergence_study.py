"""Error of both differintegral evaluators against the power rule as the grids refine.

    python scripts/convergence_study.py --p 0.5 --order -0.5 --x 1.5
"""

import argparse

from fracforms.differint import DifferintSpec, differint, power_rule_oracle


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=0.5)
    ap.add_argument("--order", type=float, default=-0.5)
    ap.add_argument("--x", type=float, default=1.5)
    args = ap.parse_args()

    f = f"x1^{args.p}"
    exact = float(power_rule_oracle(args.p, args.order)(args.x))
    print(f"D^{args.order:g} x^{args.p:g} at x = {args.x:g}: exact {exact:.15g}")

    print("\nquadrature")
    for n in (8, 16, 32, 64, 128):
        got = differint(f, DifferintSpec(args.order, grid_size=n), args.x)
        print(f"  grid {n:>4}  error {abs(got.value - exact):.3e}  estimate {got.estimated_error:.1e}")

    print("\nGrunwald-Letnikov (Richardson over three step counts)")
    for steps in (256, 1024, 4096, 16384):
        got = differint(f, DifferintSpec(args.order, scheme="grunwald", gl_steps=steps), args.x)
        print(f"  steps {steps:>6}  error {abs(got.value - exact):.3e}  estimate {got.estimated_error:.1e}")


if __name__ == "__main__":
    main()
