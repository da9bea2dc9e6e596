"""Print the reference numbers: maximal radius, catenary heights and h0 thresholds."""

import argparse
import math

from scipy.special import ellipk

from singmin import estimates
from singmin.profiles import maximal_radius, optimal_initial_height, solve_catenary


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tol", type=float, default=1e-10)
    args = ap.parse_args()

    R = maximal_radius(2.0, 1.0, args.tol)
    print(f"alpha=2, z0=1: R = {R:.12f}   (K(1/2)/sqrt 2 = {ellipk(0.5) / math.sqrt(2):.12f})")
    print(f"alpha=2, z0=1: f(1) = {float(solve_catenary(2.0, 1.0, 1.0, args.tol)(1.0)):.12f}")
    z, f = optimal_initial_height(1.0, 1.0)
    print(f"alpha=1, x0=1: z0* = {z:.12f}, f_min = {f:.12f}, tanh(1/z0*) - z0* = {math.tanh(1 / z) - z:.2e}")

    print("\nh0(m, alpha)")
    ms = (0.5, 1.0, 2.0, 4.0)
    print("alpha   " + "".join(f"{'m=' + str(m):>16}" for m in ms))
    for alpha in (0.25, 0.5, 1.0, 1.5, 2.0, 3.0):
        vals = [estimates.threshold_h0(m, alpha, args.tol).value for m in ms]
        print(f"{alpha:<8}" + "".join(f"{v:16.10f}" for v in vals))


if __name__ == "__main__":
    main()
