"""Winglike exit heights over a lambda grid and the resulting d0 grid maximum."""

import argparse
import csv
from pathlib import Path

import numpy as np

from singmin import estimates


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--R", type=float, default=1.0)
    ap.add_argument("--c", type=float, default=2.0)
    ap.add_argument("--lo", type=float, default=0.01, help="smallest lambda")
    ap.add_argument("--hi", type=float, default=5.0, help="largest lambda")
    ap.add_argument("--n", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--out", type=Path, default=Path("d0_sweep.csv"))
    args = ap.parse_args()

    rows = []
    for n in args.n:
        th = estimates.threshold_d0(args.alpha, args.R, args.c, np.geomspace(args.lo, args.hi, n))
        print(f"n={n:4d}: d0 = {th.value:.10f} at lambda = {th.parameters['argmax_lambda']:.6f}")
        rows += [(n, lam, z) for lam, z in th.sweep]
    with args.out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n_grid", "lambda", "exit_height"])
        for n, lam, z in rows:
            w.writerow([n, f"{lam:.17g}", "" if z is None else f"{z:.17g}"])
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
