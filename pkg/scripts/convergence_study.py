"""Refinement tables for the mesh quantities and the graph solver."""

import argparse
import math

import numpy as np
from scipy.integrate import quad

from singmin import meshes
from singmin.graph_solver import (Domain2D, injected_solution, radial_compare, regular_nodes,
                                  residual_field, shoot_meridian, solve_dirichlet)
from singmin.profiles import solve_meridian


def orders(errs):
    e = np.abs(np.asarray(errs, float))
    return [float("nan")] + list(np.log2(e[:-1] / e[1:]))


def mesh_table(alpha, levels):
    prof = solve_meridian(alpha, 1.0, 1.0)
    exact = 2 * math.pi * quad(lambda x: x * math.sqrt(1 + prof.slope(x) ** 2), 0, 1, epsabs=1e-13)[0]
    rows = []
    for a, m in levels:
        mesh = meshes.revolve(prof, (0, 1), a, m)
        flux = meshes.flux_identity(mesh, alpha)
        rows.append((a, m, meshes.area(mesh) - exact, abs(flux.residual) / flux.interior_term))
    print(f"\nrevolution cap, alpha={alpha}")
    print(f"{'n_az':>6} {'n_mer':>6} {'area err':>12} {'order':>6} {'flux rel':>12} {'order':>6}")
    for (a, m, ea, ef), oa, of in zip(rows, orders([r[2] for r in rows]), orders([r[3] for r in rows])):
        print(f"{a:6d} {m:6d} {ea:12.3e} {oa:6.2f} {ef:12.3e} {of:6.2f}")


def pde_table(levels):
    exact = lambda x, y: np.sqrt(5.0 - x * x - y * y)
    mer = shoot_meridian(-2.0, 1.0, 2.0)
    print("\nalpha=-2 graph on the unit disk, boundary value 2")
    print(f"{'n':>5} {'inj. sq':>10} {'inj. disk':>10} {'newton':>7} {'gap':>10}")
    sq, dk, gaps = [], [], []
    for n in levels:
        sq.append(injected_solution(-2.0, Domain2D.rectangle(-0.7, 0.7, -0.7, 0.7, n), exact).residual_norm)
        inj = injected_solution(-2.0, Domain2D.disk((0, 0), 1.0, n), exact)
        dk.append(np.abs(residual_field(inj)[regular_nodes(inj)]).max())
        sol = solve_dirichlet(-2.0, Domain2D.disk((0, 0), 1.0, n), 2.0)
        gaps.append(radial_compare(sol, mer))
        print(f"{n:5d} {sq[-1]:10.3e} {dk[-1]:10.3e} {sol.newton_iters:7d} {gaps[-1]:10.3e}")
    print("orders (square, disk regular nodes, gap):",
          [f"{o:.2f}" for o in orders(sq)[1:]], [f"{o:.2f}" for o in orders(dk)[1:]],
          [f"{o:.2f}" for o in orders(gaps)[1:]])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quick", action="store_true", help="skip the finest levels")
    args = ap.parse_args()
    levels = [(64, 16), (128, 32), (256, 64), (512, 128)]
    if not args.quick:
        levels.append((1024, 256))
    for alpha in (0.5, 1.0, 2.0):
        mesh_table(alpha, levels)
    pde_table([16, 32, 64] if args.quick else [32, 64, 128, 256])


if __name__ == "__main__":
    main()
