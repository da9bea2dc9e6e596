"""Command-line front end: ``python -m singmin <command> <kind> [flags]``.

Exit codes: 0 success, 2 invalid parameters or usage, 3 numerical failure,
4 a bound check failed.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import shlex
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

import numpy as np

from . import estimates, meshes
from .errors import NumericalError, ParameterError, InvalidParameter
from .graph_solver import Domain2D, solve_dirichlet
from .profiles import solve_catenary, solve_meridian, solve_winglike

EXIT_OK, EXIT_PARAM, EXIT_NUMERIC, EXIT_BOUND = 0, 2, 3, 4


def g17(v) -> str:
    return "nan" if v is None else f"{float(v):.17g}"


class _Parser(argparse.ArgumentParser):
    """Raise instead of exiting so ``run`` can return the usage exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _grid(text: str) -> tuple[int, ...]:
    try:
        parts = tuple(int(float(p)) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}, expected NX or NX,NY")
    if not 1 <= len(parts) <= 2 or min(parts) < 1:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}, expected NX or NX,NY")
    return parts


def _lambda_grid(text: str) -> np.ndarray:
    """``v1,v2,...`` or ``lo:hi:n`` (geometric)."""
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            return np.geomspace(float(lo), float(hi), int(n))
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad lambda grid {text!r}")


def _add(p, *names, help, **kw):
    p.add_argument(*names, help=help + " (default: %(default)s)", **kw)


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="singmin", description="Singular minimal surfaces: profiles, graphs, "
                  "meshes, estimates and thresholds.  Lengths are in the units of the "
                  "ambient coordinates; alpha is dimensionless.")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    _add(common, "--tol", type=float, default=1e-10, help="solver tolerance (relative)")
    _add(common, "--out", default=None, help="CSV output path")
    _add(common, "--verbose", action="store_true", default=False, help="print progress")

    def kinds(name, help, names):
        p = sub.add_parser(name, help=help)
        s = p.add_subparsers(dest="kind", required=True, parser_class=_Parser)
        return {n: s.add_parser(n, parents=[common],
                                formatter_class=argparse.RawDescriptionHelpFormatter) for n in names}

    # profile
    pk = kinds("profile", "integrate a profile curve", ["catenary", "meridian", "winglike"])
    for n in ("catenary", "meridian"):
        p = pk[n]
        _add(p, "--alpha", type=float, default=1.0, help="exponent alpha (dimensionless)")
        _add(p, "--z0", type=float, default=1.0, help="height of the lowest point (length)")
        _add(p, "--xmax", type=float, default=3.0, help="integration end abscissa (length)")
        _add(p, "--dx", type=float, default=1e-3, help="output sample spacing (length)")
    p = pk["winglike"]
    _add(p, "--alpha", type=float, default=1.0, help="exponent alpha (dimensionless)")
    _add(p, "--lambda", dest="lam", type=float, default=1.0, help="start radius (length)")
    _add(p, "--c", type=float, default=2.0, help="start height (length)")
    _add(p, "--smin", type=float, default=-20.0, help="arclength at which to stop (length, < 0)")

    # solve graph
    p = kinds("solve", "solve a Dirichlet problem", ["graph"])["graph"]
    _add(p, "--alpha", type=float, default=-2.0, help="exponent alpha (dimensionless)")
    _add(p, "--domain", choices=["disk", "square"], default="disk", help="domain shape")
    _add(p, "--R", type=float, default=1.0, help="disk radius or square half-width (length)")
    _add(p, "--c", type=float, default=2.0, help="constant boundary value (length)")
    _add(p, "--grid", type=_grid, default=(64,), help="cells per axis NX[,NY]")
    _add(p, "--obj", default=None, help="OBJ mesh output path")

    # mesh
    mk = kinds("mesh", "build a surface mesh", ["revolve", "extrude"])
    p = mk["revolve"]
    _add(p, "--alpha", type=float, default=1.0, help="exponent alpha (dimensionless)")
    _add(p, "--z0", type=float, default=1.0, help="meridian height on the axis (length)")
    _add(p, "--r", type=float, default=1.0, help="outer radius of the cap (length)")
    _add(p, "--grid", type=_grid, default=(64, 32), help="azimuthal,meridian segments")
    _add(p, "--obj", default=None, help="OBJ mesh output path")
    p = mk["extrude"]
    _add(p, "--alpha", type=float, default=1.0, help="exponent alpha (dimensionless)")
    _add(p, "--z0", type=float, default=1.0, help="catenary lowest height (length)")
    _add(p, "--xmax", type=float, default=1.0, help="half-width across the rulings (length)")
    _add(p, "--length", type=float, default=1.0, help="extent along the rulings (length)")
    _add(p, "--grid", type=_grid, default=(32, 32), help="segments NX,NY")
    _add(p, "--obj", default=None, help="OBJ mesh output path")

    # verify
    vk = kinds("verify", "check an estimate numerically",
               ["area-upper", "area-lower", "graph-area", "height", "flux", "extrema"])
    for n, a, g in (("area-upper", 1.0, (256, 64)), ("flux", 1.0, (512, 128)),
                    ("extrema", 1.0, (128, 32))):
        p = vk[n]
        _add(p, "--alpha", type=float, default=a, help="exponent alpha (dimensionless)")
        _add(p, "--z0", type=float, default=1.0, help="meridian height on the axis (length)")
        _add(p, "--r", type=float, default=1.0, help="cap radius (length)")
        _add(p, "--grid", type=_grid, default=g, help="azimuthal,meridian segments")
    for n, a, c in (("area-lower", -2.0, 2.0), ("graph-area", 0.5, 1.0)):
        p = vk[n]
        _add(p, "--alpha", type=float, default=a, help="exponent alpha (dimensionless)")
        _add(p, "--c", type=float, default=c, help="boundary plane height (length)")
        _add(p, "--R", type=float, default=1.0, help="disk radius (length)")
        _add(p, "--grid", type=_grid, default=(64,), help="cells per axis")
    _add(vk["area-lower"], "--h", type=float, default=None,
         help="height entering the bound (length; None = max vertex height)")
    p = vk["height"]
    _add(p, "--alpha", type=float, default=1.0, help="exponent alpha > 0 (dimensionless)")
    _add(p, "--z0", type=float, default=1.0, help="meridian height on the axis (length)")
    _add(p, "--r", type=float, default=2.0, help="boundary circle radius (length)")

    # threshold
    tk = kinds("threshold", "compute a non-existence threshold", ["h0", "d0"])
    p = tk["h0"]
    _add(p, "--m", type=float, default=2.0, help="slab width (length)")
    _add(p, "--alpha", type=float, default=1.0, help="exponent alpha > 0 (dimensionless)")
    p = tk["d0"]
    _add(p, "--alpha", type=float, default=1.0, help="exponent alpha > 0 (dimensionless)")
    _add(p, "--R", type=float, default=1.0, help="disk radius (length)")
    _add(p, "--c", type=float, default=2.0, help="winglike start height (length)")
    _add(p, "--lambda", dest="lam", type=_lambda_grid, default=None,
         help="lambda grid 'v1,v2,..' or 'lo:hi:n' (length; None = 64 points over [0.01, 10]*R)")

    # batch
    p = sub.add_parser("batch", help="run scenarios from a file, one per line")
    p.add_argument("file", help="scenario file; blank lines and '#' comments are skipped")
    _add(p, "--out", default="summary.csv", help="summary CSV, appended to")
    _add(p, "--jobs", type=int, default=1, help="parallel worker processes")
    return top


# -- helpers --------------------------------------------------------------------

def _cap_mesh(alpha, z0, r, grid, tol):
    na, nm = (grid * 2)[:2]
    prof = solve_meridian(alpha, z0, r, tol)
    if prof.x_max < r * (1 - 1e-12):
        raise InvalidParameter(f"meridian ends at x = {prof.x_max} before r = {r}")
    return prof, (lambda a, m: meshes.revolve(prof, (0.0, r), a, m)), na, nm


def _disk_solution(alpha, c, R, n, tol, verbose=False):
    return solve_dirichlet(alpha, Domain2D.disk((0.0, 0.0), R, n), c, tol=max(tol, 1e-12),
                           verbose=verbose)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    return g17(v) if isinstance(v, (float, np.floating)) else str(v)


def _report_text(rep) -> str:
    lines = [f"{rep.name}: lhs={g17(rep.lhs)} rhs={g17(rep.rhs)} margin={g17(rep.margin)} "
             f"slack={g17(rep.slack)} passed={str(rep.passed).lower()}"]
    for k, v in rep.inputs.items():
        lines.append(f"  {k}={_fmt(v)}")
    return "\n".join(lines)


def _finish(reports, out) -> tuple[int, str]:
    if out:
        estimates.reports_to_csv(reports, out)
    code = EXIT_OK if all(r.passed for r in reports) else EXIT_BOUND
    return code, "\n".join(_report_text(r) for r in reports)


# -- command bodies (each returns (exit_code, text)) ----------------------------------

def _profile(a):
    if a.kind == "winglike":
        prof = solve_winglike(a.alpha, a.lam, a.c, s_min=a.smin, tol=a.tol)
        text = (f"termination={prof.termination}\ns0={g17(prof.s0)}\n"
                f"waist_radius={g17(prof.waist_radius)}\nwaist_height={g17(prof.waist_height)}")
    else:
        if not a.dx > 0:
            raise InvalidParameter("dx must be positive")
        n = max(2, int(round(a.xmax / a.dx)) + 1)
        solver = solve_catenary if a.kind == "catenary" else solve_meridian
        prof = solver(a.alpha, a.z0, a.xmax, a.tol, n_samples=n)
        text = (f"termination={prof.termination}\nx_end={g17(prof.x_max)}\n"
                f"f_end={g17(prof.f[-1])}")
        if a.kind == "catenary" and math.isfinite(prof.r_max):
            text += f"\nr_max={g17(prof.r_max)}"
    if a.out:
        prof.to_csv(a.out)
    return EXIT_OK, text


def _solve(a):
    n = a.grid
    if a.domain == "disk":
        dom = Domain2D.disk((0.0, 0.0), a.R, n[0])
    else:
        dom = Domain2D.rectangle(-a.R, a.R, -a.R, a.R, n[0], n[-1])
    sol = solve_dirichlet(a.alpha, dom, a.c, tol=max(a.tol, 1e-12), verbose=a.verbose)
    if a.out:
        sol.to_csv(a.out)
    if a.obj:
        meshes.graph_mesh(sol).to_obj(a.obj)
    U = sol.U
    return EXIT_OK, (f"newton_iters={sol.newton_iters}\nresidual={g17(sol.residual_norm)}\n"
                     f"u_min={g17(U.min())}\nu_max={g17(U.max())}")


def _mesh(a):
    if a.kind == "revolve":
        _, build, na, nm = _cap_mesh(a.alpha, a.z0, a.r, a.grid, a.tol)
        mesh = build(na, nm)
    else:
        nx, ny = (a.grid * 2)[:2]
        prof = solve_catenary(a.alpha, a.z0, a.xmax, a.tol)
        if prof.x_max < a.xmax * (1 - 1e-12):
            raise InvalidParameter(f"catenary ends at x = {prof.x_max} before xmax = {a.xmax}")
        mesh = meshes.extrude(prof, (0.0, a.length), nx, ny)
    if a.obj:
        mesh.to_obj(a.obj)
    if a.out:
        meshes.weighted_mean_curvature(mesh, a.alpha).to_csv(a.out)
    return EXIT_OK, (f"vertices={mesh.n_vertices}\ntriangles={len(mesh.triangles)}\n"
                     f"area={g17(meshes.area(mesh))}\n"
                     f"weighted_area={g17(meshes.weighted_area(mesh, a.alpha))}")


def _verify(a):
    k = a.kind
    if k == "height":
        prof = solve_meridian(a.alpha, a.z0, a.r * (1 + 1e-9), a.tol)
        reps = estimates.check_height_estimate(prof, a.r)
        if a.out:
            estimates.reports_to_csv(reps, a.out)
        worst = min(reps, key=lambda r: r.margin)
        ok = all(r.passed for r in reps)
        return (EXIT_OK if ok else EXIT_BOUND,
                f"samples={len(reps)}\nmin_margin={g17(worst.margin)}\nat_x={g17(worst.inputs['x'])}\n"
                f"passed={str(ok).lower()}")

    if k in ("area-upper", "flux", "extrema"):
        prof, build, na, nm = _cap_mesh(a.alpha, a.z0, a.r, a.grid, a.tol)
        fine = build(na, nm)
        if k == "extrema":
            return _finish([estimates.check_extrema_side(fine, a.alpha, float(prof(a.r)))], a.out)
        coarse = build(max(8, na // 2), max(8, nm // 2))
        if k == "area-upper":
            slack = estimates.richardson_slack(meshes.area(coarse), meshes.area(fine))
            return _finish([estimates.check_area_upper(fine, a.alpha, slack)], a.out)
        slack = estimates.richardson_slack(meshes.flux_identity(coarse, a.alpha).residual,
                                           meshes.flux_identity(fine, a.alpha).residual)
        return _finish([estimates.check_flux(fine, a.alpha, slack)], a.out)

    n = a.grid[0]
    fine = meshes.graph_mesh(_disk_solution(a.alpha, a.c, a.R, n, a.tol, a.verbose))
    coarse = meshes.graph_mesh(_disk_solution(a.alpha, a.c, a.R, max(16, n // 2), a.tol))
    slack = estimates.richardson_slack(meshes.area(coarse), meshes.area(fine))
    if k == "area-lower":
        rep = estimates.check_area_lower(fine, a.alpha, a.c, a.h, slack=slack)
    else:
        rep = estimates.check_graph_area(fine, a.alpha, a.c, 2 * math.pi * a.R,
                                         math.pi * a.R ** 2, slack=slack)
    return _finish([rep], a.out)


def _threshold(a):
    if a.kind == "h0":
        th = estimates.threshold_h0(a.m, a.alpha, tol=a.tol)
    else:
        th = estimates.threshold_d0(a.alpha, a.R, a.c, a.lam, tol=a.tol)
    if a.out:
        th.to_csv(a.out)
    lines = [f"{th.kind}={g17(th.value)}"]
    lines += [f"  {k}={_fmt(v)}" for k, v in th.parameters.items()]
    return EXIT_OK, "\n".join(lines)


_DISPATCH = {"profile": _profile, "solve": _solve, "mesh": _mesh, "verify": _verify,
             "threshold": _threshold}


def execute(argv) -> tuple[int, str]:
    """Run one command line; returns ``(exit_code, text)`` without printing."""
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as e:
        return EXIT_PARAM, str(e)
    except SystemExit as e:  # --help
        return int(e.code or 0), ""
    if args.command == "batch":
        return _batch(args)
    try:
        return _DISPATCH[args.command](args)
    except ParameterError as e:
        return EXIT_PARAM, f"invalid parameter: {e}"
    except NumericalError as e:
        return EXIT_NUMERIC, f"numerical failure: {e}"
    except OSError as e:
        return EXIT_PARAM, f"i/o error: {e}"


def _run_line(line: str) -> tuple[int, str]:
    argv = shlex.split(line)
    if argv and argv[0] == "batch":
        return EXIT_PARAM, "nested batch is not allowed"
    return execute(argv)


def _batch(a) -> tuple[int, str]:
    try:
        with open(a.file) as fh:
            lines = [ln.strip() for ln in fh]
    except OSError as e:
        return EXIT_PARAM, f"cannot read scenario file: {e}"
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if a.jobs < 1:
        return EXIT_PARAM, "--jobs must be at least 1"
    if a.jobs > 1 and len(lines) > 1:
        with ProcessPoolExecutor(a.jobs) as pool:
            results = list(pool.map(_run_line, lines))
    else:
        results = [_run_line(ln) for ln in lines]
    new = not os.path.exists(a.out) or os.path.getsize(a.out) == 0
    with open(a.out, "a", newline="") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(["scenario", "exit_code", "result"])
        for ln, (code, text) in zip(lines, results):
            w.writerow([ln, code, text.splitlines()[0] if text else ""])
    code = max((c for c, _ in results), default=EXIT_OK)
    return code, f"scenarios={len(lines)}\nexit_code={code}"


def run(argv=None) -> int:
    code, text = execute(sys.argv[1:] if argv is None else list(argv))
    if text:
        print(text, file=sys.stderr if code in (EXIT_PARAM, EXIT_NUMERIC) else sys.stdout)
    return code


def main(argv: Optional[list] = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
