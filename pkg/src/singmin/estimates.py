"""Numerical certification of a-priori estimates and non-existence thresholds.

Every check returns a ``BoundReport``.  For an upper bound ``lhs <= rhs`` the
margin is ``rhs - lhs``; for a lower bound it is ``lhs - rhs``.  A report passes
when ``margin >= -slack`` (or ``margin > 0`` for strict checks).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import meshes
from .errors import EmptySweep, InvalidInput, InvalidParameter, NoBoundary
from .profiles import (check_alpha, maximal_radius, optimal_initial_height, catenary_value_at,
                       solve_winglike, winglike_exit_height)
from .roots import bisect, expand_bracket


@dataclass(frozen=True)
class BoundReport:
    name: str
    lhs: float
    rhs: float
    margin: float
    passed: bool
    inputs: dict = field(default_factory=dict)
    slack: float = 0.0

    def row(self) -> dict:
        out = {"name": self.name, "lhs": f"{self.lhs:.17g}", "rhs": f"{self.rhs:.17g}",
               "margin": f"{self.margin:.17g}", "passed": str(self.passed).lower(),
               "slack": f"{self.slack:.17g}"}
        for k, v in self.inputs.items():
            if isinstance(v, (bool, np.bool_)):
                out[k] = str(bool(v)).lower()
            else:
                out[k] = f"{v:.17g}" if isinstance(v, (float, np.floating)) else str(v)
        return out


def _upper(name, lhs, rhs, slack=0.0, strict=False, **inputs) -> BoundReport:
    margin = float(rhs) - float(lhs)
    ok = margin > 0 if strict else margin >= -slack
    return BoundReport(name, float(lhs), float(rhs), margin, bool(ok), inputs, float(slack))


def _lower(name, lhs, rhs, slack=0.0, **inputs) -> BoundReport:
    margin = float(lhs) - float(rhs)
    return BoundReport(name, float(lhs), float(rhs), margin, bool(margin >= -slack), inputs,
                       float(slack))


def richardson_slack(coarse: float, fine: float, order: float = 2.0, ratio: float = 2.0,
                     factor: float = 10.0) -> float:
    """``factor`` times the Richardson error estimate of the fine-level value."""
    return factor * abs(fine - coarse) / (ratio ** order - 1.0)


def reports_to_csv(reports: Sequence[BoundReport], path) -> None:
    rows = [r.row() for r in reports]
    keys = ["name", "lhs", "rhs", "margin", "passed", "slack"]
    for r in rows:
        keys += [k for k in r if k not in keys]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys, restval="")
        w.writeheader()
        w.writerows(rows)


def format_table(reports: Sequence[BoundReport]) -> str:
    lines = [f"{'check':<22} {'lhs':>14} {'rhs':>14} {'margin':>12}  result"]
    for r in reports:
        lines.append(f"{r.name:<22} {r.lhs:>14.8g} {r.rhs:>14.8g} {r.margin:>12.4g}  "
                     f"{'PASS' if r.passed else 'FAIL'}")
    return "\n".join(lines)


# -- area estimates -------------------------------------------------------------

def _boundary_heights(mesh) -> np.ndarray:
    if not mesh.boundary_loops:
        raise NoBoundary("mesh has no boundary")
    return mesh.vertices[mesh.boundary_mask(), 2]


def _planar_boundary(mesh, c: float) -> None:
    zb = _boundary_heights(mesh)
    if np.abs(zb - c).max() > 1e-9 * c:
        raise InvalidInput(f"boundary is not contained in the plane z = {c}")


def check_area_upper(mesh, alpha: float, slack: float = 0.0) -> BoundReport:
    """``A(M) <= L(Gamma) * max_Gamma z`` for ``alpha >= 1``."""
    alpha = check_alpha(alpha)
    if alpha < 1:
        raise InvalidParameter("the area upper bound needs alpha >= 1")
    zb = _boundary_heights(mesh)
    L = sum(meshes.boundary_length(mesh))
    return _upper("area_upper", meshes.area(mesh), L * zb.max(), slack,
                  alpha=alpha, L=L, sup_z=float(zb.max()))


def check_planar_necessary(omega_area: float, c: float, L: float) -> BoundReport:
    """Necessary condition ``|Omega| <= c L`` for a planar boundary at height ``c`` (alpha >= 1)."""
    if min(omega_area, c, L) <= 0:
        raise InvalidParameter("inputs must be positive")
    return _upper("planar_necessary", omega_area, c * L, c=float(c), L=float(L))


def check_graph_area(mesh, alpha: float, c: float, L: float, omega_area: float,
                     slack: float = 0.0) -> BoundReport:
    """``A(M) <= c L + (1 - alpha)|Omega|`` for graphs with ``0 < alpha < 1``.

    The consequence ``|Omega| <= (c / alpha) L`` is evaluated as well and stored
    in ``inputs`` (``consequence_margin``, ``consequence_passed``).
    """
    alpha = check_alpha(alpha)
    if not 0 < alpha < 1:
        raise InvalidParameter("the graph area bound needs 0 < alpha < 1")
    _planar_boundary(mesh, c)
    cons = c * L / alpha - omega_area
    return _upper("graph_area", meshes.area(mesh), c * L + (1 - alpha) * omega_area, slack,
                  alpha=alpha, c=float(c), L=float(L), omega_area=float(omega_area),
                  consequence_margin=float(cons), consequence_passed=bool(cons >= 0))


def check_area_lower(mesh, alpha: float, c: float, h: Optional[float] = None,
                     slack: float = 0.0) -> BoundReport:
    """``A(M) >= -(2 pi / alpha)(h^2 - c^2)`` for graphs with ``alpha < 0``."""
    alpha = check_alpha(alpha)
    if alpha >= 0:
        raise InvalidParameter("the area lower bound needs alpha < 0")
    _planar_boundary(mesh, c)
    if h is None:
        h = float(mesh.vertices[:, 2].max())
    rhs = -(2 * math.pi / alpha) * (h * h - c * c)
    return _lower("area_lower", meshes.area(mesh), rhs, slack, alpha=alpha, c=float(c), h=float(h))


def check_flux(mesh, alpha: float, slack: float = 0.0) -> BoundReport:
    """Flux identity as a two-sided check: ``|boundary - interior| <= slack``."""
    rep = meshes.flux_identity(mesh, check_alpha(alpha))
    margin = -abs(rep.residual)
    return BoundReport("flux_identity", rep.boundary_term, rep.interior_term, margin,
                       bool(margin >= -slack), {"alpha": float(alpha)}, float(slack))


def check_extrema_side(mesh, alpha: float, c: float) -> BoundReport:
    """Interior lies below (alpha > 0) or above (alpha < 0) the boundary plane ``z = c``."""
    alpha = check_alpha(alpha)
    inner = ~mesh.boundary_mask()
    if not inner.any():
        return _upper("extrema_side", c, c, alpha=alpha, c=float(c), vacuous=True)
    z = mesh.vertices[inner, 2]
    slack = mesh.edge_length_max()
    if alpha > 0:
        return _upper("extrema_side", z.max(), c, slack, alpha=alpha, c=float(c))
    return _lower("extrema_side", z.min(), c, slack, alpha=alpha, c=float(c))


# -- height estimate for rotational surfaces -------------------------------------------

@dataclass(frozen=True)
class ComparisonSphere:
    """Lower hemisphere through the circle ``(r, f_r)`` whose weighted curvature vanishes there."""

    alpha: float
    r: float
    f_r: float
    R: float
    c: float

    def weighted_curvature(self, z):
        """``(1/R)(1 - alpha (c - z) / (2 z))``, orientation pointing upwards."""
        z = np.asarray(z, dtype=float)
        return (1.0 - self.alpha * (self.c - z) / (2.0 * z)) / self.R

    def height(self, x):
        return self.c - np.sqrt(self.R ** 2 - np.asarray(x, dtype=float) ** 2)


def comparison_sphere(alpha: float, r: float, f_r: float) -> ComparisonSphere:
    alpha = check_alpha(alpha)
    if alpha <= 0 or r <= 0 or f_r <= 0:
        raise InvalidParameter("comparison_sphere needs positive alpha, r and f_r")
    R = math.sqrt(r * r + 4.0 * f_r * f_r / (alpha * alpha))
    c = (2.0 + alpha) / alpha * f_r
    return ComparisonSphere(alpha, float(r), float(f_r), R, c)


def check_height_estimate(meridian, r: float) -> list[BoundReport]:
    """Strict bound ``f(x) < ((alpha+2)/alpha) f(r) - sqrt(r^2 + 4 f(r)^2/alpha^2 - x^2)``.

    One report per profile sample with ``0 <= x < r``; the equality case
    ``x = r`` is excluded.
    """
    alpha = meridian.alpha
    if alpha <= 0:
        raise InvalidParameter("the height estimate needs alpha > 0")
    if not 0 < r <= meridian.x_max * (1 + 1e-12):
        raise InvalidParameter(f"r = {r} outside the meridian domain (0, {meridian.x_max}]")
    f_r = float(meridian(min(r, meridian.x_max)))
    sphere = comparison_sphere(alpha, r, f_r)
    xs = meridian.x[meridian.x < r]
    rhs = sphere.height(xs)
    return [_upper("height_estimate", fx, bound, strict=True, alpha=alpha, z0=meridian.z0,
                   r=float(r), x=float(x))
            for x, fx, bound in zip(xs, meridian.f[: len(xs)], rhs)]


# -- non-existence thresholds ----------------------------------------------------

@dataclass(frozen=True)
class Threshold:
    kind: str
    value: float
    parameters: dict
    sweep: list

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["parameter", "observable"])
            for p, o in self.sweep:
                w.writerow([f"{p:.17g}", "" if o is None else f"{o:.17g}"])


def threshold_h0(m: float, alpha: float, tol: float = 1e-10) -> Threshold:
    """Height below which curves split by a vertical slab of width ``m`` bound no surface.

    ``alpha <= 1``: the least height ``f(m/2; z0)`` over catenaries.
    ``alpha > 1``: the ``z0`` whose catenary has maximal half-width ``m/2``.
    """
    alpha = check_alpha(alpha)
    if alpha < 0:
        raise InvalidParameter("threshold_h0 needs alpha > 0")
    if not m > 0:
        raise InvalidParameter("m must be positive")
    half = 0.5 * m
    if alpha <= 1:
        z_star, f_min = optimal_initial_height(alpha, half, tol=tol)
        scan = [(z, catenary_value_at(alpha, z, half)) for z in z_star * np.array([0.5, 0.8, 1.0, 1.25, 2.0])]
        return Threshold("h0", f_min, {"m": float(m), "alpha": alpha, "z0_star": z_star}, scan)

    sweep = []

    def gap(z0):
        R = maximal_radius(alpha, z0)
        sweep.append((z0, R))
        return R - half

    lo, hi = expand_bracket(gap, half / 2.0, half * 2.0)
    z0 = bisect(gap, lo, hi, tol=tol * half)
    sweep.sort()
    return Threshold("h0", z0, {"m": float(m), "alpha": alpha}, sweep)


def default_lambda_grid(R: float, n: int = 64) -> np.ndarray:
    return np.geomspace(1e-2 * R, 10.0 * R, n)


def threshold_d0(alpha: float, R: float, c: float, lambda_grid=None,
                 tol: float = 1e-10) -> Threshold:
    """Grid maximum of winglike exit heights ``z_lam(s1(lam))`` at radius ``R``.

    The supremum over all ``lam > 0`` is estimated from below by the grid;
    ``lam`` values without an exit point enter the sweep with ``None``.
    """
    alpha = check_alpha(alpha)
    if alpha <= 0 or R <= 0 or c <= 0:
        raise InvalidParameter("threshold_d0 needs positive alpha, R and c")
    grid = default_lambda_grid(R) if lambda_grid is None else np.asarray(lambda_grid, dtype=float)
    if len(grid) == 0 or np.any(grid <= 0):
        raise InvalidParameter("lambda grid must be nonempty and positive")
    sweep = []
    for lam in grid:
        prof = solve_winglike(alpha, lam, c, s_min=-10.0 * (lam + R + c), tol=tol)
        sweep.append((float(lam), winglike_exit_height(prof, R)))
    defined = [(lam, z) for lam, z in sweep if z is not None]
    if not defined:
        raise EmptySweep("no lambda in the grid produced an exit point")
    lam_best, best = max(defined, key=lambda t: t[1])
    return Threshold("d0", best, {"alpha": alpha, "R": float(R), "c": float(c), "c1": float(c) - 1.0,
                                  "argmax_lambda": lam_best, "n_lambda": len(grid)}, sweep)
