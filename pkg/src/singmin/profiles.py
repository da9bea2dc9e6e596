"""Generating curves of rotational, cylindrical and winglike singular minimal surfaces.

The density vector is fixed to the vertical axis, so a surface is alpha-singular
minimal when ``2H = alpha * N_z / z``.  Three one-dimensional reductions are
integrated here:

* catenary:  ``f'' / (1 + f'^2) = alpha / f``, ``f(0) = z0``, ``f'(0) = 0``
* meridian:  ``f'' / (1 + f'^2) + f' / x = alpha / f`` with the same initial data
* winglike:  ``x' = cos(theta)``, ``z' = sin(theta)``,
  ``theta' + sin(theta) / x = alpha cos(theta) / z`` from ``(lam, c, 0)``,
  integrated towards negative arclength.

All integrations use the Dormand-Prince 8(5,3) pair from scipy with relative
and absolute error control.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationFailure, InvalidParameter, SearchFailure
from .roots import bisect, golden_section, hermite, hermite_root

DEFAULT_TOL = 1e-10
BLOWUP_SLOPE = 1e8
SERIES_START = 1e-4
AXIS_EPS = 1e-9

REACHED_XMAX = "reached_xmax"
BLOWUP = "blowup_detected"
REACHED_SMIN = "reached_smin"
AXIS_COLLISION = "axis_collision"
REACHED_FLOOR = "reached_floor"


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha == 0.0:
        raise InvalidParameter(f"alpha must be a nonzero finite number, got {alpha}")
    return alpha


def _check_positive(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise InvalidParameter(f"{name} must be positive, got {value}")
    return value


def _check_tol(tol: float) -> float:
    tol = float(tol)
    if not 0 < tol <= 1e-3:
        raise InvalidParameter(f"tol must lie in (0, 1e-3], got {tol}")
    return tol


def _fmt(v: float) -> str:
    return f"{v:.17g}"


@dataclass(frozen=True)
class GraphProfile:
    """A sampled curve ``z = f(x)``, ``x >= 0``, with its slope.

    Evaluation uses the integrator's dense output when available and cubic
    Hermite interpolation of the samples otherwise (e.g. after ``from_csv``).
    """

    alpha: float
    z0: float
    x: np.ndarray
    f: np.ndarray
    fp: np.ndarray
    termination: str = REACHED_XMAX
    dense: Optional[Callable[[np.ndarray], np.ndarray]] = field(
        default=None, repr=False, compare=False)

    @property
    def x_max(self) -> float:
        return float(self.x[-1])

    def _eval(self, xq) -> tuple[np.ndarray, np.ndarray]:
        xq = np.asarray(xq, dtype=float)
        if np.any(xq < -1e-14) or np.any(xq > self.x_max * (1 + 1e-12) + 1e-14):
            raise InvalidParameter(f"evaluation outside profile domain [0, {self.x_max}]")
        if self.dense is not None:
            return self.dense(xq)
        i = np.clip(np.searchsorted(self.x, xq, side="right") - 1, 0, len(self.x) - 2)
        x0, x1 = self.x[i], self.x[i + 1]
        h = x1 - x0
        u = (xq - x0) / h
        f0, f1, d0, d1 = self.f[i], self.f[i + 1], self.fp[i], self.fp[i + 1]
        val = ((1 + 2 * u) * (1 - u) ** 2 * f0 + u * (1 - u) ** 2 * h * d0
               + u * u * (3 - 2 * u) * f1 + u * u * (u - 1) * h * d1)
        # derivative of the Hermite cubic
        der = ((6 * u * u - 6 * u) * f0 / h + (3 * u * u - 4 * u + 1) * d0
               + (-6 * u * u + 6 * u) * f1 / h + (3 * u * u - 2 * u) * d1)
        return val, der

    def __call__(self, xq):
        val = self._eval(xq)[0]
        return float(val) if np.ndim(val) == 0 else val

    def slope(self, xq):
        der = self._eval(xq)[1]
        return float(der) if np.ndim(der) == 0 else der

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "f", "fp"])
            for row in zip(self.x, self.f, self.fp):
                w.writerow([_fmt(v) for v in row])

    @classmethod
    def from_csv(cls, path, alpha: float, **kw):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(alpha=alpha, z0=float(data[0, 1]), x=data[:, 0], f=data[:, 1],
                   fp=data[:, 2], **kw)


@dataclass(frozen=True)
class CatenaryProfile(GraphProfile):
    r_max: float = math.inf


@dataclass(frozen=True)
class MeridianProfile(GraphProfile):
    pass


@dataclass(frozen=True)
class AnalyticProfile:
    """Closed-form graph profile, used for comparison surfaces such as spheres."""

    func: Callable
    deriv: Callable
    x_max: float
    alpha: float = 0.0

    def __call__(self, xq):
        return self.func(xq)

    def slope(self, xq):
        return self.deriv(xq)


def _sample_grid(t_steps: np.ndarray, t_end: float, n_samples: int) -> np.ndarray:
    grid = np.linspace(t_steps[0], t_end, n_samples)
    return np.unique(np.concatenate([t_steps, grid]))


def _run(rhs, span, y0, tol, events=()):
    sol = solve_ivp(rhs, span, y0, method="DOP853", rtol=tol, atol=tol * 1e-2,
                    events=list(events) or None, dense_output=True)
    if sol.status == -1 and len(sol.t) <= 2:
        raise IntegrationFailure(f"integration failed before any progress: {sol.message}")
    return sol


def _extrapolate_blowup(x: np.ndarray, f: np.ndarray, fp: np.ndarray) -> float:
    """Limit abscissa of a vertical asymptote from the last three step endpoints.

    Close to the asymptote ``f / |f'|`` decays linearly to zero in ``x``, so the
    quadratic through the last three points ``(f/|f'|, x)`` is evaluated at 0
    (Neville / Richardson extrapolation).
    """
    g = f[-3:] / np.abs(fp[-3:])
    xs = x[-3:]
    g0, g1, g2 = g
    x0, x1, x2 = xs
    # Lagrange form in g, evaluated at g = 0
    l0 = (0 - g1) * (0 - g2) / ((g0 - g1) * (g0 - g2))
    l1 = (0 - g0) * (0 - g2) / ((g1 - g0) * (g1 - g2))
    l2 = (0 - g0) * (0 - g1) / ((g2 - g0) * (g2 - g1))
    return float(l0 * x0 + l1 * x1 + l2 * x2)


def _graph_profile(cls, alpha, z0, x_start, y_start, rhs, x_max, tol, n_samples, detect_blowup):
    events = []
    if detect_blowup:
        def steep(_x, y):
            return abs(y[1]) - BLOWUP_SLOPE
        steep.terminal = True
        steep.direction = 1
        events.append(steep)
    sol = _run(rhs, (x_start, x_max), y_start, tol, events)

    xs, fs, ps = sol.t, sol.y[0], sol.y[1]
    blown = detect_blowup and (
        (sol.t_events and len(sol.t_events[0]) > 0)
        or (sol.status == -1 and abs(ps[-1]) > 1e-2 * BLOWUP_SLOPE))
    if sol.status == -1 and not blown:
        raise IntegrationFailure(sol.message)
    x_end = float(xs[-1])

    grid = _sample_grid(xs, x_end, n_samples)
    yy = sol.sol(grid)
    if x_start > 0:
        grid = np.concatenate([[0.0], grid])
        yy = np.concatenate([[[z0], [0.0]], yy], axis=1)

    def dense(xq):
        xq = np.asarray(xq, dtype=float)
        inside = np.clip(xq, x_start, x_end)
        v = sol.sol(inside.ravel()) if xq.ndim else sol.sol(float(inside))
        val = np.reshape(v[0], xq.shape)
        der = np.reshape(v[1], xq.shape)
        if x_start > 0:
            # series branch below the start abscissa
            a = alpha / (4.0 * z0)
            near = xq < x_start
            val = np.where(near, z0 + a * xq * xq, val)
            der = np.where(near, 2 * a * xq, der)
        return val, der

    kw = {}
    if cls is CatenaryProfile:
        kw["r_max"] = _extrapolate_blowup(xs, fs, ps) if blown else math.inf
    return cls(alpha=alpha, z0=z0, x=grid, f=yy[0], fp=yy[1],
               termination=BLOWUP if blown else REACHED_XMAX, dense=dense, **kw)


def solve_catenary(alpha: float, z0: float, x_max: float, tol: float = DEFAULT_TOL,
                   n_samples: int = 1001) -> CatenaryProfile:
    """Integrate the alpha-catenary ``f''/(1+f'^2) = alpha/f`` from its lowest point.

    The profile is even, so only ``x >= 0`` is stored.  For ``alpha > 1`` (and
    ``alpha < 0``) the slope diverges at a finite abscissa; integration stops
    once ``|f'|`` exceeds ``BLOWUP_SLOPE`` and ``r_max`` is extrapolated.
    """
    alpha = check_alpha(alpha)
    z0 = _check_positive("z0", z0)
    x_max = _check_positive("x_max", x_max)
    tol = _check_tol(tol)

    def rhs(_x, y):
        return [y[1], alpha * (1.0 + y[1] * y[1]) / y[0]]

    return _graph_profile(CatenaryProfile, alpha, z0, 0.0, [z0, 0.0], rhs, x_max, tol,
                          n_samples, detect_blowup=alpha > 1 or alpha < 0)


def solve_meridian(alpha: float, z0: float, x_max: float, tol: float = DEFAULT_TOL,
                   n_samples: int = 1001) -> MeridianProfile:
    """Meridian of the rotational surface meeting the vertical axis at height ``z0``.

    The ``f'/x`` term is singular at the axis, so integration starts at
    ``x = 1e-4 * z0`` from the series ``f = z0 + alpha x^2 / (4 z0)``.
    """
    alpha = check_alpha(alpha)
    z0 = _check_positive("z0", z0)
    x_max = _check_positive("x_max", x_max)
    tol = _check_tol(tol)
    x_start = SERIES_START * z0
    if x_start >= x_max:
        raise InvalidParameter("x_max is too small for the series start")
    a = alpha / (4.0 * z0)
    y_start = [z0 + a * x_start ** 2, 2.0 * a * x_start]

    def rhs(x, y):
        f, p = y
        return [p, (1.0 + p * p) * (alpha / f - p / x)]

    return _graph_profile(MeridianProfile, alpha, z0, x_start, y_start, rhs, x_max, tol,
                          n_samples, detect_blowup=alpha < 0)


def maximal_radius(alpha: float, z0: float, tol: float = DEFAULT_TOL) -> float:
    """Half-width ``R(z0)`` of the maximal domain of an alpha-catenary, ``alpha > 1``."""
    alpha = check_alpha(alpha)
    if alpha <= 1:
        raise InvalidParameter("the maximal domain is the whole line for alpha <= 1")
    z0 = _check_positive("z0", z0)
    # R(z0) = z0 * int_1^inf du / sqrt(u^(2 alpha) - 1) < z0 * (1 + 1/(alpha-1)) * 2
    bound = z0 * (2.0 + 2.0 / (alpha - 1.0)) * 4.0
    prof = solve_catenary(alpha, z0, bound, tol, n_samples=2)
    if prof.termination != BLOWUP:
        raise IntegrationFailure("no blow-up detected below the a-priori bound")
    return prof.r_max


def catenary_value_at(alpha: float, z0: float, x0: float, tol: float = DEFAULT_TOL) -> float:
    """``f(x0; z0)`` for ``0 < alpha <= 1`` from a fresh integration."""
    alpha = check_alpha(alpha)
    if not 0 < alpha <= 1:
        raise InvalidParameter("catenary_value_at requires 0 < alpha <= 1")
    x0 = _check_positive("x0", x0)
    prof = solve_catenary(alpha, z0, x0, tol, n_samples=2)
    return float(prof.f[-1])


def _height_sensitivity(alpha: float, z0: float, x0: float, tol: float) -> float:
    """``d f(x0; z0) / d z0`` via dilation covariance: ``(f - x0 f') / z0`` at ``x0``."""
    prof = solve_catenary(alpha, z0, x0, tol, n_samples=2)
    return (prof.f[-1] - x0 * prof.fp[-1]) / z0


def optimal_initial_height(alpha: float, x0: float, tol: float = 1e-12) -> tuple[float, float]:
    """Minimise ``z0 -> f(x0; z0)`` for ``0 < alpha <= 1``.

    A golden-section search over the unimodal target produces a bracket; the
    minimiser is then located to ``tol`` by bisection on the stationarity
    condition ``f(x0) = x0 f'(x0)`` (the tangent at ``x0`` passes through the
    origin), which stays well conditioned where the target itself is flat.
    Returns ``(z0_star, f_min)``.
    """
    alpha = check_alpha(alpha)
    if not 0 < alpha <= 1:
        raise InvalidParameter("optimal_initial_height requires 0 < alpha <= 1")
    x0 = _check_positive("x0", x0)
    ode_tol = DEFAULT_TOL

    def target(z):
        return catenary_value_at(alpha, z, x0, ode_tol)

    lo, hi = 0.25 * x0, 4.0 * x0
    for _ in range(40):
        mid = math.sqrt(lo * hi)
        if target(lo) > target(mid) < target(hi):
            break
        if target(lo) <= target(mid):
            lo /= 2.0
        else:
            hi *= 2.0
    else:
        raise SearchFailure("could not bracket the optimal initial height")
    a, b = golden_section(target, lo, hi, tol=1e-3 * x0)
    a, b = 0.9 * a, 1.1 * b
    sens = lambda z: _height_sensitivity(alpha, z, x0, ode_tol)
    if not (sens(a) < 0 < sens(b)):
        raise SearchFailure("stationarity condition is not bracketed")
    z_star = bisect(sens, a, b, tol=tol * x0)
    return z_star, target(z_star)


@dataclass(frozen=True)
class WinglikeProfile:
    """Arclength-parametrised generating curve of a winglike surface, stored for ``s <= 0``."""

    alpha: float
    lam: float
    c: float
    s: np.ndarray
    x: np.ndarray
    z: np.ndarray
    theta: np.ndarray
    s0: Optional[float] = None
    waist_radius: Optional[float] = None
    waist_height: Optional[float] = None
    termination: str = REACHED_SMIN

    def dtheta(self, i) -> np.ndarray:
        return (self.alpha * np.cos(self.theta[i]) / self.z[i]
                - np.sin(self.theta[i]) / self.x[i])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "x", "z", "theta"])
            for row in zip(self.s, self.x, self.z, self.theta):
                w.writerow([_fmt(v) for v in row])


def _locate_waist(alpha, s, x, z, th):
    """First crossing of theta = -pi/2 (cubic Hermite inside the bracketing interval)."""
    below = np.nonzero(th <= -math.pi / 2)[0]
    if len(below) == 0:
        return None, None, None
    j = int(below[0])
    if th[j] == -math.pi / 2 or j == 0:
        return float(s[j]), float(x[j]), float(z[j])
    i = j - 1
    dth = lambda k: alpha * math.cos(th[k]) / z[k] - math.sin(th[k]) / x[k]
    s0 = hermite_root(s[i], s[j], th[i], th[j], dth(i), dth(j), level=-math.pi / 2)
    xw = hermite(s[i], s[j], x[i], x[j], math.cos(th[i]), math.cos(th[j]), s0)
    zw = hermite(s[i], s[j], z[i], z[j], math.sin(th[i]), math.sin(th[j]), s0)
    return float(s0), float(xw), float(zw)


def solve_winglike(alpha: float, lam: float, c: float, s_min: float = -20.0,
                   tol: float = DEFAULT_TOL, n_samples: int = 4001) -> WinglikeProfile:
    """Integrate the winglike system backwards in arclength from ``(lam, c, 0)``.

    Samples are ordered by decreasing ``s`` (``s[0] = 0``).  The waist event
    ``theta = -pi/2`` is recorded when it occurs; reaching the axis (or, for
    ``alpha < 0``, the plane ``z = 0``) stops the integration and is reported
    through ``termination``.
    """
    alpha = check_alpha(alpha)
    lam = _check_positive("lambda", lam)
    c = _check_positive("c", c)
    s_min = float(s_min)
    if not s_min < 0:
        raise InvalidParameter("s_min must be negative")
    tol = _check_tol(tol)

    def rhs(_s, y):
        x, z, th = y
        ct, st = math.cos(th), math.sin(th)
        return [ct, st, alpha * ct / z - st / x]

    def axis(_s, y):
        return y[0] - AXIS_EPS * lam
    axis.terminal = True

    def floor(_s, y):
        return y[1] - AXIS_EPS * c
    floor.terminal = True

    sol = _run(rhs, (0.0, s_min), [lam, c, 0.0], tol, (axis, floor))
    if sol.status == -1:
        raise IntegrationFailure(sol.message)
    if sol.status == 1:
        termination = AXIS_COLLISION if len(sol.t_events[0]) else REACHED_FLOOR
    else:
        termination = REACHED_SMIN
    s_end = float(sol.t[-1])
    grid = np.unique(np.concatenate([sol.t, np.linspace(0.0, s_end, n_samples)]))[::-1]
    yy = sol.sol(grid)
    s0, xw, zw = _locate_waist(alpha, grid, yy[0], yy[1], yy[2])
    return WinglikeProfile(alpha=alpha, lam=lam, c=c, s=grid, x=yy[0], z=yy[1], theta=yy[2],
                           s0=s0, waist_radius=xw, waist_height=zw,
                           termination=termination)


def winglike_exit_height(profile: WinglikeProfile, R: float) -> Optional[float]:
    """Height ``z(s1)`` at the first ``s1 < s0`` beyond the waist with ``x(s1) = R``.

    Returns None when the profile has no waist, when the waist is already wider
    than ``R``, or when radius ``R`` is not reached before the end of the samples.
    """
    R = _check_positive("R", R)
    if profile.s0 is None or profile.waist_radius is None or profile.waist_radius >= R:
        return None
    s, x, z, th = profile.s, profile.x, profile.z, profile.theta
    past = np.nonzero((s < profile.s0) & (x >= R))[0]
    if len(past) == 0:
        return None
    j = int(past[0])
    i = j - 1
    if s[i] > profile.s0:
        # bracket starts at the waist itself
        si, xi, zi, ti = profile.s0, profile.waist_radius, profile.waist_height, -math.pi / 2
    else:
        si, xi, zi, ti = s[i], x[i], z[i], th[i]
    s1 = hermite_root(si, s[j], xi, x[j], math.cos(ti), math.cos(th[j]), level=R)
    return float(hermite(si, s[j], zi, z[j], math.sin(ti), math.sin(th[j]), s1))
