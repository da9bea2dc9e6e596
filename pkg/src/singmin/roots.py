"""Bracketing root finders, golden-section search and cubic Hermite helpers."""

from __future__ import annotations

import math
from typing import Callable

from .errors import SearchFailure

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def bisect(g: Callable[[float], float], a: float, b: float, tol: float = 1e-12,
           max_iter: int = 200) -> float:
    """Root of ``g`` in ``[a, b]`` by bisection; stops when the bracket is narrower than ``tol``."""
    ga, gb = g(a), g(b)
    if ga == 0.0:
        return a
    if gb == 0.0:
        return b
    if (ga > 0) == (gb > 0):
        raise SearchFailure(f"no sign change on [{a}, {b}]: g={ga}, {gb}")
    for _ in range(max_iter):
        if abs(b - a) < tol:
            break
        m = 0.5 * (a + b)
        if m == a or m == b:
            break
        gm = g(m)
        if gm == 0.0:
            return m
        if (gm > 0) == (ga > 0):
            a, ga = m, gm
        else:
            b, gb = m, gm
    return 0.5 * (a + b)


def expand_bracket(g: Callable[[float], float], lo: float, hi: float, factor: float = 2.0,
                   max_iter: int = 60) -> tuple[float, float]:
    """Grow ``[lo, hi]`` geometrically (positive axis) until ``g`` changes sign."""
    if not 0 < lo < hi:
        raise SearchFailure("bracket must satisfy 0 < lo < hi")
    glo, ghi = g(lo), g(hi)
    for _ in range(max_iter):
        if (glo > 0) != (ghi > 0):
            return lo, hi
        # move the end whose value is closer to the root side
        if abs(glo) < abs(ghi):
            lo /= factor
            glo = g(lo)
        else:
            hi *= factor
            ghi = g(hi)
    raise SearchFailure(f"could not bracket a root, last bracket [{lo}, {hi}]")


def golden_section(f: Callable[[float], float], a: float, b: float,
                   tol: float = 1e-8) -> tuple[float, float]:
    """Shrink ``[a, b]`` around the minimum of a unimodal ``f`` to width below ``tol``."""
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        return a, b
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(n - 1):
        if yc < yd:
            b, d, yd = d, c, yc
            h *= INV_PHI
            c = a + INV_PHI2 * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= INV_PHI
            d = a + INV_PHI * h
            yd = f(d)
    return (a, d) if yc < yd else (c, b)


def hermite(t0: float, t1: float, y0: float, y1: float, d0: float, d1: float, t: float) -> float:
    """Cubic Hermite interpolant through (t0, y0, d0) and (t1, y1, d1), evaluated at ``t``."""
    h = t1 - t0
    u = (t - t0) / h
    h00 = (1 + 2 * u) * (1 - u) ** 2
    h10 = u * (1 - u) ** 2
    h01 = u * u * (3 - 2 * u)
    h11 = u * u * (u - 1)
    return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1


def hermite_root(t0: float, t1: float, y0: float, y1: float, d0: float, d1: float,
                 level: float = 0.0) -> float:
    """Crossing of ``level`` by the Hermite cubic on ``[t0, t1]``; endpoint values must bracket it."""
    return bisect(lambda t: hermite(t0, t1, y0, y1, d0, d1, t) - level,
                  t0, t1, tol=1e-15 * max(1.0, abs(t0) + abs(t1)))
