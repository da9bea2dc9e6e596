"""Dirichlet problem for singular minimal graphs ``z = u(x, y)``.

The equation ``div(Du / W) = alpha / (u W)``, ``W = sqrt(1 + |Du|^2)``, is
discretised in conservative form on a Cartesian grid.  Each interior node
couples to its four axis neighbours through face fluxes ``a_f * du/dn`` with
``a_f = 1 / sqrt(1 + (du/dn)^2 + (du/dt)^2)``; the tangential derivative on a
face is the mean of the nodal tangential differences at both ends.  Disk
domains use Shortley-Weller cut cells: a neighbour outside the disk is
replaced by the crossing of the grid line with the circle, and the boundary
data are evaluated there.

The discrete residual is reported as ``alpha / (u W) - div(Du / W)``.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InvalidParameter, LinearSolveFailure, NoConvergence
from .profiles import MeridianProfile, check_alpha, solve_meridian
from .roots import bisect

BoundaryData = Union[float, Callable[[np.ndarray, np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class Domain2D:
    kind: str
    nx: int
    ny: int
    x_lo: float = 0.0
    x_hi: float = 1.0
    y_lo: float = 0.0
    y_hi: float = 1.0
    center: tuple = (0.0, 0.0)
    radius: float = 0.0

    def __post_init__(self):
        if self.kind not in ("rectangle", "disk"):
            raise InvalidParameter(f"unknown domain kind {self.kind!r}")
        if self.nx < 16 or self.ny < 16:
            raise InvalidParameter("grid must have at least 16 cells per axis")
        if not (self.x_hi > self.x_lo and self.y_hi > self.y_lo):
            raise InvalidParameter("domain extents must be positive")

    @classmethod
    def rectangle(cls, x_lo, x_hi, y_lo, y_hi, nx, ny=None) -> "Domain2D":
        return cls("rectangle", int(nx), int(ny or nx), float(x_lo), float(x_hi),
                   float(y_lo), float(y_hi))

    @classmethod
    def disk(cls, center, radius, n) -> "Domain2D":
        cx, cy = map(float, center)
        if not radius > 0:
            raise InvalidParameter("disk radius must be positive")
        return cls("disk", int(n), int(n), cx - radius, cx + radius, cy - radius, cy + radius,
                   (cx, cy), float(radius))

    @property
    def hx(self) -> float:
        return (self.x_hi - self.x_lo) / self.nx

    @property
    def hy(self) -> float:
        return (self.y_hi - self.y_lo) / self.ny

    @property
    def area(self) -> float:
        if self.kind == "disk":
            return math.pi * self.radius ** 2
        return (self.x_hi - self.x_lo) * (self.y_hi - self.y_lo)

    def grid_coords(self):
        xs = self.x_lo + self.hx * np.arange(self.nx + 1)
        ys = self.y_lo + self.hy * np.arange(self.ny + 1)
        return np.meshgrid(xs, ys, indexing="ij")


class _Stencil:
    """Index structure and sparse difference operators for one domain.

    Points are ordered: unknown interior nodes first, then boundary points.
    """

    def __init__(self, dom: Domain2D):
        self.dom = dom
        X, Y = dom.grid_coords()
        nx, ny = dom.nx, dom.ny
        if dom.kind == "rectangle":
            inside = np.zeros(X.shape, dtype=bool)
            inside[1:-1, 1:-1] = True
        else:
            cx, cy = dom.center
            r = np.hypot(X - cx, Y - cy)
            inside = r < dom.radius * (1 - 1e-12)
        self.inside = inside
        ij_int = np.argwhere(inside)
        n_int = len(ij_int)
        node_id = -np.ones(X.shape, dtype=int)
        node_id[inside] = np.arange(n_int)  # row-major order matches argwhere
        pts = [np.column_stack([X[inside], Y[inside]])]
        bpts: list[tuple[float, float]] = []
        bkey: dict = {}
        grid_bnd: dict = {}
        if dom.kind == "rectangle":
            for i, j in np.argwhere(~inside):
                key = (int(i), int(j))
                bkey[key] = grid_bnd[key] = n_int + len(bpts)
                bpts.append((X[key], Y[key]))

        def boundary_point(i, j, di, dj):
            """Index and distance of the boundary point met going from node (i, j) along (di, dj)."""
            if dom.kind == "rectangle":
                return bkey[(int(i + di), int(j + dj))], dom.hx if di else dom.hy
            px, py = X[i, j] - dom.center[0], Y[i, j] - dom.center[1]
            h = dom.hx if di else dom.hy
            # |p + t e| = R along the grid line, 0 < t <= h
            if di:
                t = math.sqrt(dom.radius ** 2 - py ** 2) - di * px
            else:
                t = math.sqrt(dom.radius ** 2 - px ** 2) - dj * py
            t = min(max(t, 1e-12 * h), h)
            key = (i, j, di, dj)
            bkey[key] = n_int + len(bpts)
            bpts.append((X[i, j] + di * t, Y[i, j] + dj * t))
            return bkey[key], t

        dirs = {"E": (1, 0), "W": (-1, 0), "N": (0, 1), "S": (0, -1)}
        nb = {d: np.empty(n_int, dtype=int) for d in dirs}
        hh = {d: np.empty(n_int) for d in dirs}
        for k, (i, j) in enumerate(ij_int):
            for d, (di, dj) in dirs.items():
                ii, jj = i + di, j + dj
                if inside[ii, jj]:
                    nb[d][k] = node_id[ii, jj]
                    hh[d][k] = dom.hx if di else dom.hy
                else:
                    nb[d][k], hh[d][k] = boundary_point(i, j, di, dj)

        self.n_int = n_int
        self.ij = ij_int
        self.node_id = node_id
        self.grid_bnd = grid_bnd
        self.points = np.vstack(pts + [np.array(bpts).reshape(-1, 2)])
        self.n_pts = len(self.points)
        self.nb, self.h = nb, hh
        self._build_operators()

    def _central(self, plus, minus, hp, hm, rows=None):
        """Second-order (non-uniform) first-derivative rows at the nodes ``rows``."""
        n = len(plus)
        rows = np.arange(n) if rows is None else rows
        denom = hp * hm * (hp + hm)
        cols = np.concatenate([plus, minus, rows])
        vals = np.concatenate([hm * hm / denom, -hp * hp / denom, (hp * hp - hm * hm) / denom])
        r = np.concatenate([np.arange(n)] * 3)
        return sp.csr_matrix((vals, (r, cols)), shape=(n, self.n_pts))

    def _build_operators(self):
        n, N = self.n_int, self.n_pts
        nb, h = self.nb, self.h
        ids = np.arange(n)
        self.Dx = self._central(nb["E"], nb["W"], h["E"], h["W"], ids)
        self.Dy = self._central(nb["N"], nb["S"], h["N"], h["S"], ids)

        # tangential derivatives at rectangle boundary points, along their edge
        dom = self.dom
        tan_x: dict[int, tuple] = {}
        tan_y: dict[int, tuple] = {}
        if dom.kind == "rectangle":
            gid = -np.ones((dom.nx + 1, dom.ny + 1), dtype=int)
            gid[self.inside] = self.node_id[self.inside]
            for (i, j), p in self.grid_bnd.items():
                gid[i, j] = p
            for (i, j), p in self.grid_bnd.items():
                if i in (0, dom.nx) and 0 < j < dom.ny:
                    tan_y[p] = (gid[i, j + 1], gid[i, j - 1], dom.hy)
                if j in (0, dom.ny) and 0 < i < dom.nx:
                    tan_x[p] = (gid[i + 1, j], gid[i - 1, j], dom.hx)
        self._tan_x, self._tan_y = tan_x, tan_y

        # row p of Ty_all / Tx_all: tangential derivative available at point p
        def extend(Dint, tan):
            Dc = Dint.tocoo()
            rows, cols, vals = [Dc.row], [Dc.col], [Dc.data]
            avail = np.zeros(N, dtype=bool)
            avail[:n] = True
            for p, (a, b, ht) in tan.items():
                rows.append(np.array([p, p]))
                cols.append(np.array([a, b]))
                vals.append(np.array([0.5 / ht, -0.5 / ht]))
                avail[p] = True
            M = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                              shape=(N, N))
            return M, avail

        Ty_all, avail_y = extend(self.Dy, tan_y)
        Tx_all, avail_x = extend(self.Dx, tan_x)
        hbar_x = 0.5 * (h["E"] + h["W"])
        hbar_y = 0.5 * (h["N"] + h["S"])
        blocks_n, blocks_t, s_vals = [], [], []
        for d in ("E", "W", "N", "S"):
            horizontal = d in ("E", "W")
            T_all, avail = (Ty_all, avail_y) if horizontal else (Tx_all, avail_x)
            q = nb[d]
            hf = h[d]
            Dn = sp.csr_matrix((np.concatenate([1.0 / hf, -1.0 / hf]),
                                (np.concatenate([ids, ids]), np.concatenate([q, ids]))),
                               shape=(n, N))
            both = avail[q]
            wk = np.where(both, 0.5, 1.0)
            wq = np.where(both, 0.5, 0.0)
            Sel = sp.csr_matrix((np.concatenate([wk, wq]),
                                 (np.concatenate([ids, ids]), np.concatenate([ids, q]))),
                                shape=(n, N))
            blocks_n.append(Dn)
            blocks_t.append(Sel @ T_all)
            s_vals.append(1.0 / (hbar_x if horizontal else hbar_y))
        self.n_faces = 4 * n
        self.Dn = sp.vstack(blocks_n).tocsr()
        self.Tf = sp.vstack(blocks_t).tocsr()
        f = np.arange(4 * n)
        self.S = sp.csr_matrix((np.concatenate(s_vals), (f % n, f)), shape=(n, 4 * n))

    def residual(self, U: np.ndarray, alpha: float) -> np.ndarray:
        n_ = self.Dn @ U
        t_ = self.Tf @ U
        a = 1.0 / np.sqrt(1.0 + n_ * n_ + t_ * t_)
        gx, gy = self.Dx @ U, self.Dy @ U
        w = np.sqrt(1.0 + gx * gx + gy * gy)
        u = U[: self.n_int]
        return alpha / (u * w) - self.S @ (a * n_)

    def jacobian(self, U: np.ndarray, alpha: float) -> sp.csr_matrix:
        """Derivative of ``residual`` with respect to the interior unknowns."""
        n_ = self.Dn @ U
        t_ = self.Tf @ U
        a = 1.0 / np.sqrt(1.0 + n_ * n_ + t_ * t_)
        a3 = a ** 3
        gx, gy = self.Dx @ U, self.Dy @ U
        w = np.sqrt(1.0 + gx * gx + gy * gy)
        u = U[: self.n_int]
        dflux = (sp.diags(a3 * (1.0 + t_ * t_)) @ self.Dn
                 - sp.diags(a3 * n_ * t_) @ self.Tf)
        dw = sp.diags(gx / w) @ self.Dx + sp.diags(gy / w) @ self.Dy
        E = sp.eye(self.n_int, self.n_pts, format="csr")
        J = (-sp.diags(alpha / (u * u * w)) @ E
             - sp.diags(alpha / (u * w * w)) @ dw
             - self.S @ dflux)
        return J.tocsc()[:, : self.n_int].tocsr()


@dataclass(frozen=True)
class GraphSolution:
    domain: Domain2D
    alpha: float
    u_interior: np.ndarray
    boundary_values: np.ndarray
    residual_norm: float
    newton_iters: int
    history: tuple = ()
    stencil: _Stencil = field(default=None, repr=False, compare=False)

    @property
    def U(self) -> np.ndarray:
        return np.concatenate([self.u_interior, self.boundary_values])

    def points(self):
        """``(xy, u)`` over all nodes; grid order ``i * (ny + 1) + j`` for rectangles."""
        st = self.stencil
        if self.domain.kind == "rectangle":
            X, Y = self.domain.grid_coords()
            return np.column_stack([X.ravel(), Y.ravel()]), self.grid().ravel()
        return st.points, self.U

    def grid(self) -> np.ndarray:
        """Values on the ``(nx+1, ny+1)`` grid; NaN at grid nodes outside a disk."""
        st = self.stencil
        G = np.full((self.domain.nx + 1, self.domain.ny + 1), np.nan)
        G[st.inside] = self.u_interior[st.node_id[st.inside]]
        for (i, j), p in st.grid_bnd.items():
            G[i, j] = self.U[p]
        return G

    def to_csv(self, path) -> None:
        xy, u = self.points()
        with open(path, "w") as fh:
            fh.write("x,y,u\n")
            for (x, y), v in zip(xy, u):
                fh.write(f"{x:.17g},{y:.17g},{v:.17g}\n")


def _boundary_values(bd: BoundaryData, xy: np.ndarray) -> np.ndarray:
    if callable(bd):
        vals = np.asarray(bd(xy[:, 0], xy[:, 1]), dtype=float)
        return np.broadcast_to(vals, (len(xy),)).astype(float)
    return np.full(len(xy), float(bd))


def _initial_guess(st: _Stencil, alpha: float, mean: float) -> np.ndarray:
    u0 = np.full(st.n_int, mean)
    if alpha > 0:
        dom = st.dom
        p = st.points[: st.n_int]
        if dom.kind == "disk":
            bump = 1.0 - ((p[:, 0] - dom.center[0]) ** 2 + (p[:, 1] - dom.center[1]) ** 2) / dom.radius ** 2
        else:
            sx = (p[:, 0] - dom.x_lo) * (dom.x_hi - p[:, 0]) / (0.5 * (dom.x_hi - dom.x_lo)) ** 2
            sy = (p[:, 1] - dom.y_lo) * (dom.y_hi - p[:, 1]) / (0.5 * (dom.y_hi - dom.y_lo)) ** 2
            bump = sx * sy
        u0 -= 0.05 * mean * bump
    return u0


def _stencil_for(domain: Domain2D) -> _Stencil:
    return _Stencil(domain)


def solve_dirichlet(alpha: float, domain: Domain2D, boundary_data: BoundaryData,
                    tol: float = 1e-10, max_iters: int = 50, verbose: bool = False,
                    initial: Optional[np.ndarray] = None) -> GraphSolution:
    """Damped Newton iteration for the discrete singular minimal graph equation.

    Trial steps are halved (up to 30 times) until the residual 2-norm decreases
    and ``u`` stays positive.  Raises ``NoConvergence`` when the residual max
    norm does not reach ``tol`` within ``max_iters`` iterations; for
    ``alpha > 0`` this is inconclusive about existence.
    """
    alpha = check_alpha(alpha)
    if not 0 < tol <= 1e-6:
        raise InvalidParameter("tol must lie in (0, 1e-6]")
    st = _stencil_for(domain)
    ub = _boundary_values(boundary_data, st.points[st.n_int:])
    if np.any(ub <= 0):
        raise InvalidParameter("boundary data must be positive")
    u = _initial_guess(st, alpha, float(ub.mean())) if initial is None else np.array(initial, float)
    U = np.concatenate([u, ub])
    R = st.residual(U, alpha)
    history = [float(np.abs(R).max())]
    if verbose:
        print(f"newton 0: |R|_inf = {history[-1]:.3e}", file=sys.stderr)
    it = 0
    while history[-1] > tol:
        if it >= max_iters:
            raise NoConvergence(f"no convergence after {max_iters} Newton iterations "
                                f"(|R|_inf = {history[-1]:.3e})")
        J = st.jacobian(U, alpha)
        try:
            du = spla.spsolve(J.tocsc(), -R)
        except RuntimeError as exc:  # singular factor
            raise LinearSolveFailure(str(exc)) from exc
        if not np.all(np.isfinite(du)):
            raise LinearSolveFailure("non-finite Newton step (singular Jacobian)")
        norm0 = np.linalg.norm(R)
        step = 1.0
        for _ in range(31):
            trial = U.copy()
            trial[: st.n_int] += step * du
            if trial[: st.n_int].min() > 0:
                Rt = st.residual(trial, alpha)
                if np.linalg.norm(Rt) < norm0 or np.abs(Rt).max() <= tol:
                    break
            step *= 0.5
        else:
            raise NoConvergence("line search failed: Newton stagnated or u -> 0")
        U, R = trial, Rt
        it += 1
        history.append(float(np.abs(R).max()))
        if verbose:
            print(f"newton {it}: |R|_inf = {history[-1]:.3e} (step {step:g})", file=sys.stderr)

    return GraphSolution(domain, alpha, U[: st.n_int].copy(), ub.copy(), history[-1], it,
                         tuple(history), st)


def injected_solution(alpha: float, domain: Domain2D, exact: Callable) -> GraphSolution:
    """Wrap the exact values of a known solution (no iteration) for truncation checks."""
    alpha = check_alpha(alpha)
    st = _stencil_for(domain)
    U = np.asarray(exact(st.points[:, 0], st.points[:, 1]), dtype=float)
    R = st.residual(U, alpha)
    return GraphSolution(domain, alpha, U[: st.n_int].copy(), U[st.n_int:].copy(),
                         float(np.abs(R).max()), 0, (), st)


def residual_field(solution: GraphSolution) -> np.ndarray:
    """Discrete residual on the ``(nx+1, ny+1)`` grid; NaN away from interior nodes."""
    st = solution.stencil
    R = st.residual(solution.U, solution.alpha)
    G = np.full((solution.domain.nx + 1, solution.domain.ny + 1), np.nan)
    G[st.inside] = R[st.node_id[st.inside]]
    return G


def regular_nodes(solution: GraphSolution) -> np.ndarray:
    """Grid mask of interior nodes whose whole stencil sits at full grid spacing.

    A node qualifies when it and its four neighbours have no cut-cell arm, so
    every face coefficient it touches uses uniform differences.
    """
    st = solution.stencil
    ok = np.ones(st.n_int, dtype=bool)
    for d in ("E", "W", "N", "S"):
        full = solution.domain.hx if d in ("E", "W") else solution.domain.hy
        ok &= np.isclose(st.h[d], full, rtol=1e-12, atol=0.0)
    deep = ok.copy()
    for d in ("E", "W", "N", "S"):
        q = st.nb[d]
        deep &= np.where(q < st.n_int, ok[np.minimum(q, st.n_int - 1)], True)
    reg = np.zeros_like(st.inside)
    reg[tuple(st.ij[deep].T)] = True
    return reg


def shoot_meridian(alpha: float, radius: float, height: float, tol: float = 1e-10) -> MeridianProfile:
    """Meridian through the circle of ``radius`` at ``height``, found by bisection on ``z0``."""
    alpha = check_alpha(alpha)
    x_end = radius * (1 + 1e-9)

    def miss(z0):
        prof = solve_meridian(alpha, z0, x_end, tol, n_samples=2)
        if prof.x_max < radius:
            return -height  # fell to the plane before reaching the radius
        return prof(radius) - height

    if alpha < 0:
        lo, hi = height * 1e-3, height
        while miss(hi) < 0:
            lo, hi = hi, 2 * hi
            if hi > 1e8 * height:
                raise InvalidParameter("no meridian reaches the requested circle")
        lo = max(lo, height)
    else:
        lo, hi = height * 1e-6, height
        if miss(hi) < 0:
            raise InvalidParameter("no meridian reaches the requested circle")
        # f(R; z0) is unimodal in z0 for alpha > 0: take the branch with z0 closest to height
        zs = np.geomspace(lo, hi, 60)
        ms = [miss(z) for z in zs]
        k = max(i for i in range(len(zs) - 1) if ms[i] < 0 <= ms[i + 1]) if any(m < 0 for m in ms) else None
        if k is None:
            raise InvalidParameter("no meridian reaches the requested circle")
        lo, hi = zs[k], zs[k + 1]
    z0 = bisect(miss, lo, hi, tol=1e-14 * hi)
    return solve_meridian(alpha, z0, radius * 1.0000001, tol)


def radial_compare(solution: GraphSolution, meridian: MeridianProfile) -> float:
    """Max over grid points of ``|u(x, y) - f(sqrt(x^2 + y^2))|`` for an origin-centred disk."""
    d = solution.domain
    if d.kind != "disk" or d.center != (0.0, 0.0):
        raise InvalidParameter("radial_compare needs a disk centred at the origin")
    if np.ptp(solution.boundary_values) > 1e-12 * abs(solution.boundary_values).max():
        raise InvalidParameter("radial_compare needs constant boundary data")
    if meridian.x_max < d.radius * (1 - 1e-12):
        raise InvalidParameter("meridian does not reach the disk radius")
    xy, u = solution.points()
    r = np.minimum(np.hypot(xy[:, 0], xy[:, 1]), meridian.x_max)
    return float(np.abs(u - meridian(r)).max())
