"""Triangle meshes of computed surfaces and the discrete geometry evaluated on them.

Curvature follows the cotangent-Laplacian convention: the mean-curvature
normal is ``L x = 2 H N`` where ``L`` uses mixed Voronoi areas, so a sphere
oriented towards its centre has ``H = 1/R``.  The weighted mean curvature for
the density ``z**alpha`` is ``H_phi = H - alpha * N_z / (2 z)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateGeometry, InvalidParameter, NoBoundary


def _directed_edges(triangles: np.ndarray) -> np.ndarray:
    return np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])


def _boundary_edge_array(triangles: np.ndarray) -> np.ndarray:
    """Directed edges whose reverse is not present, i.e. boundary edges."""
    d = _directed_edges(triangles)
    n = int(triangles.max()) + 1 if len(triangles) else 0
    fwd = d[:, 0].astype(np.int64) * n + d[:, 1]
    rev = d[:, 1].astype(np.int64) * n + d[:, 0]
    return d[~np.isin(fwd, rev)]


def _boundary_loops(triangles: np.ndarray) -> list[np.ndarray]:
    """Closed boundary cycles, oriented as their edges appear in the triangles."""
    nxt: dict[int, int] = {}
    for a, b in _boundary_edge_array(triangles).tolist():
        if a in nxt:
            raise InvalidParameter(f"non-manifold boundary at vertex {a}")
        nxt[a] = b
    loops = []
    while nxt:
        start = min(nxt)
        loop = [start]
        v = nxt.pop(start)
        while v != start:
            loop.append(v)
            if v not in nxt:
                raise InvalidParameter("open boundary chain")
            v = nxt.pop(v)
        loops.append(np.array(loop, dtype=int))
    return loops


@dataclass(frozen=True)
class TriMesh:
    vertices: np.ndarray
    triangles: np.ndarray
    boundary_loops: list = field(default=None)
    poles: tuple = ()

    def __post_init__(self):
        v = np.ascontiguousarray(self.vertices, dtype=float)
        t = np.ascontiguousarray(self.triangles, dtype=int)
        if v.ndim != 2 or v.shape[1] != 3 or t.ndim != 2 or t.shape[1] != 3:
            raise InvalidParameter("vertices must be (n, 3) and triangles (m, 3)")
        if np.any(v[:, 2] <= 0):
            raise InvalidParameter("all vertices must lie in the upper halfspace z > 0")
        directed = _directed_edges(t)
        keys = directed[:, 0].astype(np.int64) * len(v) + directed[:, 1]
        if len(np.unique(keys)) != len(keys):
            raise InvalidParameter("inconsistent triangle orientation or repeated edge")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        if self.boundary_loops is None:
            object.__setattr__(self, "boundary_loops", _boundary_loops(t))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def flipped(self) -> "TriMesh":
        loops = [loop[::-1].copy() for loop in self.boundary_loops]
        return TriMesh(self.vertices, self.triangles[:, ::-1].copy(), loops, self.poles)

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        for loop in self.boundary_loops:
            mask[loop] = True
        return mask

    def boundary_edges(self) -> np.ndarray:
        """Rows ``(a, b, c)``: boundary edge ``a -> b`` and the opposite vertex ``c`` of its triangle."""
        t = self.triangles
        n = self.n_vertices
        d = _directed_edges(t)
        opp = np.concatenate([t[:, 2], t[:, 0], t[:, 1]])
        keys = d[:, 0].astype(np.int64) * n + d[:, 1]
        order = np.argsort(keys)
        rows = []
        for loop in self.boundary_loops:
            a, b = loop, np.roll(loop, -1)
            q = a.astype(np.int64) * n + b
            pos = order[np.searchsorted(keys, q, sorter=order)]
            rows.append(np.column_stack([a, b, opp[pos]]))
        return np.vstack(rows) if rows else np.empty((0, 3), dtype=int)

    def edge_length_max(self) -> float:
        p = self.vertices[self.triangles]
        e = np.linalg.norm(p - np.roll(p, 1, axis=1), axis=2)
        return float(e.max())

    def to_obj(self, path) -> None:
        with open(path, "w") as fh:
            for x, y, z in self.vertices:
                fh.write(f"v {x:.17g} {y:.17g} {z:.17g}\n")
            for a, b, c in self.triangles + 1:
                fh.write(f"f {a} {b} {c}\n")


@dataclass(frozen=True)
class VertexField:
    values: np.ndarray
    reliable: np.ndarray

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["vertex_index", "value"])
            for i, v in enumerate(self.values):
                w.writerow([i, f"{v:.17g}"])


@dataclass(frozen=True)
class FluxReport:
    boundary_term: float
    interior_term: float
    residual: float


# -- constructors -----------------------------------------------------------------

def _grid_triangles(n_i: int, n_j: int, index, wrap_j: bool = False) -> np.ndarray:
    """Split each ``(i, j)`` cell into two triangles, counter-clockwise in (i, j)."""
    jmax = n_j if wrap_j else n_j - 1
    I, J = np.meshgrid(np.arange(n_i - 1), np.arange(jmax), indexing="ij")
    I, J = I.ravel(), J.ravel()
    a, b = index(I, J), index(I + 1, J)
    c, d = index(I + 1, (J + 1) % n_j), index(I, (J + 1) % n_j)
    tris = np.empty((2 * len(a), 3), dtype=int)
    tris[0::2] = np.column_stack([a, b, c])
    tris[1::2] = np.column_stack([a, c, d])
    return tris


def revolve(profile, x_range, n_azimuth: int = 64, n_meridian: int = 32) -> TriMesh:
    """Rotate ``z = f(x)`` about the vertical axis over ``x_lo <= x <= x_hi``.

    With ``x_lo = 0`` the mesh is closed at the pole by a single apex vertex.
    Normals point upwards (``N_z > 0`` where ``f`` is a graph).
    """
    x_lo, x_hi = map(float, x_range)
    if n_azimuth < 8 or n_meridian < 8:
        raise InvalidParameter("n_azimuth and n_meridian must be at least 8")
    if not (0 <= x_lo < x_hi <= profile.x_max * (1 + 1e-12)):
        raise InvalidParameter(f"x range [{x_lo}, {x_hi}] outside profile domain [0, {profile.x_max}]")
    xs = np.linspace(x_lo, min(x_hi, profile.x_max), n_meridian + 1)
    zs = np.asarray(profile(xs), dtype=float)
    th = 2 * np.pi * np.arange(n_azimuth) / n_azimuth
    pole = x_lo == 0.0
    rings = xs[1:] if pole else xs
    rz = zs[1:] if pole else zs
    verts = np.column_stack([
        np.outer(rings, np.cos(th)).ravel(),
        np.outer(rings, np.sin(th)).ravel(),
        np.repeat(rz, n_azimuth),
    ])
    off = 1 if pole else 0
    idx = lambda i, j: off + i * n_azimuth + j
    tris = _grid_triangles(len(rings), n_azimuth, idx, wrap_j=True)
    if pole:
        verts = np.vstack([[0.0, 0.0, zs[0]], verts])
        j = np.arange(n_azimuth)
        fan = np.column_stack([np.zeros_like(j), idx(0, j), idx(0, (j + 1) % n_azimuth)])
        tris = np.vstack([fan, tris])
    return TriMesh(verts, tris, poles=(0,) if pole else ())


def extrude(profile, y_range, n_x: int = 32, n_y: int = 32, x_range=None) -> TriMesh:
    """Catenary cylinder ``{(x, y, f(|x|))}`` with rulings along the y-axis."""
    y_lo, y_hi = map(float, y_range)
    x_lo, x_hi = map(float, x_range if x_range is not None else (-profile.x_max, profile.x_max))
    if not y_lo < y_hi or not x_lo < x_hi:
        raise InvalidParameter("empty x or y range")
    if max(abs(x_lo), abs(x_hi)) > profile.x_max * (1 + 1e-12):
        raise InvalidParameter("x range outside profile domain")
    if n_x < 1 or n_y < 1:
        raise InvalidParameter("n_x and n_y must be positive")
    xs = np.linspace(x_lo, x_hi, n_x + 1)
    ys = np.linspace(y_lo, y_hi, n_y + 1)
    zs = np.asarray(profile(np.abs(xs)), dtype=float)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    Z = np.broadcast_to(zs[:, None], X.shape)
    verts = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])
    tris = _grid_triangles(n_x + 1, n_y + 1, lambda i, j: i * (n_y + 1) + j)
    return TriMesh(verts, tris)


def graph_mesh(solution) -> TriMesh:
    """Triangulate a graph solution: grid cells for rectangles, Delaunay for disks."""
    xy, u = solution.points()
    if len(xy) < 3 or np.any(~np.isfinite(u)):
        raise InvalidParameter("degenerate solution grid")
    if solution.domain.kind == "rectangle":
        nx, ny = solution.domain.nx, solution.domain.ny
        tris = _grid_triangles(nx + 1, ny + 1, lambda i, j: i * (ny + 1) + j)
    else:
        from scipy.spatial import Delaunay
        tris = Delaunay(xy).simplices.copy()
        p = xy[tris]
        cross = ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                 - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0]))
        tris = tris[np.abs(cross) > 1e-14 * solution.domain.radius ** 2]
        cross = cross[np.abs(cross) > 1e-14 * solution.domain.radius ** 2]
        neg = cross < 0
        tris[neg] = tris[neg][:, ::-1]
    return TriMesh(np.column_stack([xy, u]), tris)


# -- metric quantities ---------------------------------------------------------------

def _triangle_geometry(mesh: TriMesh):
    p = mesh.vertices[mesh.triangles]
    n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    dbl = np.linalg.norm(n, axis=1)
    return p, n, dbl


def triangle_areas(mesh: TriMesh) -> np.ndarray:
    return 0.5 * _triangle_geometry(mesh)[2]


def area(mesh: TriMesh) -> float:
    return float(triangle_areas(mesh).sum())


def weighted_area(mesh: TriMesh, alpha: float) -> float:
    """Centroid-rule quadrature of the weighted area ``int z**alpha dM``."""
    zc = mesh.vertices[mesh.triangles, 2].mean(axis=1)
    return float(np.sum(triangle_areas(mesh) * zc ** alpha))


def boundary_length(mesh: TriMesh) -> list[float]:
    out = []
    for loop in mesh.boundary_loops:
        p = mesh.vertices[loop]
        out.append(float(np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1).sum()))
    return out


def _cotangents(p: np.ndarray) -> np.ndarray:
    """Cotangent of the angle at each corner of each triangle, shape (m, 3)."""
    cots = np.empty(p.shape[:2])
    for k in range(3):
        a = p[:, (k + 1) % 3] - p[:, k]
        b = p[:, (k + 2) % 3] - p[:, k]
        cr = np.linalg.norm(np.cross(a, b), axis=1)
        if np.any(cr <= 0):
            raise DegenerateGeometry("zero-area triangle")
        cots[:, k] = np.einsum("ij,ij->i", a, b) / cr
    return cots


def mixed_areas(mesh: TriMesh) -> np.ndarray:
    """Mixed Voronoi area per vertex (Voronoi region for non-obtuse triangles)."""
    p, _, dbl = _triangle_geometry(mesh)
    tri_area = 0.5 * dbl
    cots = _cotangents(p)
    t = mesh.triangles
    acc = np.zeros(mesh.n_vertices)
    obtuse = cots < 0
    any_obtuse = obtuse.any(axis=1)
    for k in range(3):
        j, l = (k + 1) % 3, (k + 2) % 3
        e_kj = np.sum((p[:, j] - p[:, k]) ** 2, axis=1)
        e_kl = np.sum((p[:, l] - p[:, k]) ** 2, axis=1)
        vor = (e_kj * cots[:, l] + e_kl * cots[:, j]) / 8.0
        val = np.where(any_obtuse, np.where(obtuse[:, k], tri_area / 2, tri_area / 4), vor)
        np.add.at(acc, t[:, k], val)
    return acc


def cotangent_laplacian(mesh: TriMesh) -> sp.csr_matrix:
    """Matrix ``L`` with ``(L u)_i = (1 / 2A_i) sum_j (cot a_ij + cot b_ij)(u_j - u_i)``."""
    p = mesh.vertices[mesh.triangles]
    cots = _cotangents(p)
    t = mesh.triangles
    rows, cols, vals = [], [], []
    for k in range(3):
        i, j = t[:, (k + 1) % 3], t[:, (k + 2) % 3]
        w = 0.5 * cots[:, k]
        rows += [i, j, i, j]
        cols += [j, i, i, j]
        vals += [w, w, -w, -w]
    n = mesh.n_vertices
    W = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n))
    A = mixed_areas(mesh)
    return sp.diags(1.0 / A) @ W


def vertex_normals(mesh: TriMesh) -> np.ndarray:
    """Angle-weighted unit normals, oriented by the triangle ordering."""
    p, n, dbl = _triangle_geometry(mesh)
    if np.any(dbl <= 0):
        raise DegenerateGeometry("zero-area triangle")
    nf = n / dbl[:, None]
    acc = np.zeros((mesh.n_vertices, 3))
    for k in range(3):
        a = p[:, (k + 1) % 3] - p[:, k]
        b = p[:, (k + 2) % 3] - p[:, k]
        cosang = np.einsum("ij,ij->i", a, b) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
        ang = np.arccos(np.clip(cosang, -1.0, 1.0))
        np.add.at(acc, mesh.triangles[:, k], nf * ang[:, None])
    return acc / np.linalg.norm(acc, axis=1)[:, None]


def mean_curvature(mesh: TriMesh) -> VertexField:
    L = cotangent_laplacian(mesh)
    Lx = L @ mesh.vertices
    N = vertex_normals(mesh)
    H = 0.5 * np.einsum("ij,ij->i", Lx, N)
    return VertexField(H, ~mesh.boundary_mask())


def weighted_mean_curvature(mesh: TriMesh, alpha: float) -> VertexField:
    """Per-vertex ``H_phi = H - alpha N_z / (2 z)``; boundary vertices are flagged unreliable."""
    H = mean_curvature(mesh)
    N = vertex_normals(mesh)
    z = mesh.vertices[:, 2]
    return VertexField(H.values - alpha * N[:, 2] / (2.0 * z), H.reliable)


def laplacian_height_gap(mesh: TriMesh) -> np.ndarray:
    """``L z - 2 H N_z`` at every vertex (meaningful on interior vertices only)."""
    L = cotangent_laplacian(mesh)
    Lx = L @ mesh.vertices
    N = vertex_normals(mesh)
    twoH = np.einsum("ij,ij->i", Lx, N)
    return Lx[:, 2] - twoH * N[:, 2]


def flux_identity(mesh: TriMesh, alpha: float) -> FluxReport:
    """Both sides of ``-oint z nu_z ds = int (1 + (alpha - 1) N_z^2) dM``.

    ``nu`` is the inward conormal taken in the plane of the triangle adjacent
    to each boundary edge; the line integral uses edge midpoints.
    """
    if not mesh.boundary_loops:
        raise NoBoundary("mesh has no boundary")
    V = mesh.vertices
    abc = mesh.boundary_edges()
    e = V[abc[:, 1]] - V[abc[:, 0]]
    ln = np.linalg.norm(e, axis=1)
    e /= ln[:, None]
    w = V[abc[:, 2]] - V[abc[:, 0]]
    nu = w - np.einsum("ij,ij->i", w, e)[:, None] * e
    nu /= np.linalg.norm(nu, axis=1)[:, None]
    zmid = 0.5 * (V[abc[:, 0], 2] + V[abc[:, 1], 2])
    bterm = -float(np.sum(zmid * nu[:, 2] * ln))
    _, n, dbl = _triangle_geometry(mesh)
    nz = n[:, 2] / dbl
    iterm = float(np.sum(0.5 * dbl * (1.0 + (alpha - 1.0) * nz ** 2)))
    return FluxReport(float(bterm), iterm, float(bterm - iterm))


def height_extrema_check(mesh: TriMesh, alpha: float) -> bool:
    """Max height (alpha > 0) or min height (alpha < 0) is attained on the boundary, up to one edge."""
    if not mesh.boundary_loops:
        return True
    z = mesh.vertices[:, 2]
    zb = z[mesh.boundary_mask()]
    slack = mesh.edge_length_max()
    if alpha > 0:
        return bool(z.max() <= zb.max() + slack)
    return bool(z.min() >= zb.min() - slack)
