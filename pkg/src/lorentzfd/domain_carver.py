"""Carving the fundamental polyhedron F_e in the flat chart of E_e.

In chart coordinates ``c = (Re z, Im z, t)`` the carved set is

    F_e = Cl Int( slab  -  union_{x != u} K_x ),

where ``slab = {|t| <= tan(theta/2)}`` is ``E_e`` inside ``Q_u`` and ``K_x``
is the interior of ``Q_x`` in the chart.  On a convex cell ``C`` of the chart
``K_x`` is an open polyhedron: it is cut out by the planes ``l_g < 1`` for
``g = a(x) r_d^m`` whose ``I_g`` meets ``C`` on the correct sheet.  A sheet is
constant on the convex set ``C ∩ {l_g >= 1}`` so one test point decides it.

The region is kept as a list of disjoint convex cells; subtracting ``K_x``
splits a cell into at most one piece per cutting plane.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import shapely
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection, cKDTree
from scipy.spatial import QhullError
from shapely.geometry import MultiPolygon, Polygon

from .cover import GroupElement, act, inverse, mul_arrays, rotation_r0
from .groups import OrbitAtlas, f_bound
from .halfspaces import (
    HALF_PI,
    ChartPoint,
    chart_arrays_from,
    chart_from,
    chart_to,
    plane_coefficients,
)

log = logging.getLogger(__name__)

MIN_RADIUS = 1e-9      # Chebyshev radius below which a cell is a sliver
VERTEX_TOL = 1e-9      # incidence of vertices and planes
SNAP_TOL = 1e-7        # vertex welding
MIN_FACE_AREA = 1e-12
SLIVER_WIDTH = 1e-9
GRID = 1e-11           # precision grid of the planar overlays
PAIR_TOL = 1e-6


class CutoffTooLargeError(RuntimeError):
    pass


class NonCompactError(RuntimeError):
    pass


class PairingIncompleteError(RuntimeError):
    pass


# -- labels ---------------------------------------------------------------
# ("wedge", +1): t = +tan(theta/2), element r_d^-1
# ("wedge", -1): t = -tan(theta/2), element r_d
# ("cut", i, m): plane of a(x_i) r_d^m
# ("bound", j) / ("slab", j): artificial bounding planes


def label_element(label, atlas: OrbitAtlas) -> GroupElement:
    theta = atlas.group.theta
    if label[0] == "wedge":
        return rotation_r0(-2 * label[1] * theta)
    if label[0] == "cut":
        return atlas.element(label[1], label[2])
    raise ValueError(f"label {label} carries no group element")


def label_word(label, atlas: OrbitAtlas) -> str:
    if label[0] == "wedge":
        return "rd^-1" if label[1] > 0 else "rd"
    if label[0] == "cut":
        w, n = atlas.words[label[1]], label[2]
        head, sep, tail = w.rpartition(" . rd^")
        if sep:
            w, n = head, n + int(tail)
        return w if n == 0 else f"{w} . rd^{n}"
    return str(label)


def label_str(label) -> str:
    return ":".join(str(v) for v in label)


# -- convex cells -----------------------------------------------------------

@dataclass
class Cell:
    A: np.ndarray
    b: np.ndarray
    labels: list
    center: np.ndarray
    radius: float
    vertices: np.ndarray

    def contains(self, pts: np.ndarray, tol: float = VERTEX_TOL) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return np.all(pts @ self.A.T <= self.b + tol, axis=1)

    def depth(self, pts: np.ndarray) -> np.ndarray:
        """Signed distance to the cell boundary (positive inside)."""
        pts = np.atleast_2d(pts)
        norms = np.linalg.norm(self.A, axis=1)
        return np.min((self.b - pts @ self.A.T) / norms, axis=1)

    @property
    def chart_volume(self) -> float:
        return float(ConvexHull(self.vertices).volume)


def _chebyshev(A, b):
    norms = np.linalg.norm(A, axis=1)
    res = linprog(
        c=[0, 0, 0, -1.0],
        A_ub=np.hstack([A, norms[:, None]]),
        b_ub=b,
        bounds=[(None, None)] * 3 + [(0, 10.0)],
        method="highs",
    )
    if res.status != 0:
        return None, 0.0
    return res.x[:3], float(res.x[3])


def make_cell(A, b, labels) -> Cell | None:
    """Build a cell from ``A c <= b``; ``None`` if it has no interior."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    center, radius = _chebyshev(A, b)
    if center is None or radius < MIN_RADIUS:
        return None
    try:
        hs = HalfspaceIntersection(np.hstack([A, -b[:, None]]), center)
    except QhullError:
        return None
    V = hs.intersections
    V = V[np.all(np.isfinite(V), axis=1)]
    if len(V) < 4:
        return None
    V = _unique_rows(V, 1e-12)
    # drop redundant constraints: a facet needs three non-collinear vertices
    resid = np.abs(V @ A.T - b)
    keep = []
    for i in range(len(b)):
        on = V[resid[:, i] <= VERTEX_TOL * max(1.0, abs(b[i]))]
        if len(on) >= 3 and np.linalg.matrix_rank(on[1:] - on[0], tol=1e-12) >= 2:
            keep.append(i)
    return Cell(A[keep], b[keep], [labels[i] for i in keep], center, radius, V)


def _unique_rows(V, tol):
    key = np.round(V / tol).astype(np.int64)
    _, idx = np.unique(key, axis=0, return_index=True)
    return V[np.sort(idx)]


# -- cutters ----------------------------------------------------------------

@dataclass
class Cutter:
    label: tuple
    normal: np.ndarray
    offset: float  # the I side is normal . c + offset >= 1


@dataclass
class PrismCutters:
    """Planes of the coset of one orbit point, for the candidate m-range."""

    index: int
    x: complex
    f: float
    ms: np.ndarray
    N: np.ndarray
    D: np.ndarray
    rep: GroupElement


def _m_range(theta):
    M = int(math.floor(math.pi / theta + 1.0)) + 1
    return np.arange(-M, M + 1)


def prism_cutters(atlas: OrbitAtlas, i: int) -> PrismCutters:
    theta = atlas.group.theta
    ms = _m_range(theta)
    N, D = [], []
    for m in ms:
        n, d = plane_coefficients(atlas.element(i, int(m)))
        N.append(n)
        D.append(d)
    x = complex(atlas.points[i])
    return PrismCutters(i, x, float(f_bound(abs(x), theta)), ms, np.array(N), np.array(D), atlas.reps[i])


def cutter_set(atlas: OrbitAtlas, theta: float | None = None, margin: float | None = None) -> list[Cutter]:
    """Wedge planes plus the coset planes of every atlas point with ``f(|x|) > margin``.

    ``margin`` defaults to the atlas cutoff, so every atlas point contributes.
    """
    if len(atlas) == 0:
        raise ValueError("cutter_set needs a non-empty atlas")
    theta = atlas.group.theta if theta is None else theta
    T = math.tan(theta / 2)
    out = [Cutter(("wedge", 1), np.array([0.0, 0.0, 1.0 / T]), 0.0),
           Cutter(("wedge", -1), np.array([0.0, 0.0, -1.0 / T]), 0.0)]
    margin = atlas.eps if margin is None else margin
    fv = atlas.f_values
    for i in range(1, len(atlas)):
        if fv[i] <= margin:
            continue
        pc = prism_cutters(atlas, i)
        for m, n, d in zip(pc.ms, pc.N, pc.D):
            out.append(Cutter(("cut", i, int(m)), n, float(d)))
    return out


def _sheet_alpha(rep: GroupElement, pts: np.ndarray):
    """Lifted argument of ``rep^{-1} c`` for chart points ``c``."""
    z, a, r = chart_arrays_from(pts)
    _, alpha, _ = mul_arrays(-rep.z, -rep.alpha, rep.r, z, a, r)
    return alpha


# -- carving --------------------------------------------------------------

@dataclass
class CarveStats:
    processed: int = 0
    stop_index: int | None = None
    stop_f: float = 0.0
    splits: int = 0
    removed: int = 0
    used_points: list = field(default_factory=list)


def _cell_margin(cell: Cell) -> float:
    """Lower bound for ``|w| - |z|`` on the cell."""
    t = cell.vertices[:, 2]
    tmin = 0.0 if t.min() <= 0 <= t.max() else float(np.min(np.abs(t)))
    return math.sqrt(1 + tmin * tmin) - float(np.max(np.hypot(cell.vertices[:, 0], cell.vertices[:, 1])))


def initial_cells(theta: float, n_sub: int = 1, n_gon: int = 64) -> list[Cell]:
    """The wedge slab truncated by convex prisms that lie inside the chart."""
    T = math.tan(theta / 2)
    edges = np.linspace(-T, T, 2 * n_sub + 1)
    phis = 2 * math.pi * (np.arange(n_gon) + 0.5) / n_gon
    cells = []
    for j in range(2 * n_sub):
        lo, hi = edges[j], edges[j + 1]
        tmin = 0.0 if lo <= 0 <= hi else min(abs(lo), abs(hi))
        rho = (1 - 1e-6) * math.sqrt(1 + tmin * tmin) * math.cos(math.pi / n_gon)
        A = [[0, 0, 1.0], [0, 0, -1.0]]
        b = [hi, -lo]
        labels = [("wedge", 1) if j == 2 * n_sub - 1 else ("slab", j + 1),
                  ("wedge", -1) if j == 0 else ("slab", j)]
        for q, ph in enumerate(phis):
            A.append([math.cos(ph), math.sin(ph), 0.0])
            b.append(rho)
            labels.append(("bound", q))
        cells.append(make_cell(A, b, labels))
    return cells


def _subtract(cell: Cell, pc: PrismCutters, theta: float, tol: float = 1e-12):
    """``cell - K_x``; returns ``None`` when the cell is untouched, else the pieces."""
    V = cell.vertices
    L = V @ pc.N.T + pc.D  # (nv, nm)
    vmax = L.max(axis=0)
    active = np.nonzero(vmax > 1.0 + tol)[0]
    valid = []
    if len(active):
        probes = V[np.argmax(L[:, active], axis=0)]
        alpha0 = _sheet_alpha(pc.rep, probes)
        for j, a0 in zip(active, alpha0):
            if abs(a0 + pc.ms[j] * theta) < HALF_PI:
                valid.append(j)
    if not valid:
        return []
    vmin = L.min(axis=0)
    if any(vmin[j] >= 1.0 - tol for j in valid):
        return None
    # deepest cuts first keeps the pieces few
    valid.sort(key=lambda j: -vmax[j])
    pieces = []
    A, b, labels = list(cell.A), list(cell.b), list(cell.labels)
    for j in valid:
        n, d = pc.N[j], pc.D[j]
        lab = ("cut", pc.index, int(pc.ms[j]))
        # piece on the I side of this plane: -n.c <= d - 1
        piece = make_cell(np.vstack(A + [-n]), np.array(b + [d - 1.0]), labels + [lab])
        if piece is not None:
            pieces.append(piece)
        A.append(n)
        b.append(1.0 - d)
        labels.append(lab)
    return pieces


def carve_cells(atlas: OrbitAtlas, n_sub: int = 1) -> tuple[list[Cell], CarveStats]:
    """Subtract the prisms of the atlas from the slab, nearest orbit points first."""
    theta = atlas.group.theta
    cells = initial_cells(theta, n_sub)
    stats = CarveStats()
    fv = atlas.f_values
    for i in range(1, len(atlas)):
        margin = min(_cell_margin(c) for c in cells)
        if fv[i] < margin:
            stats.stop_index = i
            stats.stop_f = float(fv[i])
            break
        pc = prism_cutters(atlas, i)
        new_cells = []
        touched = False
        for c in cells:
            if fv[i] < _cell_margin(c):
                new_cells.append(c)
                continue
            res = _subtract(c, pc, theta)
            if res is None:
                new_cells.append(c)
            else:
                touched = True
                stats.splits += len(res) > 0
                stats.removed += len(res) == 0
                new_cells.extend(res)
        if touched:
            stats.used_points.append(i)
        cells = new_cells
        stats.processed = i
        if not cells:
            raise RuntimeError("carving removed every cell")
    return cells, stats


# -- boundary faces -----------------------------------------------------------

@dataclass
class Plane:
    normal: np.ndarray
    offset: float
    origin: np.ndarray
    e1: np.ndarray
    e2: np.ndarray

    @classmethod
    def from_coefficients(cls, n, d):
        """Plane ``n . c = d`` with ``n`` canonicalised to a unit vector."""
        s = np.linalg.norm(n)
        n, d = np.asarray(n) / s, d / s
        idx = int(np.argmax(np.abs(n) > 1e-9))
        if n[idx] < 0:
            n, d = -n, -d
        ref = np.eye(3)[int(np.argmin(np.abs(n)))]
        e1 = np.cross(n, ref)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(n, e1)
        return cls(n, float(d), n * d, e1, e2)

    def to2d(self, P):
        Q = np.atleast_2d(P) - self.origin
        return np.column_stack([Q @ self.e1, Q @ self.e2])

    def to3d(self, Q):
        Q = np.atleast_2d(Q)
        return self.origin + Q[:, :1] * self.e1 + Q[:, 1:2] * self.e2

    def distance(self, P):
        return np.atleast_2d(P) @ self.normal - self.offset


@dataclass
class Face:
    """A labelled planar boundary face of F_e (possibly several polygons)."""

    label: tuple
    plane: Plane
    sign: int               # outward normal = sign * plane.normal
    geometry: object        # shapely (Multi)Polygon in plane coordinates

    @property
    def outward(self):
        return self.sign * self.plane.normal

    @property
    def polygons(self):
        g = self.geometry
        return list(g.geoms) if isinstance(g, MultiPolygon) else [g]

    @property
    def area(self) -> float:
        return float(self.geometry.area)

    def corner_points(self) -> np.ndarray:
        pts = []
        for poly in self.polygons:
            for ring in [poly.exterior, *poly.interiors]:
                pts.extend(np.asarray(ring.coords)[:-1])
        return self.plane.to3d(np.array(pts))

    def distance(self, P) -> np.ndarray:
        P = np.atleast_2d(P)
        h = self.plane.distance(P)
        q = self.plane.to2d(P)
        d2 = shapely.distance(shapely.points(q), self.geometry)
        return np.hypot(h, d2)


def _cluster_planes(entries):
    """Group facet planes that coincide geometrically (within 1e-8)."""
    keys = np.array([np.append(e[0], e[1]) for e in entries])
    canon = []
    for n, d in zip(keys[:, :3], keys[:, 3]):
        idx = int(np.argmax(np.abs(n) > 1e-9))
        canon.append(np.append(n, d) * (1 if n[idx] > 0 else -1))
    canon = np.array(canon)
    tree = cKDTree(canon)
    parent = list(range(len(canon)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in sorted(tree.query_pairs(1e-8)):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    return [find(i) for i in range(len(canon))], canon


def boundary_faces(cells: list[Cell]) -> list[Face]:
    """Facets of the cell union that are not shared by two cells."""
    entries = []  # (unit normal, offset, cell index, label, vertex array)
    for ci, c in enumerate(cells):
        resid = c.vertices @ c.A.T - c.b
        for r in range(len(c.b)):
            on = c.vertices[np.abs(resid[:, r]) <= VERTEX_TOL * max(1.0, abs(c.b[r]))]
            if len(on) < 3:
                continue
            s = np.linalg.norm(c.A[r])
            entries.append((c.A[r] / s, c.b[r] / s, ci, c.labels[r], on))
    if not entries:
        return []
    roots, canon = _cluster_planes(entries)
    groups: dict[int, list[int]] = {}
    for e, root in enumerate(roots):
        groups.setdefault(root, []).append(e)

    faces = []
    for root in sorted(groups):
        members = groups[root]
        plane = Plane.from_coefficients(canon[root][:3], canon[root][3])
        polys = []
        for e in members:
            n = entries[e][0]
            sign = 1 if np.dot(n, plane.normal) > 0 else -1
            q = plane.to2d(entries[e][4])
            hull = ConvexHull(q) if len(q) >= 3 else None
            poly = Polygon(q[hull.vertices]) if hull is not None else Polygon()
            poly = shapely.set_precision(poly, GRID)
            polys.append((sign, entries[e][3], poly))
        for sign in (1, -1):
            opposite = shapely.union_all([p for s, _, p in polys if s == -sign], grid_size=GRID)
            by_label: dict = {}
            for s, lab, poly in polys:
                if s != sign or poly.is_empty:
                    continue
                part = shapely.difference(poly, opposite, grid_size=GRID) if not opposite.is_empty else poly
                if part.area > MIN_FACE_AREA:
                    by_label.setdefault(lab, []).append(part)
            for lab in sorted(by_label, key=label_str):
                geom = shapely.union_all(by_label[lab], grid_size=GRID)
                geom = _drop_slivers(geom)
                if geom is None:
                    continue
                faces.append(Face(lab, plane, sign, geom))
    return faces


def _clean_ring(coords, tol=1e-9):
    """Drop duplicate points, spike tips and vertices collinear with their neighbours."""
    P = np.asarray(coords)[:-1]
    while len(P) > 3:
        prev, nxt = np.roll(P, 1, axis=0), np.roll(P, -1, axis=0)
        dup = np.linalg.norm(P - prev, axis=1) < tol
        d = nxt - prev
        L = np.linalg.norm(d, axis=1)
        cross = np.abs(d[:, 0] * (P - prev)[:, 1] - d[:, 1] * (P - prev)[:, 0])
        # L < tol: both neighbours coincide, so the vertex is the tip of a spike
        bad = dup | (L < tol) | (cross < tol * np.maximum(L, tol))
        idx = np.nonzero(bad)[0]
        if not len(idx):
            break
        P = np.delete(P, idx[0], axis=0)
    return P


def _clean_polygon(poly):
    return Polygon(_clean_ring(poly.exterior.coords), [_clean_ring(r.coords) for r in poly.interiors])


def _drop_slivers(geom):
    polys = list(geom.geoms) if hasattr(geom, "geoms") else [geom]
    polys = [_clean_polygon(p) for p in polys if isinstance(p, Polygon) and p.area > MIN_FACE_AREA]
    # an overlay can also leave needles of width far below the weld tolerance
    polys = [p for p in polys if p.area > MIN_FACE_AREA and 2 * p.area / p.length > SLIVER_WIDTH]
    if not polys:
        return None
    return polys[0] if len(polys) == 1 else MultiPolygon(polys)


# -- mesh -------------------------------------------------------------------

@dataclass
class Mesh:
    vertices: np.ndarray
    triangles: np.ndarray           # (n, 3), outward oriented
    triangle_face: np.ndarray       # face index per triangle

    def edges(self):
        e = np.sort(np.vstack([self.triangles[:, [0, 1]], self.triangles[:, [1, 2]],
                               self.triangles[:, [2, 0]]]), axis=1)
        return np.unique(e, axis=0, return_counts=True)

    def is_closed(self) -> bool:
        _, counts = self.edges()
        if not np.all(counts == 2):
            return False
        directed = np.vstack([self.triangles[:, [0, 1]], self.triangles[:, [1, 2]],
                              self.triangles[:, [2, 0]]])
        return len(np.unique(directed, axis=0)) == len(directed)

    def euler_characteristic(self) -> int:
        used = np.unique(self.triangles)
        e, _ = self.edges()
        return int(len(used) - len(e) + len(self.triangles))

    def components(self) -> int:
        n = len(self.vertices)
        parent = list(range(n))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for a, b, c in self.triangles:
            for u, v in ((a, b), (b, c)):
                ru, rv = find(u), find(v)
                if ru != rv:
                    parent[max(ru, rv)] = min(ru, rv)
        return len({find(int(i)) for i in np.unique(self.triangles)})

    def enclosed_volume(self) -> float:
        V = self.vertices[self.triangles]
        return float(np.einsum("ij,ij->i", V[:, 0], np.cross(V[:, 1], V[:, 2])).sum() / 6.0)


def _weld(points: np.ndarray, tol: float = SNAP_TOL):
    tree = cKDTree(points)
    parent = list(range(len(points)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in sorted(tree.query_pairs(tol)):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = [find(i) for i in range(len(points))]
    uniq = sorted(set(roots))
    remap = {r: k for k, r in enumerate(uniq)}
    return points[uniq], np.array([remap[r] for r in roots])


def build_mesh(faces: list[Face]) -> Mesh:
    """Triangulate the boundary faces into a welded, outward-oriented mesh."""
    rings = []  # (face index, ring 3d points)
    for fi, f in enumerate(faces):
        for poly in f.polygons:
            for ring in [poly.exterior, *poly.interiors]:
                rings.append((fi, f.plane.to3d(np.asarray(ring.coords)[:-1])))
    allpts = np.vstack([r for _, r in rings])
    verts, _ = _weld(allpts)
    tree = cKDTree(verts)

    tris, tri_face = [], []
    for fi, f in enumerate(faces):
        for poly in f.polygons:
            new_rings = []
            for ring in [poly.exterior, *poly.interiors]:
                P3 = f.plane.to3d(np.asarray(ring.coords)[:-1])
                ids = []
                for a, b in zip(P3, np.roll(P3, -1, axis=0)):
                    ia = int(tree.query(a)[1])
                    ids.append(ia)
                    L = np.linalg.norm(b - a)
                    cand = tree.query_ball_point((a + b) / 2, L / 2 + SNAP_TOL)
                    on = []
                    for j in cand:
                        v = verts[j]
                        s = np.dot(v - a, b - a) / (L * L)
                        if 1e-9 < s < 1 - 1e-9 and np.linalg.norm(a + s * (b - a) - v) < SNAP_TOL:
                            on.append((s, j))
                    ids.extend(j for _, j in sorted(on))
                # drop consecutive duplicates created by welding
                ids = [v for k, v in enumerate(ids) if v != ids[k - 1]] if len(ids) > 1 else ids
                new_rings.append(ids)
            ext, holes = new_rings[0], new_rings[1:]
            q_ext = f.plane.to2d(verts[ext])
            q_holes = [f.plane.to2d(verts[h]) for h in holes]
            local_ids = ext + [i for h in holes for i in h]
            local_q = np.vstack([q_ext] + q_holes)
            ltree = cKDTree(local_q)
            refined = Polygon(q_ext, q_holes)
            if not refined.is_valid:
                refined = shapely.make_valid(refined)
            tri_geom = shapely.constrained_delaunay_triangles(refined)
            for t in tri_geom.geoms:
                c = np.asarray(t.exterior.coords)[:3]
                d, loc = ltree.query(c)
                if np.any(d > 1e-6):
                    raise RuntimeError("triangulation introduced an unexpected vertex")
                ids = [local_ids[j] for j in loc]
                if len(set(ids)) < 3:
                    continue
                P = verts[ids]
                nrm = np.cross(P[1] - P[0], P[2] - P[0])
                if np.linalg.norm(nrm) < 1e-18:
                    continue
                if np.dot(nrm, f.outward) < 0:
                    ids = [ids[0], ids[2], ids[1]]
                tris.append(ids)
                tri_face.append(fi)
    return Mesh(verts, np.array(tris, dtype=int), np.array(tri_face, dtype=int))


# -- the complex ---------------------------------------------------------------

@dataclass
class PolyComplex:
    atlas: OrbitAtlas
    cells: list[Cell]
    faces: list[Face]
    mesh: Mesh
    stats: CarveStats

    @property
    def theta(self) -> float:
        return self.atlas.group.theta

    def corner_vertices(self, tol: float = SNAP_TOL) -> np.ndarray:
        """Vertices of F_e: mesh points where the incident face normals span space."""
        V = self.mesh.vertices
        normals = [[] for _ in range(len(V))]
        for f in self.faces:
            for j in np.nonzero(f.distance(V) < tol)[0]:
                normals[j].append(f.outward)
        keep = [j for j, ns in enumerate(normals)
                if len(ns) >= 3 and np.linalg.matrix_rank(np.array(ns), tol=1e-6) == 3]
        return V[keep]

    def contains(self, pts, tol: float = 1e-9) -> np.ndarray:
        pts = np.atleast_2d(pts)
        out = np.zeros(len(pts), dtype=bool)
        for c in self.cells:
            out |= c.contains(pts, tol)
        return out

    def boundary_distance(self, pts) -> np.ndarray:
        pts = np.atleast_2d(pts)
        d = np.full(len(pts), np.inf)
        for f in self.faces:
            d = np.minimum(d, f.distance(pts))
        return d

    def margin(self) -> float:
        """Lower bound for ``|w| - |z|`` over the complex."""
        return min(_cell_margin(c) for c in self.cells)

    def face_labels(self) -> list:
        seen = []
        for f in self.faces:
            if f.label not in seen:
                seen.append(f.label)
        return seen

    def faces_with_label(self, label) -> list[Face]:
        return [f for f in self.faces if f.label == label]


def carve(atlas: OrbitAtlas, n_sub: int | None = None) -> PolyComplex:
    """Carve F_e from the atlas and certify that excluded prisms cannot cut it."""
    subdivisions = [n_sub] if n_sub else [1, 2, 4, 8]
    for ns in subdivisions:
        cells, stats = carve_cells(atlas, ns)
        faces = boundary_faces(cells)
        hits = [f for f in faces if f.label[0] == "bound"]
        if not hits:
            break
        log.info("carved region touches the bounding prism with %d slabs; refining", ns)
    else:
        f = max(hits, key=lambda f: f.area)
        c = f.corner_points().mean(axis=0)
        raise NonCompactError(
            f"carved region reaches the artificial bound near chart point {c.round(6).tolist()} "
            f"(direction {f.outward.round(6).tolist()}); the cutoff or atlas is insufficient")
    margin = min(_cell_margin(c) for c in cells)
    if atlas.eps >= margin:
        raise CutoffTooLargeError(
            f"cutoff eps={atlas.eps:g} is not below the margin {margin:.6g} of F_e; rerun with a smaller eps")
    if stats.stop_index is None and len(atlas) > 1 and atlas.f_values[-1] >= margin:
        raise CutoffTooLargeError("atlas exhausted before the f-bound dropped below the margin")
    mesh = build_mesh(faces)
    return PolyComplex(atlas, cells, faces, mesh, stats)


def certificate(cx: PolyComplex) -> dict:
    """Stability certificate: every prism not used for carving has ``f < margin``."""
    margin = cx.margin()
    fv = cx.atlas.f_values
    idx = cx.stats.stop_index
    worst = max(cx.atlas.eps, float(fv[idx]) if idx is not None else 0.0)
    return {"margin": margin, "max_excluded_f": worst, "eps": cx.atlas.eps, "passes": bool(worst < margin)}


# -- chart maps of group elements -------------------------------------------------

def map_chart_points(g: GroupElement, pts: np.ndarray) -> np.ndarray:
    """Apply ``g`` to chart points and return chart coordinates of the images.

    The images must lie on ``E_e``; callers only use this on ``E_e ∩ E_{g^-1}``.
    """
    z, a, r = chart_arrays_from(pts)
    zz, aa, rr = mul_arrays(g.z, g.alpha, g.r, z, a, r)
    return np.column_stack([zz.real, zz.imag, np.tan(aa)])


def chart_point_on_E(pts: np.ndarray, g: GroupElement) -> np.ndarray:
    """Residual ``l_g(c) - 1`` for chart points (zero on ``E_g``)."""
    n, d = plane_coefficients(g)
    return np.atleast_2d(pts) @ n + d - 1.0


# -- face pairing ---------------------------------------------------------------

@dataclass
class FacePair:
    label: tuple
    partner: tuple
    element: GroupElement
    hausdorff: float
    flag: tuple  # ((face, edge, vertex) on this side, image on the partner side)


def _inverse_label(label, atlas: OrbitAtlas):
    if label[0] == "wedge":
        return ("wedge", -label[1])
    g_inv = inverse(label_element(label, atlas))
    x = complex(g_inv.mobius(0j))
    i = atlas.index_of(x)
    if i is None:
        return None
    h = atlas.reps[i].inv() * g_inv
    m = -round(h.alpha / atlas.group.theta)
    return ("cut", i, int(m))


def region_hausdorff(A, B, step: float = 1e-3) -> float:
    """Hausdorff distance between planar regions, sampled along densified boundaries."""
    def one_way(X, Y):
        pts = shapely.get_coordinates(shapely.segmentize(X.boundary, step))
        return float(np.max(shapely.distance(shapely.points(pts), Y))) if len(pts) else 0.0
    return max(one_way(A, B), one_way(B, A))


def _merged(faces: list[Face]):
    plane = faces[0].plane
    geom = shapely.union_all([f.geometry for f in faces], grid_size=GRID)
    return plane, geom


def face_pairing(cx: PolyComplex, tol: float = PAIR_TOL) -> list[FacePair]:
    """Match each labelled face with the face of the inverse label.

    Raises :class:`PairingIncompleteError` if some face has no partner.
    """
    atlas = cx.atlas
    labels = cx.face_labels()
    out = []
    for lab in labels:
        partner = _inverse_label(lab, atlas)
        if partner is None or not cx.faces_with_label(partner):
            raise PairingIncompleteError(f"face {label_str(lab)} has no partner face")
        g_inv = inverse(label_element(lab, atlas))
        src_plane, src = _merged(cx.faces_with_label(lab))
        dst_plane, dst = _merged(cx.faces_with_label(partner))
        imgs = []
        worst_plane = 0.0
        polys = list(src.geoms) if hasattr(src, "geoms") else [src]
        for poly in polys:
            ext = map_chart_points(g_inv, src_plane.to3d(np.asarray(poly.exterior.coords)[:-1]))
            holes = [map_chart_points(g_inv, src_plane.to3d(np.asarray(h.coords)[:-1])) for h in poly.interiors]
            worst_plane = max(worst_plane, float(np.max(np.abs(dst_plane.distance(ext)))))
            imgs.append(Polygon(dst_plane.to2d(ext), [dst_plane.to2d(h) for h in holes]))
        image = shapely.union_all(imgs, grid_size=GRID)
        hd = max(region_hausdorff(image, dst), worst_plane)
        if hd > tol:
            raise PairingIncompleteError(
                f"face {label_str(lab)} mapped by its inverse misses {label_str(partner)} by {hd:.3g}")
        # one flag: first corner and its outgoing edge
        ring = np.asarray(polys[0].exterior.coords)[:-1]
        v0, v1 = src_plane.to3d(ring[0])[0], src_plane.to3d(ring[1])[0]
        w0, w1 = map_chart_points(g_inv, np.array([v0, v1]))
        out.append(FacePair(lab, partner, g_inv, hd,
                            ((label_str(lab), v0.tolist(), v1.tolist()),
                             (label_str(partner), w0.tolist(), w1.tolist()))))
    return out


def is_involution(pairs: list[FacePair]) -> bool:
    table = {p.label: p.partner for p in pairs}
    return all(table.get(table[a]) == a for a in table) and len(table) == len(pairs)


# -- volume ---------------------------------------------------------------------

def _tet_rule(n: int = 4):
    """Collapsed Gauss-Legendre rule on the unit tetrahedron."""
    x, w = np.polynomial.legendre.leggauss(n)
    x = (x + 1) / 2
    w = w / 2
    pts, wts = [], []
    for i in range(n):
        for j in range(n):
            for k in range(n):
                a, b, c = x[i], x[j], x[k]
                pts.append([a * (1 - b) * (1 - c), b * (1 - c), c])
                wts.append(w[i] * w[j] * w[k] * (1 - b) * (1 - c) ** 2)
    return np.array(pts), np.array(wts)


_TET_PTS, _TET_WTS = _tet_rule()


def _cell_integral(cell: Cell, fn) -> float:
    hull = ConvexHull(cell.vertices)
    c0 = cell.vertices.mean(axis=0)
    total = 0.0
    for simplex in hull.simplices:
        P = cell.vertices[simplex]
        J = np.column_stack([P[0] - c0, P[1] - c0, P[2] - c0])
        det = abs(np.linalg.det(J))
        if det < 1e-300:
            continue
        X = c0 + _TET_PTS @ J.T
        total += det * float(np.dot(_TET_WTS, fn(X)))
    return total


def lorentz_density(X: np.ndarray) -> np.ndarray:
    """Jacobian of the radial projection from the chart onto the group."""
    q = 1.0 + X[:, 2] ** 2 - X[:, 0] ** 2 - X[:, 1] ** 2
    return q ** -2


def volume(cx: PolyComplex | None) -> float:
    """Volume of the projected fundamental domain for the bi-invariant metric."""
    if cx is None or not cx.cells:
        return 0.0
    return sum(_cell_integral(c, lorentz_density) for c in cx.cells)


def chart_volume(cx: PolyComplex | None) -> float:
    """Plain Euclidean volume of the carved cells in chart coordinates."""
    if cx is None or not cx.cells:
        return 0.0
    return sum(c.chart_volume for c in cx.cells)


def expected_volume(signature, level: int) -> float:
    """``(pi^2 / 2) k (1 - sum 1/alpha_i)``: Haar volume of the quotient."""
    return 0.5 * math.pi ** 2 * level * (1.0 - sum(1.0 / a for a in signature.orders))


# -- symmetry -----------------------------------------------------------------

def hausdorff_points(A: np.ndarray, B: np.ndarray) -> float:
    da, _ = cKDTree(B).query(A)
    db, _ = cKDTree(A).query(B)
    return float(max(da.max(), db.max()))


def rotate_chart(pts: np.ndarray, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    R = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])
    return pts @ R.T


def rotation_residual(cx: PolyComplex) -> float:
    """Hausdorff distance between the vertex set and its image under conjugation by r_d."""
    V = cx.corner_vertices()
    return hausdorff_points(V, rotate_chart(V, 2 * cx.theta))


def reflection_residual(cx: PolyComplex) -> float:
    """Best residual of ``(z, t) -> (e^{i phi} conj z, -t)`` over vertex-aligning ``phi``.

    Reported only; the construction does not guarantee this symmetry.
    """
    V = cx.corner_vertices()
    top = V[np.argmax(V[:, 2])]
    refl = V * np.array([1, -1, -1])
    phi0 = math.atan2(top[1], top[0])
    best = math.inf
    bottom = V[V[:, 2] < V[:, 2].min() + 1e-9]
    for b in bottom:
        phi = math.atan2(b[1], b[0]) + phi0
        best = min(best, hausdorff_points(V, rotate_chart(refl, phi)))
    return best


# -- tiling verification ----------------------------------------------------------

@dataclass
class TilingReport:
    samples: int
    covered: int
    interior_double: int
    uncertified: int
    max_achievers: int
    shell: float

    def ok(self) -> bool:
        return self.covered == self.samples and self.interior_double == 0 and self.uncertified == 0


def sample_group_points(rng: np.random.Generator, n: int, disk_radius: float = 0.5,
                        arg_window: float = math.pi):
    """Random cover elements whose disk image lies within ``disk_radius``."""
    x = disk_radius * np.sqrt(rng.random(n)) * np.exp(2j * math.pi * rng.random(n))
    alpha = rng.uniform(-arg_window, arg_window, n)
    r = 1.0 / np.sqrt(1.0 - np.abs(x) ** 2)
    z = x * r * np.exp(1j * alpha)
    return z, alpha, r


def achiever_images(atlas: OrbitAtlas, z, alpha, r, rel_tol: float = 1e-9):
    """For each point, the chart images ``g^{-1} p`` of the boundary point ``p``.

    ``p`` is the point of the boundary of P over the element; ``g`` runs
    over achievers of the boundary section.  Returns ``(lam, images)``, with
    ``images[j]`` a list of ``(atlas index, m, chart point)``.
    """
    from .halfspaces import coset_sections

    theta = atlas.group.theta
    vals, ms, (bz, ba, br) = coset_sections(atlas, z, alpha, r)
    lam = vals.max(axis=1)
    images = []
    for j in range(len(lam)):
        row = []
        for i in np.nonzero(vals[j] >= lam[j] * (1 - rel_tol))[0]:
            for m in (ms[j, i] - 1, ms[j, i], ms[j, i] + 1):
                al = ba[j, i] + m * theta
                if abs(al) >= HALF_PI:
                    continue
                if 1.0 / (br[j, i] * math.cos(al)) > lam[j] * (1 + rel_tol):
                    continue
                zq = lam[j] * bz[j, i] * np.exp(1j * m * theta)
                row.append((int(i), int(m), np.array([zq.real, zq.imag, math.tan(al)])))
        images.append(row)
    return lam, images


def verify_tiling(cx: PolyComplex, n: int, rng: np.random.Generator, shell: float = 1e-7,
                  disk_radius: float = 0.5, arg_window: float = math.pi) -> TilingReport:
    """Every sampled element is covered by a translate of F_e, never twice in the interior."""
    atlas = cx.atlas
    z, alpha, r = sample_group_points(rng, n, disk_radius, arg_window)
    lam, images = achiever_images(atlas, z, alpha, r)
    gap = lam * (np.abs(r) - np.abs(z))
    uncertified = int(np.sum(gap <= atlas.eps))
    covered = double = 0
    max_ach = 0
    for row in images:
        pts = np.array([c for _, _, c in row])
        inside = cx.contains(pts, tol=shell)
        covered += bool(inside.any())
        interior = inside & (cx.boundary_distance(pts) > shell)
        double += int(interior.sum() > 1)
        max_ach = max(max_ach, len(row))
    return TilingReport(n, covered, double, uncertified, max_ach, shell)


def sample_interior(cx: PolyComplex, n: int, rng: np.random.Generator, depth: float = 1e-6) -> np.ndarray:
    """Random chart points at distance ``> depth`` from the boundary of F_e."""
    vols = np.array([c.chart_volume for c in cx.cells])
    out = []
    while len(out) < n:
        c = cx.cells[rng.choice(len(cx.cells), p=vols / vols.sum())]
        w = rng.dirichlet(np.ones(len(c.vertices)))
        q = c.center + 0.9 * (w @ c.vertices - c.center)
        if cx.boundary_distance(q)[0] > depth:
            out.append(q)
    return np.array(out)


def interior_achievers(cx: PolyComplex, n: int, rng: np.random.Generator) -> int:
    """Number of interior sample points whose only achiever is not the identity coset."""
    from .halfspaces import boundary_section

    bad = 0
    for c in sample_interior(cx, n, rng):
        bs = boundary_section(cx.atlas, chart_from(ChartPoint.from_array(c)))
        bad += bs.achievers != [(0, 0)] or abs(bs.value - 1.0) > 1e-9
    return bad


def translate_consistency(cx: PolyComplex, n: int, rng: np.random.Generator, tol: float = 1e-8) -> int:
    """Count samples ``a`` where the achievers at ``r_d a`` are not ``r_d`` times those at ``a``."""
    from .halfspaces import boundary_section
    from .cover import CoverPoint

    atlas = cx.atlas
    rd = atlas.group.r_d
    z, alpha, r = sample_group_points(rng, n, 0.4)
    bad = 0
    for j in range(n):
        a = CoverPoint(complex(z[j]), float(alpha[j]), float(r[j]))
        s0 = boundary_section(atlas, a)
        s1 = boundary_section(atlas, act(rd, a))
        g0 = [rd * atlas.element(i, m) for i, m in s0.achievers]
        g1 = [atlas.element(i, m) for i, m in s1.achievers]
        ok = abs(s0.value - s1.value) <= tol * s0.value and len(g0) == len(g1)
        ok = ok and all(min(g.residual(h) for h in g1) < tol for g in g0)
        bad += not ok
    return bad


def euclideanize(cx: PolyComplex) -> Mesh:
    """The boundary mesh with chart coordinates read as Euclidean coordinates."""
    return cx.mesh


def polyhedron_counts(cx: PolyComplex) -> tuple[int, int, int]:
    """``(V, E, F)`` of the polyhedral boundary of F_e.

    Feature edges are mesh edges between different faces; chains of them
    are traced from corner to corner, so T-junction points are not counted.
    """
    mesh = cx.mesh
    corners = cKDTree(mesh.vertices).query(cx.corner_vertices())[1]
    corner_set = set(int(c) for c in corners)
    owner: dict = {}
    for t, f in zip(mesh.triangles, mesh.triangle_face):
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            owner.setdefault((min(a, b), max(a, b)), set()).add(int(f))
    feature = [e for e, fs in owner.items() if len(fs) > 1]
    adj: dict = {}
    for a, b in feature:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    seen = set()
    n_edges = 0
    for c in sorted(corner_set):
        for nb in adj.get(c, []):
            if (min(c, nb), max(c, nb)) in seen:
                continue
            n_edges += 1
            prev, cur = c, nb
            seen.add((min(prev, cur), max(prev, cur)))
            while cur not in corner_set:
                nxt = [v for v in adj[cur] if v != prev]
                if not nxt:
                    break
                prev, cur = cur, nxt[0]
                seen.add((min(prev, cur), max(prev, cur)))
    # face pieces: triangles of one face joined across non-feature edges
    parent = list(range(len(mesh.triangles)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    tri_of: dict = {}
    for ti, t in enumerate(mesh.triangles):
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            tri_of.setdefault((min(a, b), max(a, b)), []).append(ti)
    for e, ts in tri_of.items():
        if len(owner[e]) == 1:
            for u in ts[1:]:
                ru, rv = find(ts[0]), find(u)
                if ru != rv:
                    parent[max(ru, rv)] = min(ru, rv)
    n_faces = len({find(i) for i in range(len(parent))})
    return len(corner_set), n_edges, n_faces
