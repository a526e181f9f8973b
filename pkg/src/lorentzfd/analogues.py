"""Two-dimensional analogues of the construction.

In the Euclidean plane the cyclic group of order m acting on the unit
circle gives a regular m-gon whose faces project radially onto m equal arcs.
In the Minkowski plane E^{1,1} the boosts ``z(kd, +-1)`` acting on the
hyperbola ``<a, a> = -1`` give a piecewise linear curve whose faces project
onto parameter segments of length ``d``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import HalfspaceIntersection


class UnboundedPolytopeError(ValueError):
    pass


@dataclass(frozen=True)
class PlanePoint:
    x: float
    y: float
    metric: str = "euclidean"  # or "minkowski"

    def form(self, other: "PlanePoint") -> float:
        if self.metric == "euclidean":
            return self.x * other.x + self.y * other.y
        return self.x * other.x - self.y * other.y

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


# -- SO(2) ----------------------------------------------------------------

@dataclass
class SO2Domain:
    m: int
    vertices: np.ndarray   # (m, 2), vertex j between faces j and j+1
    arcs: np.ndarray       # (m, 2) angular endpoints of the projected faces

    @property
    def vertex_radius(self) -> np.ndarray:
        return np.hypot(self.vertices[:, 0], self.vertices[:, 1])

    @property
    def arc_lengths(self) -> np.ndarray:
        return self.arcs[:, 1] - self.arcs[:, 0]


def so2_domain(m: int) -> SO2Domain:
    """``P = {a : <a, g> <= 1 for g in Gamma_m}`` and the radial images of its faces.

    Face ``j`` lies on the tangent line at ``g_j = (cos 2 pi j/m, sin 2 pi j/m)``;
    vertices are computed by intersecting consecutive tangent lines.
    """
    if m <= 2:
        raise UnboundedPolytopeError(f"m = {m}: the half-planes of fewer than three points do not bound a polygon")
    phi = 2 * math.pi * np.arange(m) / m
    g = np.column_stack([np.cos(phi), np.sin(phi)])
    verts = np.array([np.linalg.solve(np.vstack([g[j], g[(j + 1) % m]]), np.ones(2)) for j in range(m)])
    ang = np.arctan2(verts[:, 1], verts[:, 0])
    # face j runs from vertex j-1 to vertex j
    start = np.unwrap(np.roll(ang, 1))
    start = np.where(start > phi, start - 2 * math.pi, start)
    end = np.unwrap(ang)
    end = np.where(end < phi, end + 2 * math.pi, end)
    return SO2Domain(m, verts, np.column_stack([start, end]))


# -- SO(1,1) ------------------------------------------------------------------

def hyperbola_point(t, eps: int = 1) -> np.ndarray:
    """``z(t, eps) = eps (sinh t, cosh t)``."""
    t = np.asarray(t, dtype=float)
    return eps * np.stack([np.sinh(t), np.cosh(t)], axis=-1)


def minkowski_form(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return a[..., 0] * b[..., 0] - a[..., 1] * b[..., 1]


def boost(d: float) -> np.ndarray:
    """Linear map of E^{1,1} realising multiplication by ``z(d, 1)``."""
    c, s = math.cosh(d), math.sinh(d)
    return np.array([[c, s], [s, c]])


def project_hyperbola(a):
    """``a -> a / sqrt(-<a, a>)`` on the negative cone."""
    a = np.asarray(a, dtype=float)
    q = -minkowski_form(a, a)
    if np.any(q <= 0):
        raise ValueError("projection needs points with <a, a> < 0")
    return a / np.sqrt(q)[..., None]


def hyperbola_parameter(a):
    """Parameter ``t`` and branch ``eps`` of a point on (or projected to) the hyperbola."""
    p = project_hyperbola(a)
    eps = np.sign(p[..., 1])
    return np.arcsinh(eps * p[..., 0]), eps


@dataclass
class SO11Domain:
    d: float
    n: int
    corners: dict          # eps -> (2n, 2) corner points of the boundary curve
    faces: dict            # eps -> list of (k, start point, end point), |k| <= n - 1
    segments: dict         # eps -> (2n - 1, 2) parameter intervals of the projected faces

    def boundary_scale(self, t) -> np.ndarray:
        """``lam`` with ``lam z(t, eps)`` on the boundary: ``sech(dist(t, dZ))``, truncated."""
        t = np.asarray(t, dtype=float)
        ks = np.arange(-self.n, self.n + 1)
        return np.max(1.0 / np.cosh(t[..., None] - ks * self.d), axis=-1)


def so11_domain(d: float, n: int) -> SO11Domain:
    """``P = union_k intersection_eps H_{z(kd, eps)}`` for ``|k| <= n``, ``H_g = {<a, g> >= -1}``.

    On the branch ``eps`` the face of index ``k`` lies on the tangent line at
    ``z(kd, eps)`` and runs between the corners ``sech(d/2) z(kd -+ d/2, eps)``.
    Truncation only affects the outermost faces, so faces with ``|k| <= n - 1``
    are returned and are exact.
    """
    if not d > 0:
        raise ValueError("d must be positive")
    if n < 2:
        raise ValueError("n must be at least 2")
    lam = 1.0 / math.cosh(d / 2)
    ks = np.arange(-n, n)
    corners, faces, segments = {}, {}, {}
    for eps in (1, -1):
        c = lam * hyperbola_point((ks + 0.5) * d, eps)
        corners[eps] = c
        fl, seg = [], []
        for k in range(-n + 1, n):
            a, b = c[k + n - 1], c[k + n]
            fl.append((k, a, b))
            ta, _ = hyperbola_parameter(a)
            tb, _ = hyperbola_parameter(b)
            seg.append((float(ta), float(tb)))
        faces[eps] = fl
        segments[eps] = np.array(seg)
    return SO11Domain(d, n, corners, faces, segments)


def so11_in_P(a, d: float, n: int) -> np.ndarray:
    """Membership in the truncated union ``P``."""
    a = np.atleast_2d(a)
    ks = np.arange(-n, n + 1)
    out = np.zeros(len(a), dtype=bool)
    for k in ks:
        ok = np.ones(len(a), dtype=bool)
        for eps in (1, -1):
            ok &= minkowski_form(a, hyperbola_point(k * d, eps)) >= -1.0
        out |= ok
    return out


def naive_intersection(d: float, n: int) -> np.ndarray:
    """Vertices of ``intersection_{|k| <= n, eps} H_{z(kd, eps)}``.

    The polygon contains the origin and shrinks to it as ``n`` grows, so the
    full intersection is the single point ``(0, 0)``.
    """
    A, b = [], []
    for k in range(-n, n + 1):
        for eps in (1, -1):
            g = hyperbola_point(k * d, eps)
            # <a, g> >= -1  <=>  -(g1 a1 - g2 a2) <= 1
            A.append([-g[0], g[1]])
            b.append(1.0)
    A = np.array(A)
    hs = HalfspaceIntersection(np.hstack([A, -np.array(b)[:, None]]), np.zeros(2))
    V = hs.intersections
    ang = np.arctan2(V[:, 1], V[:, 0])
    V = V[np.argsort(ang)]
    keep = np.ones(len(V), dtype=bool)
    keep[1:] = np.linalg.norm(np.diff(V, axis=0), axis=1) > 1e-15
    return V[keep]
