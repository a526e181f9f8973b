"""Half-spaces E_g / I_g / H_g in the covered cone, prisms Q_x and sections.

For ``b = g^{-1} a`` with lifted argument ``alpha_b`` and modulus ``r_b``:

* ``a`` is in ``I_g`` iff ``|alpha_b| < pi/2`` and ``r_b cos(alpha_b) >= 1``;
* ``a`` is in ``H_g`` iff ``r_b cos(alpha_b) <= 1`` or ``|alpha_b| >= pi/2``;
* both hold exactly on ``E_g``.

Both sides are closed; points within ``GEOM_TOL`` of ``E_g`` count as on it.

The flat chart of ``E_e`` sends ``(z, alpha, 1/cos alpha)`` to
``(Re z, Im z, tan alpha)``; its image in E^{2,2} is ``(z, 1 + i t)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .cover import (
    GEOM_TOL,
    IDENTITY,
    CoverPoint,
    GroupElement,
    InvalidPointError,
    act,
    inverse,
    mul,
    mul_arrays,
    rotation_r0,
)

HALF_PI = 0.5 * math.pi


class NotOnFaceError(ValueError):
    pass


class EmptyAtlasError(ValueError):
    pass


@dataclass(frozen=True)
class HalfSpaceHandle:
    g: GroupElement = IDENTITY

    def _local(self, a: CoverPoint):
        b = act(inverse(self.g), a) if self.g is not IDENTITY else a
        return b.alpha, b.r * math.cos(b.alpha)

    def in_I(self, a: CoverPoint, tol: float = GEOM_TOL) -> bool:
        alpha, v = self._local(a)
        return abs(alpha) < HALF_PI and v >= 1.0 - tol

    def in_H(self, a: CoverPoint, tol: float = GEOM_TOL) -> bool:
        alpha, v = self._local(a)
        return abs(alpha) >= HALF_PI or v <= 1.0 + tol

    def on_E(self, a: CoverPoint, tol: float = GEOM_TOL) -> bool:
        alpha, v = self._local(a)
        return abs(alpha) < HALF_PI and abs(v - 1.0) <= tol


def in_I(g: GroupElement, a: CoverPoint, tol: float = GEOM_TOL) -> bool:
    return HalfSpaceHandle(g).in_I(a, tol)


def in_H(g: GroupElement, a: CoverPoint, tol: float = GEOM_TOL) -> bool:
    return HalfSpaceHandle(g).in_H(a, tol)


def on_E(g: GroupElement, a: CoverPoint, tol: float = GEOM_TOL) -> bool:
    return HalfSpaceHandle(g).on_E(a, tol)


# -- chart of E_e -----------------------------------------------------------

@dataclass(frozen=True)
class ChartPoint:
    z: complex
    t: float

    def as_array(self) -> np.ndarray:
        return np.array([self.z.real, self.z.imag, self.t])

    @classmethod
    def from_array(cls, c) -> "ChartPoint":
        return cls(complex(c[0], c[1]), float(c[2]))


def chart_to(a: CoverPoint, tol: float = GEOM_TOL) -> ChartPoint:
    if not on_E(IDENTITY, a, tol):
        raise NotOnFaceError(f"{a} is not on E_e")
    return ChartPoint(complex(a.z), math.tan(a.alpha))


def chart_from(c: ChartPoint) -> CoverPoint:
    if not abs(c.z) ** 2 < 1.0 + c.t * c.t:
        raise InvalidPointError(f"{c} is outside the chart (|z|^2 >= 1 + t^2)")
    return CoverPoint(complex(c.z), math.atan(c.t), math.sqrt(1.0 + c.t * c.t))


def chart_arrays_from(C: np.ndarray):
    """Vectorised :func:`chart_from` for an ``(n, 3)`` array; returns ``(z, alpha, r)``."""
    C = np.atleast_2d(C)
    t = C[:, 2]
    return C[:, 0] + 1j * C[:, 1], np.arctan(t), np.sqrt(1.0 + t * t)


def chart_form(c1: np.ndarray, c2: np.ndarray) -> float:
    """The E^{2,2} form restricted to chart tangent vectors: diag(1, 1, -1)."""
    return float(c1[0] * c2[0] + c1[1] * c2[1] - c1[2] * c2[2])


def plane_coefficients(g: GroupElement):
    """Affine functional ``l_g`` on the chart with ``I_g = {l_g >= 1}`` (on its sheet).

    ``l_g(c) = -<pi(g), (z, 1 + i t)> = n . c + d``.
    """
    w = g.w
    return np.array([-g.z.real, -g.z.imag, w.imag]), w.real


# -- prisms ---------------------------------------------------------------

def window_bound(arg_bound: float, theta: float) -> int:
    """Half-width of the m-window covering queries with ``|alpha| <= arg_bound``."""
    return int(math.ceil((arg_bound + math.pi) / theta)) + 1


class Membership(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    EXTERIOR = "exterior"


@dataclass(frozen=True)
class PrismHandle:
    """The prism ``Q_x`` over the coset ``a(x) <r_d>``, truncated to ``|m| <= M``."""

    x: complex
    a: GroupElement
    theta: float
    M: int

    @classmethod
    def for_query_window(cls, x, a, theta, arg_bound: float = 2 * math.pi):
        return cls(complex(x), a, theta, window_bound(arg_bound + abs(a.alpha), theta))

    @property
    def r_d(self) -> GroupElement:
        return rotation_r0(2 * self.theta)

    def element(self, m: int) -> GroupElement:
        return mul(self.a, rotation_r0(2 * m * self.theta))

    def _base(self, a: CoverPoint):
        ai = inverse(self.a)
        return mul_arrays(ai.z, ai.alpha, ai.r, a.z, a.alpha, a.r)

    def local_values(self, a: CoverPoint):
        """``(m, alpha_m, r cos(alpha_m))`` for ``b_m = (a(x) r_d^m)^{-1} a`` over the window."""
        _, alpha0, r0 = self._base(a)
        ms = np.arange(-self.M, self.M + 1)
        alphas = alpha0 + ms * self.theta
        return ms, alphas, r0 * np.cos(alphas)

    def membership(self, a: CoverPoint, tol: float = GEOM_TOL) -> Membership:
        _, alphas, v = self.local_values(a)
        sheet = np.abs(alphas) < HALF_PI
        if np.any(sheet & (v > 1.0 + tol)):
            return Membership.EXTERIOR
        if np.any(sheet & (np.abs(v - 1.0) <= tol)):
            return Membership.BOUNDARY
        return Membership.INTERIOR

    def section(self, a: CoverPoint) -> float:
        """``sup{lam : lam * a in Q_x}`` over the window; ``inf`` when unconstrained."""
        _, alphas, v = self.local_values(a)
        ok = (np.abs(alphas) < HALF_PI) & (v > 0)
        if not np.any(ok):
            return math.inf
        return float(np.min(1.0 / v[ok]))

    def sections(self, z, alpha, r) -> np.ndarray:
        """Vectorised :meth:`section` over arrays of cover points."""
        ai = inverse(self.a)
        _, alpha0, r0 = mul_arrays(ai.z, ai.alpha, ai.r, np.asarray(z), np.asarray(alpha), np.asarray(r))
        ms = np.arange(-self.M, self.M + 1)
        alphas = alpha0[:, None] + ms * self.theta
        v = r0[:, None] * np.cos(alphas)
        v = np.where((np.abs(alphas) < HALF_PI) & (v > 0), v, 0.0)
        with np.errstate(divide="ignore"):
            return np.min(1.0 / v, axis=1)

    def contains(self, z, alpha, r, tol: float = GEOM_TOL) -> np.ndarray:
        """Vectorised membership in the closed prism."""
        return self.sections(z, alpha, r) >= 1.0 - tol


def prism_membership(q: PrismHandle, a: CoverPoint, tol: float = GEOM_TOL) -> Membership:
    return q.membership(a, tol)


def prism_section(q: PrismHandle, a: CoverPoint) -> float:
    return q.section(a)


def coset_sections(atlas, z, alpha, r):
    """Closed-form prism sections of every atlas prism at many points.

    ``z, alpha, r`` describe points of the cover (arrays of shape ``(n,)``).
    Returns ``(values, best_m)`` of shape ``(n, len(atlas))`` where
    ``values[j, i] = min_m 1 / Re w((a_i r_d^m)^{-1} p_j)`` and ``best_m`` is
    the minimising ``m``.
    """
    theta = atlas.group.theta
    az, aa, ar = atlas.rep_arrays
    # inverse reps: (-z, -alpha, r)
    bz, ba, br = mul_arrays(-az[None, :], -aa[None, :], ar[None, :],
                            np.asarray(z)[:, None], np.asarray(alpha)[:, None], np.asarray(r)[:, None])
    m = -np.round(ba / theta)
    delta = ba + m * theta
    return 1.0 / (br * np.cos(delta)), m.astype(int), (bz, ba, br)


@dataclass
class BoundarySection:
    value: float
    achievers: list[tuple[int, int]]  # (atlas index, m)


def boundary_section(atlas, a: CoverPoint, rel_tol: float = 1e-9) -> BoundarySection:
    """``r_P(a) = max_x s_x(a)`` with the list of achieving ``(x, m)`` pairs."""
    if len(atlas) == 0:
        raise EmptyAtlasError("boundary section needs a non-empty atlas")
    vals, ms, (_, ba, br) = coset_sections(atlas, np.array([a.z]), np.array([a.alpha]), np.array([a.r]))
    vals, ms, ba, br = vals[0], ms[0], ba[0], br[0]
    top = float(np.max(vals))
    theta = atlas.group.theta
    out = []
    for i in np.nonzero(vals >= top * (1 - rel_tol))[0]:
        for m in (ms[i] - 1, ms[i], ms[i] + 1):
            al = ba[i] + m * theta
            if abs(al) < HALF_PI and 1.0 / (br[i] * math.cos(al)) <= top * (1 + rel_tol):
                out.append((int(i), int(m)))
    return BoundarySection(top, out)


# -- star polygon -----------------------------------------------------------

def star_polygon(p: int, k: int) -> np.ndarray:
    """Vertices of the projected boundary of ``X_u`` in traversal order.

    The curve ``r = 1 / cos(dist(alpha, theta Z))`` with ``theta = pi k / p``
    has corners at ``alpha = theta/2 + j theta`` on the circle of radius
    ``1 / cos(theta / 2)``; it closes up after ``2p`` corners for odd ``k``
    and after ``p`` corners for even ``k``.
    """
    if not (p > k >= 1 and math.gcd(p, k) == 1):
        raise ValueError(f"star polygon needs p > k >= 1 with gcd(p, k) = 1, got ({p}, {k})")
    theta = math.pi * k / p
    n = 2 * p if k % 2 else p
    ang = theta / 2 + theta * np.arange(n)
    return np.exp(1j * ang) / math.cos(theta / 2)


def star_polygon_edge_lines(p: int, k: int):
    """Unit normals of the edge lines ``Re(conj(nu) w) = 1`` (tangent to the unit circle)."""
    theta = math.pi * k / p
    verts = star_polygon(p, k)
    return np.exp(1j * (theta * (np.arange(len(verts)) + 1)))
