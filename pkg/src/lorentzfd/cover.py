"""Arithmetic in E^{2,2}, the quadric G ~ SU(1,1) and the universal covers.

Points of E^{2,2} = C^2 are pairs ``(z, w)`` with the form
``<a, b> = Re(z_a conj(z_b) - w_a conj(w_b))``.  The covered cone is
parametrised by ``(z, alpha, r)`` with ``|z| < r``; its projection to the cone
is ``(z, r e^{i alpha})``.  Elements of the universal cover of SU(1,1) are the
points with ``|z|^2 = r^2 - 1``.

An SU(1,1) matrix ``[[a, b], [conj(b), conj(a)]]`` corresponds to the point
``(b, conj(a))``, so a cover point ``(z, alpha, r)`` acts on the disk by
``xi -> (conj(w) xi + z) / (conj(z) xi + w)`` with ``w = r e^{i alpha}``.

The lifted argument is the single source of truth for the sheet; ``r`` is
recomputed from ``|w|`` after every product.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ALG_TOL = 1e-12
GEOM_TOL = 1e-9


class InvalidPointError(ValueError):
    """Raised when a point lies outside the domain an operation requires."""


@dataclass(frozen=True)
class PseudoVector:
    """A point ``(z, w)`` of E^{2,2}."""

    z: complex
    w: complex

    def form(self, other: "PseudoVector") -> float:
        return bilinear_form(self, other)

    def in_G(self, tol: float = GEOM_TOL) -> bool:
        return abs(bilinear_form(self, self) + 1.0) <= tol

    def in_L(self) -> bool:
        return abs(self.z) < abs(self.w)

    def as_array(self) -> np.ndarray:
        return np.array([self.z, self.w], dtype=complex)


@dataclass(frozen=True)
class CoverPoint:
    """A point ``(z, alpha, r)`` of the universal cover of the cone L."""

    z: complex
    alpha: float
    r: float

    @property
    def w(self) -> complex:
        return self.r * complex(math.cos(self.alpha), math.sin(self.alpha))

    def in_cover_cone(self) -> bool:
        return self.r > 0 and abs(self.z) < self.r

    def scaled(self, lam: float) -> "CoverPoint":
        """The point ``lam * self`` on the same fibre of the R_+ bundle."""
        return CoverPoint(self.z * lam, self.alpha, self.r * lam)

    def __iter__(self):
        yield self.z
        yield self.alpha
        yield self.r


@dataclass(frozen=True)
class GroupElement(CoverPoint):
    """An element of the universal cover of SU(1,1)."""

    @classmethod
    def normalized(cls, z: complex, alpha: float) -> "GroupElement":
        return cls(complex(z), float(alpha), math.sqrt(1.0 + abs(z) ** 2))

    def __mul__(self, other):
        if isinstance(other, GroupElement):
            return mul(self, other)
        return NotImplemented

    def inv(self) -> "GroupElement":
        return inverse(self)

    def __pow__(self, n: int) -> "GroupElement":
        return power(self, n)

    def residual(self, other: "CoverPoint") -> float:
        """Max-norm distance between two cover points in (z, alpha, r)."""
        return max(abs(self.z - other.z), abs(self.alpha - other.alpha), abs(self.r - other.r))

    def mobius(self, xi):
        """Action of the image in PSU(1,1) on points of the unit disk."""
        w = self.w
        return (w.conjugate() * xi + self.z) / (self.z.conjugate() * xi + w)

    def matrix(self) -> np.ndarray:
        """The SU(1,1) matrix ``[[conj(w), z], [conj(z), w]]`` of the projection."""
        w = self.w
        return np.array([[w.conjugate(), self.z], [self.z.conjugate(), w]])


IDENTITY = GroupElement(0j, 0.0, 1.0)


def bilinear_form(a: PseudoVector, b: PseudoVector) -> float:
    return (a.z * b.z.conjugate() - a.w * b.w.conjugate()).real


def project_pi(a: CoverPoint) -> PseudoVector:
    return PseudoVector(complex(a.z), a.w)


def section_s(a: CoverPoint) -> GroupElement:
    """Radial projection of the covered cone onto the group."""
    q = a.r * a.r - abs(a.z) ** 2
    lam = math.sqrt(q) if q > 0 else 0.0
    if not lam > 0:
        raise InvalidPointError(f"point {a} is not in the covered cone")
    return GroupElement(a.z / lam, a.alpha, a.r / lam)


def radial_projection(v: PseudoVector) -> PseudoVector:
    """``a -> a / sqrt(-<a, a>)`` on the cone L."""
    q = -bilinear_form(v, v)
    if not q > 0:
        raise InvalidPointError(f"{v} is not in the cone L")
    s = math.sqrt(q)
    return PseudoVector(v.z / s, v.w / s)


# -- array kernels ---------------------------------------------------------
#
# All product-like maps share one formula: the left factor acts linearly on
# the right factor and the argument picks up the principal value of
# arg(1 + conj(z_g) z_h / (w_g w_h)), which lies in (-pi/2, pi/2) because
# |z_g z_h| < |w_g w_h|.

def mul_arrays(zg, ag, rg, zh, ah, rh):
    """Vectorised lifted product/action; returns ``(z, alpha, r)`` arrays."""
    wg = rg * np.exp(1j * np.asarray(ag, dtype=float))
    wh = rh * np.exp(1j * np.asarray(ah, dtype=float))
    z = np.conj(wg) * zh + zg * wh
    w = wg * wh + np.conj(zg) * zh
    corr = np.angle(1.0 + np.conj(zg) * zh / (wg * wh))
    return z, ag + ah + corr, np.abs(w)


def argument_correction(g: CoverPoint, h: CoverPoint) -> float:
    """The principal-argument correction used by :func:`mul` and :func:`act`."""
    return cmath_phase(1.0 + g.z.conjugate() * h.z / (g.w * h.w))


def cmath_phase(c: complex) -> float:
    return math.atan2(c.imag, c.real)


def mul(g: GroupElement, h: GroupElement) -> GroupElement:
    z, alpha, _ = mul_arrays(g.z, g.alpha, g.r, h.z, h.alpha, h.r)
    return GroupElement.normalized(complex(z), float(alpha))


def act(g: GroupElement, a: CoverPoint) -> CoverPoint:
    """Left action of the group on the covered cone (covers the linear action)."""
    z, alpha, r = mul_arrays(g.z, g.alpha, g.r, a.z, a.alpha, a.r)
    if isinstance(a, GroupElement):
        return GroupElement.normalized(complex(z), float(alpha))
    return CoverPoint(complex(z), float(alpha), float(r))


def inverse(g: GroupElement) -> GroupElement:
    return GroupElement(-g.z, -g.alpha, g.r)


def power(g: GroupElement, n: int) -> GroupElement:
    base = g if n >= 0 else inverse(g)
    out = IDENTITY
    for _ in range(abs(n)):
        out = mul(out, base)
    return out


def rotation_r0(t: float) -> GroupElement:
    """Lift of the rotation through angle ``t`` about 0; ``r_0(2t) = (0, -t, 1)``."""
    return GroupElement(0j, -0.5 * t, 1.0)


def translation_to(x: complex) -> GroupElement:
    """Positive hyperbolic translation along the geodesic from 0 to ``x``.

    The element has argument 0 and maps 0 to ``x`` in the disk.
    """
    x = complex(x)
    if not abs(x) < 1:
        raise InvalidPointError(f"|x| = {abs(x)} is not inside the unit disk")
    lam = 1.0 / math.sqrt(1.0 - abs(x) ** 2)
    return GroupElement(x * lam, 0.0, lam)


def rotation_rx(x: complex, t: float) -> GroupElement:
    """Lift of the rotation through angle ``t`` about the disk point ``x``."""
    gx = translation_to(x)
    return mul(mul(gx, rotation_r0(t)), inverse(gx))


def central_power(m: int) -> GroupElement:
    """``z0^m`` where ``z0 = r_0(2 pi) = (0, -pi, 1)`` generates the centre."""
    return GroupElement(0j, -m * math.pi, 1.0)


def central_exponent_of(g: GroupElement, tol: float = 1e-6) -> int | None:
    """Return ``m`` if ``g`` equals ``z0^m`` within ``tol``, else ``None``."""
    m = round(-g.alpha / math.pi)
    if abs(g.z) <= tol and abs(g.alpha + m * math.pi) <= tol:
        return int(m)
    return None


def su11_product(a: PseudoVector, b: PseudoVector) -> PseudoVector:
    """Matrix product of SU(1,1) elements written as points of E^{2,2}."""
    return PseudoVector(b.z * a.w.conjugate() + a.z * b.w, a.w * b.w + a.z.conjugate() * b.z)


def su11_apply(g: PseudoVector, v: PseudoVector) -> PseudoVector:
    """Linear action of an SU(1,1) element on C^2 (same formula as the product)."""
    return su11_product(g, v)


def mobius_from_matrix(M: np.ndarray, xi):
    return (M[0, 0] * xi + M[0, 1]) / (M[1, 0] * xi + M[1, 1])


def random_elements(rng: np.random.Generator, n: int, zmax: float = 2.0, amax: float = 2 * math.pi):
    """Random group elements as ``(z, alpha, r)`` arrays, uniform in a box."""
    rad = zmax * np.sqrt(rng.random(n))
    z = rad * np.exp(2j * math.pi * rng.random(n))
    alpha = rng.uniform(-amax, amax, n)
    return z, alpha, np.sqrt(1.0 + np.abs(z) ** 2)
