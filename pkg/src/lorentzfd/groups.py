"""Hyperbolic triangle groups, their finite-level lifts and orbit atlases.

A lift is fixed by integer offsets ``(s1, s2, s3)``: the generator at vertex
``x_i`` is ``G_i = r_{x_i}(2 pi / alpha_i) z0^{s_i}``.  The relators then have
central values ``G_i^{alpha_i} = z0^{1 + alpha_i s_i}`` and
``G1 G2 G3 = z0^{m + s1 + s2 + s3}``, where ``m`` is measured numerically, and
the level is the gcd of these exponents.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .cover import (
    IDENTITY,
    GroupElement,
    central_exponent_of,
    central_power,
    inverse,
    mul,
    mul_arrays,
    rotation_r0,
    rotation_rx,
    translation_to,
)

DEDUP_TOL = 1e-7


class SignatureNotHyperbolicError(ValueError):
    pass


class NotARelatorError(ValueError):
    pass


class NoAdmissibleFixedPointError(ValueError):
    pass


class InvalidCutoffError(ValueError):
    pass


@dataclass(frozen=True)
class TriangleSignature:
    alpha1: int
    alpha2: int
    alpha3: int

    def __post_init__(self):
        if min(self.orders) < 2:
            raise ValueError(f"cone orders must be >= 2, got {self.orders}")

    @classmethod
    def coerce(cls, sig) -> "TriangleSignature":
        if isinstance(sig, cls):
            return sig
        return cls(*(int(a) for a in sig))

    @property
    def orders(self) -> tuple[int, int, int]:
        return (self.alpha1, self.alpha2, self.alpha3)

    @property
    def euler_defect(self) -> float:
        """``1 - sum 1/alpha_i``; positive exactly for hyperbolic signatures."""
        return 1.0 - sum(1.0 / a for a in self.orders)

    def is_hyperbolic(self) -> bool:
        a, b, c = self.orders
        return a * b + b * c + c * a < a * b * c

    def __str__(self):
        return "({},{},{})".format(*self.orders)


class Unrealizable:
    """Sentinel result of :func:`find_lift_offsets` when no offsets exist."""

    def __init__(self, signature, level, bound, reason=""):
        self.signature = TriangleSignature.coerce(signature)
        self.level = level
        self.bound = bound
        self.reason = reason

    def __bool__(self):
        return False

    def __repr__(self):
        return f"Unrealizable({self.signature}, level={self.level}, bound={self.bound})"


@dataclass(frozen=True)
class TriangleData:
    signature: TriangleSignature
    vertices: tuple[complex, complex, complex]
    rotations: tuple[GroupElement, GroupElement, GroupElement]
    side_lengths: tuple[float, float, float]  # opposite x1, x2, x3


def _hyperbolic_side(A, B, C):
    """Side opposite angle ``C`` from the hyperbolic law of cosines."""
    return math.acosh((math.cos(A) * math.cos(B) + math.cos(C)) / (math.sin(A) * math.sin(B)))


def build_triangle(signature) -> TriangleData:
    """Place the triangle with angles pi/alpha_i and build the vertex rotations.

    ``x1 = 0``, ``x2`` on the positive real axis and ``x3`` in the upper
    half-disk.  The rotations are through ``2 pi / alpha_i``; if the product
    ``g1 g2 g3`` is not the identity in PSU(1,1) all angles are negated.
    """
    sig = TriangleSignature.coerce(signature)
    if not sig.is_hyperbolic():
        raise SignatureNotHyperbolicError(f"signature {sig} is not hyperbolic")
    A, B, C = (math.pi / a for a in sig.orders)
    c = _hyperbolic_side(A, B, C)  # x1 -- x2
    b = _hyperbolic_side(A, C, B)  # x1 -- x3
    a = _hyperbolic_side(B, C, A)  # x2 -- x3
    verts = (0j, complex(math.tanh(c / 2)), math.tanh(b / 2) * complex(math.cos(A), math.sin(A)))
    for sign in (1.0, -1.0):
        rots = tuple(rotation_rx(x, sign * 2 * math.pi / n) for x, n in zip(verts, sig.orders))
        prod = mul(mul(rots[0], rots[1]), rots[2])
        if abs(prod.z) < 1e-9 and abs(math.sin(prod.alpha)) < 1e-9:
            return TriangleData(sig, verts, rots, (a, b, c))
    raise RuntimeError(f"no orientation of {sig} satisfies the product relation")  # pragma: no cover


def _word_value(word, generators) -> GroupElement:
    g = IDENTITY
    for idx, n in word:
        g = mul(g, generators[idx] ** n)
    return g


def central_exponent(word, generators, tol: float = 1e-6) -> int:
    """Evaluate a relator word in the cover and return ``m`` with value ``z0^m``.

    ``word`` is a sequence of ``(generator index, power)`` pairs.
    """
    g = _word_value(word, generators)
    m = central_exponent_of(g, tol)
    if m is None:
        raise NotARelatorError(f"word {list(word)} evaluates to {g}, which is not central")
    return m


def evaluate_word(text: str, group: "LiftedGroup") -> GroupElement:
    """Value of a word such as ``"G3^5 G2^-1 . rd^-2"`` in the lifted group.

    ``Gi`` are the conjugated generators, ``rd`` generates the isotropy of
    ``u`` and ``e`` is the identity; ``.`` is an optional separator.
    """
    g = IDENTITY
    for tok in text.replace(".", " ").split():
        name, _, exp = tok.partition("^")
        n = int(exp) if exp else 1
        if name == "e":
            continue
        if name == "rd":
            h = rotation_r0(2 * n * group.theta)
        elif len(name) == 2 and name[0] == "G" and name[1] in "123":
            h = group.generators[int(name[1]) - 1] ** n
        else:
            raise ValueError(f"unknown token {tok!r} in word {text!r}")
        g = mul(g, h)
    return g


def _format_word(word) -> str:
    parts = []
    for idx, n in word:
        if n == 0:
            continue
        parts.append(f"G{idx + 1}" if n == 1 else f"G{idx + 1}^{n}")
    return " ".join(parts) if parts else "e"


@dataclass
class LiftedGroup:
    """A finite-level lift of a triangle group, conjugated so that ``u = 0``.

    ``generators`` and ``vertices`` are given after conjugation; the
    ``fixed_index`` vertex sits at the origin.
    """

    signature: TriangleSignature
    offsets: tuple[int, int, int]
    vertices: tuple[complex, complex, complex]
    generators: tuple[GroupElement, GroupElement, GroupElement]
    level: int
    central_m: int
    fixed_index: int
    side_lengths: tuple[float, float, float]
    relator_exponents: tuple[int, int, int, int] = field(default=(0, 0, 0, 0))

    @property
    def k(self) -> int:
        return self.level

    @property
    def p(self) -> int:
        return self.signature.orders[self.fixed_index]

    @property
    def theta(self) -> float:
        return math.pi * self.level / self.p

    @property
    def r_d(self) -> GroupElement:
        return rotation_r0(2 * self.theta)

    @property
    def u(self) -> complex:
        return self.vertices[self.fixed_index]

    def relation_residuals(self) -> dict[str, float]:
        out = {}
        for i, (g, n) in enumerate(zip(self.generators, self.signature.orders)):
            out[f"G{i + 1}^{n}"] = (g ** n).residual(central_power(self.relator_exponents[i]))
        prod = mul(mul(self.generators[0], self.generators[1]), self.generators[2])
        out["G1G2G3"] = prod.residual(central_power(self.relator_exponents[3]))
        return out

    def summary(self) -> dict:
        return {
            "signature": list(self.signature.orders),
            "offsets": list(self.offsets),
            "level": self.level,
            "central_m": self.central_m,
            "fixed_vertex": self.fixed_index + 1,
            "p": self.p,
            "theta": self.theta,
        }


def _level(sig: TriangleSignature, offsets, m: int) -> tuple[int, tuple[int, int, int, int]]:
    exps = tuple(1 + a * s for a, s in zip(sig.orders, offsets)) + (m + sum(offsets),)
    return math.gcd(*exps), exps


def triangle_central_m(signature) -> int:
    """Central exponent of the product of the zero-offset lifts."""
    tri = build_triangle(signature)
    return central_exponent([(0, 1), (1, 1), (2, 1)], tri.rotations)


def admissible_vertices(sig: TriangleSignature, k: int) -> list[int]:
    return [i for i, a in enumerate(sig.orders) if a > k and math.gcd(a, k) == 1]


def lifted_group(signature, offsets=(0, 0, 0), vertex: int | str | None = "auto") -> LiftedGroup:
    """Build the lift with the given offsets and conjugate the fixed point to 0.

    ``vertex`` is ``"auto"`` (largest admissible order) or a 1-based index.
    """
    sig = TriangleSignature.coerce(signature)
    tri = build_triangle(sig)
    offsets = tuple(int(s) for s in offsets)
    m = central_exponent([(0, 1), (1, 1), (2, 1)], tri.rotations)
    k, exps = _level(sig, offsets, m)
    admissible = admissible_vertices(sig, k)
    if not admissible:
        raise NoAdmissibleFixedPointError(
            f"no vertex of {sig} has order > {k} coprime to the level {k}")
    if vertex in (None, "auto"):
        idx = max(admissible, key=lambda i: (sig.orders[i], -i))
    else:
        idx = int(vertex) - 1
        if idx not in admissible:
            raise NoAdmissibleFixedPointError(
                f"vertex {vertex} (order {sig.orders[idx]}) is not admissible at level {k}")
    h = inverse(translation_to(tri.vertices[idx]))
    h_inv = inverse(h)
    gens = []
    for rot, s in zip(tri.rotations, offsets):
        g = mul(rot, central_power(s))
        gens.append(mul(mul(h, g), h_inv))
    verts = tuple(complex(h.mobius(x)) for x in tri.vertices)
    verts = tuple(0j if i == idx else x for i, x in enumerate(verts))
    return LiftedGroup(sig, offsets, verts, tuple(gens), k, m, idx, tri.side_lengths, exps)


def level_of(signature, offsets) -> int:
    return _level(TriangleSignature.coerce(signature), tuple(offsets), triangle_central_m(signature))[0]


def find_lift_offsets(signature, level: int, bound: int):
    """Exhaustive search of ``[-B, B]^3`` for offsets realising ``level``.

    Candidates are visited by increasing L1 norm, then lexicographically, so
    the zero offsets win whenever they work.  Returns :class:`Unrealizable`
    when the box holds no solution.
    """
    if bound < 1:
        raise ValueError("search bound must be >= 1")
    sig = TriangleSignature.coerce(signature)
    m = triangle_central_m(sig)
    box = itertools.product(range(-bound, bound + 1), repeat=3)
    for offs in sorted(box, key=lambda s: (sum(map(abs, s)), s)):
        if _level(sig, offs, m)[0] == level:
            return offs
    reasons = [f"alpha={a} shares a factor with k={level}, so 1 + {a}*s is never divisible by k"
               for a in sorted(set(sig.orders)) if math.gcd(a, level) > 1]
    return Unrealizable(sig, level, bound, "; ".join(reasons))


def central_words(group: LiftedGroup, depth: int):
    """Central values reachable by products of relator powers.

    Every word ``G1^(a1 e1) G2^(a2 e2) G3^(a3 e3) (G1 G2 G3)^e4`` with
    ``|e_i| <= depth`` is evaluated in the cover; returns a dict mapping each
    central exponent to one word realising it.
    """
    gens = group.generators
    orders = group.signature.orders
    found = {}
    rng = range(-depth, depth + 1)
    for e in itertools.product(rng, repeat=4):
        word = [(i, orders[i] * e[i]) for i in range(3)]
        word += [(0, 1), (1, 1), (2, 1)] * e[3] if e[3] >= 0 else [(2, -1), (1, -1), (0, -1)] * (-e[3])
        m = central_exponent(word, gens)
        if m not in found or len(word) < len(found[m][1]):
            found[m] = (_format_word(word), word)
    return {m: w for m, (w, _) in found.items()}


# -- orbit atlas ----------------------------------------------------------

def f_bound(t, theta: float):
    """``sqrt(1 - t^2) / cos(theta / 2)``: bounds ``|w| - |z|`` on the prism at ``x``."""
    return np.sqrt(1.0 - np.asarray(t) ** 2) / math.cos(theta / 2)


def radius_for_cutoff(eps: float, theta: float) -> float:
    """Largest ``|x|`` with ``f(|x|) >= eps``."""
    c = eps * math.cos(theta / 2)
    return math.sqrt(max(0.0, 1.0 - c * c))


@dataclass
class OrbitAtlas:
    """Orbit points of ``u = 0`` with one coset representative each.

    Representatives are normalised so that their argument lies in
    ``[-theta/2, theta/2)``.
    """

    group: LiftedGroup
    eps: float
    points: np.ndarray
    reps: list[GroupElement]
    words: list[str]

    def __len__(self):
        return len(self.reps)

    @property
    def f_values(self) -> np.ndarray:
        return f_bound(np.abs(self.points), self.group.theta)

    @property
    def rep_arrays(self):
        z = np.array([g.z for g in self.reps], dtype=complex)
        a = np.array([g.alpha for g in self.reps], dtype=float)
        r = np.array([g.r for g in self.reps], dtype=float)
        return z, a, r

    def index_of(self, x: complex, tol: float = 1e-6) -> int | None:
        d = np.abs(self.points - x)
        i = int(np.argmin(d))
        return i if d[i] < tol else None

    def element(self, i: int, m: int) -> GroupElement:
        """``a(x_i) r_d^m``."""
        return mul(self.reps[i], rotation_r0(2 * m * self.group.theta))


def orbit_enumerate(group: LiftedGroup, eps: float, max_points: int = 200_000) -> OrbitAtlas:
    """Breadth-first enumeration of the orbit of ``u`` with ``f(|x|) > eps``.

    From a point ``x = a(u)`` the search visits ``a G_u^j G_i^{+-1}(u)`` for
    all ``j < p`` and both other generators ``G_i``; this reaches every
    neighbour of ``x`` in the triangle tessellation.  The search runs over a
    slightly larger hyperbolic ball so that paths may bend outwards.
    """
    if not eps > 0:
        raise InvalidCutoffError(f"cutoff must be positive, got {eps}")
    theta = group.theta
    rad = radius_for_cutoff(eps, theta)
    if rad <= 0:
        rad_h = 0.0
    else:
        rad_h = 2 * math.atanh(min(rad, 1 - 1e-15))
    slack = 2 * max(group.side_lengths) + 1e-6
    search_lim = math.tanh((rad_h + slack) / 2)

    fi = group.fixed_index
    gu = group.generators[fi]
    others = [i for i in range(3) if i != fi]
    steps = []
    for j in range(group.p):
        for i in others:
            for sgn in (1, -1):
                g = mul(gu ** j, group.generators[i] ** sgn)
                name = " ".join(filter(None, [
                    "" if j == 0 else (f"G{fi + 1}" if j == 1 else f"G{fi + 1}^{j}"),
                    f"G{i + 1}" if sgn == 1 else f"G{i + 1}^-1",
                ]))
                steps.append((g, name))
    step_z = np.array([g.z for g, _ in steps])
    step_a = np.array([g.alpha for g, _ in steps])
    step_r = np.array([g.r for g, _ in steps])

    grid = {}
    cell = 1e-5

    def lookup(x):
        kx, ky = int(math.floor(x.real / cell)), int(math.floor(x.imag / cell))
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for j in grid.get((kx + dx, ky + dy), ()):
                    if abs(pts[j] - x) < DEDUP_TOL:
                        return j
        return None

    def insert(x, j):
        grid.setdefault((int(math.floor(x.real / cell)), int(math.floor(x.imag / cell))), []).append(j)

    pts = [0j]
    reps = [IDENTITY]
    words = ["e"]
    insert(0j, 0)
    queue = deque([0])
    while queue:
        j = queue.popleft()
        a = reps[j]
        z, al, r = mul_arrays(a.z, a.alpha, a.r, step_z, step_a, step_r)
        w = r * np.exp(1j * al)
        xs = z / w
        for s in range(len(steps)):
            x = complex(xs[s])
            if abs(x) >= search_lim or lookup(x) is not None:
                continue
            pts.append(x)
            reps.append(GroupElement.normalized(complex(z[s]), float(al[s])))
            words.append(steps[s][1] if words[j] == "e" else words[j] + " " + steps[s][1])
            insert(x, len(pts) - 1)
            queue.append(len(pts) - 1)
            if len(pts) > max_points:
                raise RuntimeError(f"orbit enumeration exceeded {max_points} points; raise eps")

    pts = np.array(pts)
    fvals = f_bound(np.abs(pts), theta)
    keep = [i for i in range(len(pts)) if fvals[i] > eps]
    keep.sort(key=lambda i: (round(abs(pts[i]), 9), round(math.atan2(pts[i].imag, pts[i].real), 9)))
    out_reps, out_words = [], []
    for i in keep:
        a = reps[i]
        n = round(a.alpha / theta)
        if n:
            a = mul(a, rotation_r0(2 * n * theta))
        out_reps.append(a)
        out_words.append(words[i] if n == 0 else f"{words[i]} . rd^{n}")
    points = np.array([pts[i] for i in keep])
    points[0] = 0j
    return OrbitAtlas(group, eps, points, out_reps, out_words)
