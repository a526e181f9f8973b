import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentzfd.cover import central_exponent_of, central_power, inverse, mul, rotation_r0
from lorentzfd.groups import (
    InvalidCutoffError,
    NoAdmissibleFixedPointError,
    NotARelatorError,
    SignatureNotHyperbolicError,
    TriangleSignature,
    Unrealizable,
    build_triangle,
    central_exponent,
    central_words,
    evaluate_word,
    f_bound,
    find_lift_offsets,
    level_of,
    lifted_group,
    orbit_enumerate,
    radius_for_cutoff,
    triangle_central_m,
)


def _angle_at(x, y, z):
    """Hyperbolic angle at ``x`` of the triangle ``x y z`` in the disk."""
    def direction(a, b):
        # tangent at a of the geodesic towards b: translate a to 0 first
        w = (b - a) / (1 - a.conjugate() * b)
        return cmath.phase(w)
    d = abs(direction(x, y) - direction(x, z)) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


@pytest.mark.parametrize("sig", [(2, 3, 6), (2, 4, 4), (3, 3, 3), (2, 3, 5), (2, 2, 9)])
def test_non_hyperbolic_signatures_rejected(sig):
    with pytest.raises(SignatureNotHyperbolicError):
        build_triangle(sig)


@pytest.mark.parametrize("sig", [(2, 3, 7), (3, 3, 4), (2, 4, 5), (3, 3, 5), (2, 3, 9)])
def test_triangle_placement(sig):
    tri = build_triangle(sig)
    x1, x2, x3 = tri.vertices
    assert x1 == 0 and x2.imag == 0 and x2.real > 0 and x3.imag > 0
    angles = (_angle_at(x1, x2, x3), _angle_at(x2, x3, x1), _angle_at(x3, x1, x2))
    for ang, n in zip(angles, sig):
        assert ang == pytest.approx(math.pi / n, abs=1e-9)
    for x, g in zip(tri.vertices, tri.rotations):
        assert abs(g.mobius(x) - x) < 1e-12


@pytest.mark.parametrize("sig", [(2, 3, 7), (3, 3, 4), (2, 4, 5), (3, 3, 5)])
def test_zero_offset_relations(sig):
    tri = build_triangle(sig)
    for i, n in enumerate(sig):
        assert central_exponent([(i, n)], tri.rotations) == 1
    prod = mul(mul(*tri.rotations[:2]), tri.rotations[2])
    assert central_exponent_of(prod) is not None
    assert central_exponent([], tri.rotations) == 0
    with pytest.raises(NotARelatorError):
        central_exponent([(0, 1)], tri.rotations)


@pytest.mark.parametrize("sig,offsets", [
    ((2, 3, 7), (0, 0, 0)), ((3, 3, 5), (-1, -1, -1)), ((2, 4, 7), (1, -1, -1)), ((3, 3, 4), (1, 0, 2)),
])
def test_relation_residuals(sig, offsets):
    g = lifted_group(sig, offsets)
    res = g.relation_residuals()
    assert max(res.values()) <= 1e-9
    assert g.k == level_of(sig, offsets)
    assert g.k == math.gcd(*g.relator_exponents)


def test_levels_of_reference_lifts():
    g = lifted_group((2, 3, 7))
    assert g.k == 1 and g.p == 7 and g.theta == pytest.approx(math.pi / 7)
    assert g.u == 0 and g.vertices[g.fixed_index] == 0
    m = triangle_central_m((3, 3, 5))
    assert level_of((3, 3, 5), (1, 1, 1)) == math.gcd(4, 4, 6, m + 3)
    assert lifted_group((3, 3, 5), (-1, -1, -1)).k == 2


def test_fixed_point_choice():
    g = lifted_group((3, 3, 5), (-1, -1, -1))
    assert g.p == 5 and math.gcd(g.p, g.k) == 1 and g.p > g.k
    assert lifted_group((3, 3, 5), vertex=1).p == 3
    assert lifted_group((3, 3, 5), (-1, -1, -1), vertex=1).p == 3
    assert lifted_group((2, 4, 7), (1, -1, -1)).k == 3
    with pytest.raises(NoAdmissibleFixedPointError):
        lifted_group((2, 4, 7), (1, -1, -1), vertex=1)


def test_find_lift_offsets():
    assert find_lift_offsets((2, 3, 7), 1, 2) == (0, 0, 0)
    offs = find_lift_offsets((3, 3, 5), 2, 2)
    assert not isinstance(offs, Unrealizable) and level_of((3, 3, 5), offs) == 2
    bad = find_lift_offsets((2, 3, 9), 3, 20)
    assert isinstance(bad, Unrealizable) and not bad
    assert "alpha=3" in bad.reason and "alpha=9" in bad.reason
    with pytest.raises(ValueError):
        find_lift_offsets((2, 3, 7), 1, 0)


@settings(max_examples=20, deadline=None)
@given(st.tuples(*[st.integers(-3, 3)] * 3))
def test_level_divides_every_relator_exponent(offs):
    k = level_of((2, 4, 5), offs)
    m = triangle_central_m((2, 4, 5))
    for e in (1 + 2 * offs[0], 1 + 4 * offs[1], 1 + 5 * offs[2], m + sum(offs)):
        assert e % k == 0


@pytest.mark.parametrize("sig,offsets", [((2, 3, 7), (0, 0, 0)), ((3, 3, 5), (-1, -1, -1))])
def test_level_certificate(sig, offsets):
    g = lifted_group(sig, offsets)
    found = central_words(g, 2)
    assert g.k in found
    assert all(m % g.k == 0 for m in found)
    assert all(not (0 < abs(m) < g.k) for m in found)
    for m, word in found.items():
        assert evaluate_word(word, g).residual(central_power(m)) < 1e-9


def test_evaluate_word_tokens():
    g = lifted_group((2, 3, 7))
    assert evaluate_word("e", g).residual(central_power(0)) == 0
    assert evaluate_word("rd^3", g).residual(rotation_r0(6 * g.theta)) < 1e-14
    w = evaluate_word("G1 G2^-1 . rd", g)
    expect = mul(mul(g.generators[0], inverse(g.generators[1])), g.r_d)
    assert w.residual(expect) < 1e-12
    with pytest.raises(ValueError):
        evaluate_word("H1", g)


def test_cutoff_validation():
    g = lifted_group((2, 3, 7))
    for eps in (0.0, -1.0):
        with pytest.raises(InvalidCutoffError):
            orbit_enumerate(g, eps)


def test_radius_for_cutoff_inverts_f():
    th = math.pi / 7
    for eps in (0.05, 0.3, 0.9):
        assert f_bound(radius_for_cutoff(eps, th), th) == pytest.approx(eps)


@pytest.fixture(scope="module")
def atlas():
    return orbit_enumerate(lifted_group((2, 3, 7)), 0.1)


def test_atlas_basic_properties(atlas):
    g = atlas.group
    assert atlas.points[0] == 0 and atlas.words[0] == "e"
    assert np.all(atlas.f_values > atlas.eps)
    key = [(round(abs(x), 9), cmath.phase(x)) for x in atlas.points]
    mods = np.abs(atlas.points)
    assert np.all(np.diff(mods) >= -1e-9)
    assert len(set(key)) == len(key)
    for x, a, word in zip(atlas.points, atlas.reps, atlas.words):
        assert abs(a.mobius(0) - x) < 1e-9
        assert -g.theta / 2 - 1e-12 <= a.alpha < g.theta / 2 + 1e-12
        assert evaluate_word(word, g).residual(a) < 1e-9 * max(1.0, a.r)


def test_words_to_same_point_differ_by_isotropy(atlas):
    """Two words reaching the same orbit point differ by a power of r_d."""
    g = atlas.group
    gens = g.generators
    checked = 0
    for i in range(1, min(len(atlas), 40)):
        a = atlas.reps[i]
        for h in (gens[0], gens[1], gens[2]):
            b = mul(a, h)
            j = atlas.index_of(b.mobius(0))
            if j is None:
                continue
            c = mul(inverse(atlas.reps[j]), b)
            n = -c.alpha / g.theta
            assert abs(c.z) < 1e-9 and abs(n - round(n)) < 1e-9
            checked += 1
    assert checked > 20


def test_atlas_deterministic_and_monotone():
    g = lifted_group((2, 3, 7))
    a1, a2 = orbit_enumerate(g, 0.1), orbit_enumerate(g, 0.1)
    assert np.array_equal(a1.points, a2.points) and a1.words == a2.words
    big = orbit_enumerate(g, 0.05)
    assert len(big) > len(a1)
    for x in a1.points:
        assert big.index_of(x, 1e-9) is not None


def test_signature_coercion():
    s = TriangleSignature.coerce([7, 3, 2])
    assert s.orders == (7, 3, 2) and s.is_hyperbolic()
    assert s.euler_defect == pytest.approx(1 - 1 / 2 - 1 / 3 - 1 / 7)
