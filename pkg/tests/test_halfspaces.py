import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentzfd.cover import IDENTITY, CoverPoint, GroupElement, InvalidPointError, act, inverse, rotation_r0
from lorentzfd.groups import lifted_group, orbit_enumerate
from lorentzfd.halfspaces import (
    ChartPoint,
    EmptyAtlasError,
    Membership,
    NotOnFaceError,
    PrismHandle,
    boundary_section,
    chart_arrays_from,
    chart_from,
    chart_to,
    coset_sections,
    in_H,
    in_I,
    on_E,
    plane_coefficients,
    star_polygon,
    star_polygon_edge_lines,
    window_bound,
)


@st.composite
def chart_points(draw):
    t = draw(st.floats(-3, 3))
    rho = draw(st.floats(0, 0.999)) * math.sqrt(1 + t * t)
    phi = draw(st.floats(0, 2 * math.pi))
    return ChartPoint(cmath.rect(rho, phi), t)


@st.composite
def elements(draw):
    x = draw(st.floats(-2, 2)) + 1j * draw(st.floats(-2, 2))
    return GroupElement.normalized(x, draw(st.floats(-2, 2)))


def test_predicate_examples():
    assert in_I(IDENTITY, CoverPoint(0j, 0.0, 2.0))
    assert not in_H(IDENTITY, CoverPoint(0j, 0.0, 2.0))
    far = CoverPoint(0j, math.pi, 1.0)
    assert in_H(IDENTITY, far) and not in_I(IDENTITY, far)
    assert on_E(IDENTITY, IDENTITY)
    assert in_I(IDENTITY, IDENTITY) and in_H(IDENTITY, IDENTITY)
    g = rotation_r0(1.0)
    assert on_E(g, act(g, CoverPoint(0.3j, 0.2, 1 / math.cos(0.2))))


def test_chart_round_trip_examples():
    c = ChartPoint(0.2 - 0.4j, 1.5)
    a = chart_from(c)
    assert on_E(IDENTITY, a)
    back = chart_to(a)
    assert abs(back.z - c.z) < 1e-15 and back.t == pytest.approx(c.t)
    with pytest.raises(InvalidPointError):
        chart_from(ChartPoint(2.0, 0.0))
    with pytest.raises(NotOnFaceError):
        chart_to(CoverPoint(0j, 0.0, 2.0))
    z, al, r = chart_arrays_from(np.array([[0.2, -0.4, 1.5]]))
    assert z[0] == a.z and al[0] == a.alpha and r[0] == a.r


@settings(max_examples=200, deadline=None)
@given(chart_points(), elements())
def test_plane_is_affine_chart_of_face(c, g):
    """On E_e the functional l_g equals r_b cos(alpha_b) for b = g^{-1} a."""
    a = chart_from(c)
    n, d = plane_coefficients(g)
    ell = float(n @ c.as_array() + d)
    b = act(inverse(g), a)
    assert ell == pytest.approx(b.r * math.cos(b.alpha), rel=1e-9, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(elements(), st.floats(-1.4, 1.4), st.floats(0.3, 3.0), st.floats(0, 2 * math.pi))
def test_halfspace_sides_are_translates(g, alpha, r, phi):
    """``g`` maps E_e, I_e, H_e onto E_g, I_g, H_g."""
    rho = r * 0.9 * abs(math.cos(alpha))
    a = CoverPoint(cmath.rect(rho, phi), alpha, r)
    ga = act(g, a)
    assert in_I(IDENTITY, a) == in_I(g, ga)
    assert in_H(IDENTITY, a) == in_H(g, ga)
    assert in_I(g, ga) or in_H(g, ga)


def test_window_bound():
    th = math.pi / 7
    M = window_bound(2 * math.pi, th)
    # every alpha with |alpha| <= 2 pi has all sheets |alpha + m th| < pi/2 in the window
    assert M * th >= 2 * math.pi + math.pi / 2
    assert window_bound(0.0, th) == math.ceil(7) + 1


@pytest.fixture(scope="module")
def atlas():
    return orbit_enumerate(lifted_group((2, 3, 7)), 0.1)


def _sample_cone(rng, n, rmax=2.0):
    alpha = rng.uniform(-3, 3, n)
    r = rng.uniform(0.2, rmax, n)
    z = r * rng.uniform(0, 0.95, n) * np.exp(1j * rng.uniform(0, 2 * np.pi, n))
    return z, alpha, r


def test_coset_sections_match_prism_handles(atlas, rng):
    z, al, r = _sample_cone(rng, 200)
    vals, ms, _ = coset_sections(atlas, z, al, r)
    th = atlas.group.theta
    for i in range(0, len(atlas), 7):
        q = PrismHandle.for_query_window(atlas.points[i], atlas.reps[i], th, 3.5)
        s = q.sections(z, al, r)
        assert np.allclose(s, vals[:, i], rtol=1e-9)
        for j in range(0, 200, 37):
            assert q.section(CoverPoint(z[j], al[j], r[j])) == pytest.approx(s[j], rel=1e-12)
    assert ms.dtype.kind == "i"


def test_prism_membership_classes(atlas):
    th = atlas.group.theta
    q = PrismHandle.for_query_window(0j, IDENTITY, th)
    assert q.membership(CoverPoint(0j, 0.0, 0.5)) is Membership.INTERIOR
    assert q.membership(CoverPoint(0j, 0.0, 1.0)) is Membership.BOUNDARY
    assert q.membership(CoverPoint(0j, 0.0, 1.5)) is Membership.EXTERIOR
    # the prism over u is invariant under r_d
    a = CoverPoint(0.1j, 0.3, 0.9)
    b = act(rotation_r0(2 * th), a)
    assert q.section(a) == pytest.approx(q.section(b), rel=1e-12)
    assert q.contains(np.array([0j]), np.array([0.0]), np.array([0.9]))[0]


def test_boundary_section(atlas):
    a = CoverPoint(0j, 0.0, 1.0)
    bs = boundary_section(atlas, a)
    assert bs.value == pytest.approx(1.0)
    assert (0, 0) in bs.achievers
    empty = type(atlas)(atlas.group, atlas.eps, atlas.points[:0], [], [])
    with pytest.raises(EmptyAtlasError):
        boundary_section(empty, a)


@pytest.mark.parametrize("p,k,n", [(7, 1, 14), (4, 1, 8), (5, 2, 5), (7, 3, 14)])
def test_star_polygon(p, k, n):
    v = star_polygon(p, k)
    assert len(v) == n
    assert np.allclose(np.abs(v), 1 / math.cos(math.pi * k / (2 * p)), rtol=1e-12)
    # consecutive corners lie on a common tangent line of the unit circle
    nu = star_polygon_edge_lines(p, k)
    for j in range(n):
        for w in (v[j], v[(j + 1) % n]):
            assert (np.conj(nu[j]) * w).real == pytest.approx(1.0, abs=1e-12)


def test_star_polygon_rejects_bad_pairs():
    for p, k in ((4, 2), (3, 3), (5, 0)):
        with pytest.raises(ValueError):
            star_polygon(p, k)
