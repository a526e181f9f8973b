import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentzfd.analogues import (
    PlanePoint,
    UnboundedPolytopeError,
    boost,
    hyperbola_parameter,
    hyperbola_point,
    minkowski_form,
    naive_intersection,
    project_hyperbola,
    so2_domain,
    so11_domain,
    so11_in_P,
)


def test_plane_point_forms():
    a, b = PlanePoint(1.0, 2.0), PlanePoint(3.0, 4.0)
    assert a.form(b) == 11.0
    am, bm = PlanePoint(1.0, 2.0, "minkowski"), PlanePoint(3.0, 4.0, "minkowski")
    assert am.form(bm) == -5.0
    assert np.array_equal(a.as_array(), [1.0, 2.0])


@pytest.mark.parametrize("m", [3, 4, 5, 6, 7, 12])
def test_so2_polygon(m):
    dom = so2_domain(m)
    assert len(dom.vertices) == m
    assert np.allclose(dom.vertex_radius, 1 / math.cos(math.pi / m), atol=1e-12)
    assert np.allclose(dom.arc_lengths, 2 * math.pi / m, atol=1e-12)
    assert dom.arc_lengths.sum() == pytest.approx(2 * math.pi, abs=1e-12)
    # consecutive arcs share endpoints modulo 2 pi
    ends = np.mod(dom.arcs[:, 1], 2 * math.pi)
    starts = np.mod(np.roll(dom.arcs[:, 0], -1), 2 * math.pi)
    assert np.allclose(np.angle(np.exp(1j * (ends - starts))), 0, atol=1e-12)


def test_so2_examples():
    assert so2_domain(6).vertex_radius[0] == pytest.approx(2 / math.sqrt(3), abs=1e-12)
    assert so2_domain(4).vertex_radius[0] == pytest.approx(math.sqrt(2), abs=1e-12)
    for m in (1, 2):
        with pytest.raises(UnboundedPolytopeError):
            so2_domain(m)


@pytest.mark.parametrize("d,n", [(0.8, 4), (0.3, 6), (1.5, 2)])
def test_so11_segments(d, n):
    dom = so11_domain(d, n)
    for eps in (1, -1):
        seg = dom.segments[eps]
        assert np.allclose(seg[:, 1] - seg[:, 0], d, atol=1e-12)
        assert np.allclose(seg[1:, 0], seg[:-1, 1], atol=1e-12)
        # faces lie on tangent lines <a, z(kd, eps)> = -1
        for k, a, b in dom.faces[eps]:
            g = hyperbola_point(k * d, eps)
            assert minkowski_form(a, g) == pytest.approx(-1, abs=1e-12)
            assert minkowski_form(b, g) == pytest.approx(-1, abs=1e-12)
    mid = dom.segments[1][n - 1]
    assert mid.mean() == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(hyperbola_point(mid.mean()), [0, 1])


def test_so11_boundary_is_in_P():
    d, n = 0.8, 4
    dom = so11_domain(d, n)
    t = np.linspace(-2.5 * d, 2.5 * d, 101)
    lam = dom.boundary_scale(t)
    pts = lam[:, None] * hyperbola_point(t)
    assert so11_in_P(pts * (1 - 1e-9), d, n).all()
    assert not so11_in_P(pts * 1.001, d, n).any()


@settings(max_examples=50, deadline=None)
@given(st.floats(-2, 2), st.floats(0.1, 3), st.sampled_from([1, -1]), st.floats(0.2, 5))
def test_projection_equivariant_under_boost(t, d, eps, scale):
    a = scale * hyperbola_point(t, eps)
    b = boost(d) @ a
    assert np.allclose(project_hyperbola(b), boost(d) @ project_hyperbola(a), atol=1e-9)
    tb, eb = hyperbola_parameter(b)
    assert eb == eps and tb == pytest.approx(t + d, abs=1e-9)


def test_naive_intersection_collapses():
    diam = [np.ptp(naive_intersection(0.8, n), axis=0).max() for n in (1, 3, 6, 10)]
    assert all(x > y for x, y in zip(diam, diam[1:]))
    assert diam[-1] < 5e-3
    V = naive_intersection(0.8, 10)
    assert np.allclose(V.mean(axis=0), 0, atol=1e-3)


def test_so11_validation():
    with pytest.raises(ValueError):
        so11_domain(0.0, 3)
    with pytest.raises(ValueError):
        so11_domain(1.0, 1)
    with pytest.raises(ValueError):
        project_hyperbola(np.array([1.0, 0.0]))
