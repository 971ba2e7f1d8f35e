import itertools
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from christoffel.constructions import (
    bound_rhs, corner_map_3d, halfspace_box_for, halfspace_box_map, max_area_triangle, needle_certificate,
    parallelogram_2d, sharpness_body_2d, sharpness_body_nd, univariate_needle,
)
from christoffel.constructions.boxmaps import box_containment_gap, triangle_area
from christoffel.constructions.needles import legendre_series
from christoffel.constructions.sharpness import chord_heights, solve_shear
from christoffel.errors import InvalidNormal, ParameterOutOfRange, SigmaViolated
from christoffel.geometry import Ball, HalfBall3, LpBall, Polygon2D, exit_distance, measure, unit_directions
from christoffel.kernel import christoffel_1d, christoffel_eval
from christoffel.quadrature import gauss_on

from conftest import random_polygon, square


def test_halfspace_example_slack():
    bm = halfspace_box_map(1.0, 2, 0.4, 0.1, np.array([1.0, 0.0]))
    # exact slack 2 delta / (a + delta + R d / w1)
    assert bm.slacks[0] == pytest.approx(0.08, abs=1e-12)
    assert bm.diagnostics["nominal_slack"] == pytest.approx(0.1)
    assert bm.slacks[0] <= bm.diagnostics["nominal_slack"]
    assert bm.y[1] == pytest.approx(0.0)
    assert bm.det == pytest.approx(1.0 * (0.4 + 0.1 + 2.0) / 2)


def test_halfspace_rejects_bad_normal():
    with pytest.raises(InvalidNormal):
        halfspace_box_map(1.0, 2, 0.5, 0.1, np.array([-0.2, 0.98]))


@given(seed=st.integers(0, 100_000))
def test_halfspace_box_contains_polygon(seed):
    rng = np.random.default_rng(seed)
    poly = random_polygon(rng)
    c = poly.interior_point()
    e = rng.normal(size=2)
    e /= np.linalg.norm(e)
    x = c + 0.8 * (exit_distance(poly, c, e)) * e
    bm = halfspace_box_for(poly, x, e)
    assert box_containment_gap(poly, bm.T) <= 1e-9
    assert np.allclose(bm.T(bm.y), x)
    assert np.all(np.abs(bm.y) <= 1)


def test_parallelogram_disc():
    disc = Ball.unit(2)
    x = np.array([0.0, 0.9])
    bm = parallelogram_2d(disc, x, [0.0, 1.0])
    assert bm.kind == "parallelogram"
    assert box_containment_gap(disc, bm.T) <= 1e-9
    assert 0 < bm.diagnostics["sin_phi"] < 1
    assert np.allclose(bm.T(bm.y), x)


def test_parallelogram_routes_on_square():
    bm = parallelogram_2d(square(), np.array([0.9, 0.2]), [1.0, 0.0])
    assert bm.kind == "halfspace" and bm.diagnostics["routed"]


def brute_force_triangle(V):
    return max(triangle_area(V[list(t)]) for t in itertools.combinations(range(len(V)), 3))


def test_max_area_triangle_known():
    assert triangle_area(max_area_triangle(square())) == pytest.approx(2.0)
    hexagon = np.column_stack([np.cos(np.arange(6) * np.pi / 3), np.sin(np.arange(6) * np.pi / 3)])
    assert triangle_area(max_area_triangle(Polygon2D(hexagon))) == pytest.approx(3 * np.sqrt(3) / 4)


@given(seed=st.integers(0, 100_000))
def test_max_area_triangle_brute_force(seed):
    poly = random_polygon(np.random.default_rng(seed), k_max=12)
    got = triangle_area(max_area_triangle(poly))
    assert got == pytest.approx(brute_force_triangle(poly.vertices), rel=1e-12)


def test_corner_map_halfball():
    hb = HalfBall3()
    x = np.array([0.9, 0.0, 0.025])
    meas = measure(hb, x)
    bm = corner_map_3d(hb, x, meas.u)
    assert bm.kind == "corner"
    assert box_containment_gap(hb, bm.T) <= 1e-9
    assert np.allclose(bm.T(bm.y), x)


@pytest.mark.parametrize("m,y", [(3, 1.0), (5, 0.3), (10, -0.9), (0, 0.5)])
def test_univariate_needle(m, y):
    c = univariate_needle(m, y)
    assert legendre_series(c, np.array([y]))[0] == pytest.approx(1.0)
    t, w = gauss_on(-1.0, 1.0, m + 2)
    norm2 = float(w @ legendre_series(c, t) ** 2)
    assert norm2 == pytest.approx(christoffel_1d(m, y), rel=1e-12)
    if (m, y) == (3, 1.0):
        assert norm2 == pytest.approx(1 / 8)


@pytest.mark.parametrize("body,x", [
    (Ball.unit(2), [0.0, 0.9]), (square(), [0.9, 0.2]), (LpBall(1.5), [0.8, 0.1]), (HalfBall3(), [0.9, 0.0, 0.025]),
])
def test_certificate_chain(body, x):
    x = np.array(x)
    meas = measure(body, x)
    bm = parallelogram_2d(body, x, meas.u) if body.dim == 2 else corner_map_3d(body, x, meas.u)
    n = 8 if body.dim == 2 else 6
    cert = needle_certificate(body, n, bm)
    lam = christoffel_eval(body, n, x).value
    assert cert.value_at_x == pytest.approx(1.0)
    assert cert(x[None, :])[0] == pytest.approx(1.0)
    assert lam <= cert.l2sq.value + 1e-9
    assert cert.l2sq.value <= cert.bound + 1e-9
    assert cert.degree <= n
    data = json.loads(cert.to_json())
    assert set(data) >= {"map", "coefficients", "l2sq", "diagnostics"}


def test_bound_rhs_and_sigma():
    disc = Ball.unit(2)
    m = measure(disc, [0.9, 0.0])
    assert bound_rhs(m, 10, 2) == pytest.approx(10 ** -2 * np.sqrt(min(m.l1 * m.l2, 0.1)))
    with pytest.raises(SigmaViolated):
        bound_rhs(m, 10, 2, sigma=20.0)
    hb = measure(HalfBall3(), [0.9, 0.0, 0.025])
    assert bound_rhs(hb, 7, 3) == pytest.approx(7 ** -3 * min(np.sqrt(hb.delta), hb.section_volume / np.sqrt(hb.delta)))


def test_chord_heights_solve_the_line():
    a, d = 0.4, 0.01
    m1, m2 = chord_heights(a, d)
    for y in (-m1, m2):
        x = -a * y + 2 - d
        assert x * x + y * y == pytest.approx(4.0)
    alpha = solve_shear(d, 1.7)
    q1, q2 = chord_heights(alpha, d)
    assert q2 / q1 == pytest.approx(1.7)


@pytest.mark.parametrize("d,l1,l2", [(0.004, 0.05, 0.08), (0.001, 0.05, 0.08), (0.002, 0.09, 0.03)])
def test_sharpness_2d_round_trip(d, l1, l2):
    body, x = sharpness_body_2d(d, l1, l2)
    m = measure(body, x, [1.0, 0.0])
    assert (m.delta, m.l1, m.l2) == pytest.approx((d, l1, l2), abs=1e-6)
    h = body.support(unit_directions(2, 512))
    assert h.min() >= 1 - 1e-12 and h.max() <= 4


def test_sharpness_2d_range():
    with pytest.raises(ParameterOutOfRange):
        sharpness_body_2d(0.01, 0.05, 0.08)


@pytest.mark.parametrize("d,v,dim", [(0.1, 0.6, 2), (0.05, 0.5, 3), (0.02, 1.2, 3)])
def test_sharpness_nd_round_trip(d, v, dim):
    body, x = sharpness_body_nd(d, v, dim)
    m = measure(body, x, np.eye(dim)[0])
    assert m.delta == pytest.approx(d, abs=1e-6)
    assert m.section_volume == pytest.approx(v, rel=1e-6)


def test_sharpness_nd_range():
    with pytest.raises(ParameterOutOfRange):
        sharpness_body_nd(0.1, 5.0, 3)
