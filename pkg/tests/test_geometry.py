import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from christoffel.errors import XOnBoundary
from christoffel.geometry import (
    AffineImage, AffineMap, Ball, HalfBall3, Hull, LpBall, Polygon2D, Revolution, body_from_json,
    boundary_distance, chord_lengths, contains, exit_distance, measure, section_volume, support, unit_directions,
)
from christoffel.geometry.measure import inradius_on_ray, section_polygon

from conftest import random_polygon, square

angles = st.floats(0.0, 2 * np.pi, allow_nan=False)
radii = st.floats(0.0, 0.95)


def test_polygon_validation():
    with pytest.raises(ValueError):
        Polygon2D(np.array([[0, 0], [0, 1.0], [1, 0]]))  # clockwise
    with pytest.raises(ValueError):
        Polygon2D(np.array([[0, 0], [1, 0], [2, 0], [1, 1.0]]))  # collinear
    with pytest.raises(ValueError):
        Polygon2D(np.array([[0, 0], [1, 0.0]]))


def test_square_support_and_contains():
    sq = square()
    assert support(sq, np.array([1.0, 1.0])) == pytest.approx(2.0)
    assert contains(sq, [0.99, -0.99])
    assert not contains(sq, [1.01, 0.0])
    assert sq.area() == pytest.approx(4.0)


def test_lp_support_is_dual_norm():
    for a in (1.0, 1.5, 2.0, 4.0):
        body = LpBall(a)
        U = unit_directions(2, 64)
        q = a / (a - 1) if a > 1 else np.inf
        expect = np.linalg.norm(U, ord=q, axis=1)
        assert np.allclose(body.support(U), expect, rtol=1e-12)
        # support points lie on the boundary and attain the support value
        P = body.support_point(U)
        assert np.allclose(np.sum(np.abs(P) ** a, axis=1), 1.0, atol=1e-10)
        assert np.allclose(np.sum(P * U, axis=1), expect, rtol=1e-10)


def test_halfball_support():
    hb = HalfBall3()
    assert hb.support(np.array([0.0, 0.0, 1.0])) == pytest.approx(1.0)
    assert hb.support(np.array([0.0, 0.0, -1.0])) == pytest.approx(0.0)
    u = np.array([0.6, 0.0, -0.8])
    assert hb.support(u) == pytest.approx(0.6)


@given(theta=angles, r=radii)
def test_disc_exit_and_chords(theta, r):
    disc = Ball.unit(2)
    x = r * np.array([np.cos(theta), np.sin(theta)])
    u = np.array([np.cos(theta), np.sin(theta)])
    assert exit_distance(disc, x, u) == pytest.approx(1 - r, abs=1e-11)
    l1, l2 = chord_lengths(disc, x, u)
    half = np.sqrt(1 - r * r)
    assert l1 == pytest.approx(half, abs=1e-10)
    assert l2 == pytest.approx(half, abs=1e-10)


@given(theta=angles, r=radii)
def test_distance_never_exceeds_exit(theta, r):
    body = LpBall(3.0)
    x = r * np.array([np.cos(theta), np.sin(theta)]) / 2 ** (1 / 3)
    d, u = boundary_distance(body, x)
    for v in unit_directions(2, 16):
        assert d <= exit_distance(body, x, v) + 1e-9
    assert exit_distance(body, x, u) == pytest.approx(d, abs=1e-7)


def test_boundary_point_raises():
    with pytest.raises(XOnBoundary):
        exit_distance(Ball.unit(2), [1.0, 0.0], [1.0, 0.0])


def test_ball3_section_volume():
    b = Ball.unit(3)
    for a in (0.0, 0.3, 0.8):
        v = section_volume(b, [a, 0, 0], [1.0, 0, 0])
        assert v == pytest.approx(np.pi * (1 - a * a), rel=1e-4)


def test_section_areas_in_3d():
    # half-disc of radius sqrt(0.75) and a square of half-diagonal 0.8
    assert section_volume(HalfBall3(), [0.5, 0.0, 0.2], [1.0, 0, 0]) == pytest.approx(0.375 * np.pi, rel=1e-4)
    assert section_volume(LpBall(1.0, 3), [0.2, 0.0, 0.0], [1.0, 0, 0]) == pytest.approx(1.28, rel=1e-4)
    pts, radii, _ = section_polygon(HalfBall3(), np.array([0.5, 0.0, 0.2]), np.array([1.0, 0.0, 0.0]))
    assert np.allclose(pts[:, 0], 0.5)
    assert radii.min() > 0


def test_measure_square():
    m = measure(square(), [0.9, 0.2])
    assert m.delta == pytest.approx(0.1, abs=1e-10)
    assert (m.l1, m.l2) == pytest.approx((1.2, 0.8), abs=1e-9)
    assert m.nu == pytest.approx(1.0, abs=1e-9)


def test_inradius_on_ray_disc():
    r, t0 = inradius_on_ray(Ball.unit(2), np.array([0.0, 0.9]), np.array([0.0, 1.0]))
    assert r == pytest.approx(1.0, abs=1e-3)
    assert t0 == pytest.approx(-0.9, abs=1e-2)


@given(seed=st.integers(0, 10_000))
def test_affine_image_support(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(2, 2)) + 2 * np.eye(2)
    T = AffineMap(A, rng.normal(size=2))
    poly = random_polygon(rng)
    img = AffineImage(T, poly)
    U = unit_directions(2, 32)
    direct = np.max(U @ T(poly.vertices).T, axis=1)
    assert np.allclose(img.support(U), direct, rtol=1e-12, atol=1e-12)
    assert np.allclose(T.inverse()(T(poly.vertices)), poly.vertices)


def test_affine_compose_and_det():
    A = AffineMap(np.array([[2.0, 1.0], [0.0, 3.0]]), np.array([1.0, -1.0]))
    B = AffineMap(np.array([[0.0, -1.0], [1.0, 0.0]]), np.zeros(2))
    AB = A.compose(B)
    z = np.array([[0.3, -0.7]])
    assert np.allclose(AB(z), A(B(z)))
    assert AB.det == pytest.approx(A.det * B.det)


def test_hull_contains_parts_and_points():
    h = Hull((Ball.unit(2), AffineImage(AffineMap(np.diag([1.0, 0.3]), np.zeros(2)), Ball.unit(2, 2.0))),
             np.array([[1.5, 0.8]]))
    assert h.contains([1.5, 0.8], 1e-9)
    assert h.contains([1.99, 0.0])
    assert not h.contains([0.0, 1.2])
    assert h.support(np.array([1.0, 0.0])) == pytest.approx(2.0)


def test_revolution_matches_ball():
    rev = Revolution(Ball.unit(2), 0)
    U = unit_directions(3, 50)
    assert np.allclose(rev.support(U), 1.0, atol=1e-9)
    assert rev.contains([0.0, 0.5, 0.5])
    assert not rev.contains([0.0, 0.8, 0.8])


@pytest.mark.parametrize("body", [
    square(), Ball.unit(2), Ball(np.array([0.5, 0.0, 1.0]), 2.0), LpBall(3.5), LpBall(1.5, 3), HalfBall3(),
    AffineImage(AffineMap(np.diag([2.0, 0.5]), np.array([1.0, 0.0])), LpBall(4.0)),
    Hull((Ball.unit(2),), np.array([[2.0, 0.0]])),
])
def test_json_round_trip(body):
    text = body.to_json()
    back = body_from_json(text)
    assert json.loads(back.to_json()) == json.loads(text)
    U = unit_directions(body.dim, 40)
    assert np.allclose(back.support(U), body.support(U))
