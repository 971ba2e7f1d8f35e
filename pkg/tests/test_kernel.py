import warnings
from math import comb, pi

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.polynomial import legendre as npleg

from christoffel.basis import BasisSpec, basis_eval, legendre_table, multi_indices
from christoffel.errors import ConditionTooHigh, DegreeTooLarge
from christoffel.geometry import AffineImage, AffineMap, Ball, HalfBall3, LpBall, Polygon2D, unit_directions
from christoffel.kernel import (
    christoffel_1d, christoffel_eval, christoffel_values, gram_factor, john_map, kernel_eval, normalized_body,
)
from christoffel.quadrature import body_rule

from conftest import interior_point, random_polygon, square


def test_multi_indices_graded():
    idx = multi_indices(2, 3)
    assert len(idx) == comb(5, 2)
    degs = [sum(a) for a in idx]
    assert degs == sorted(degs)
    assert idx[:3] == ((0, 0), (1, 0), (0, 1))


def test_legendre_table_matches_numpy():
    t = np.linspace(-1, 1, 7)
    P = legendre_table(t, 9)
    for k in range(10):
        c = np.zeros(k + 1)
        c[k] = 1
        assert np.allclose(P[:, k], npleg.legval(t, c), atol=1e-14)


def test_basis_lives_on_the_box():
    spec = BasisSpec.for_body(square(), 2)
    assert spec.size == 6
    v = basis_eval(spec, np.array([[1.0, -1.0]]))
    assert np.allclose(v, [1, 1, -1, 1, -1, 1])


def orthonormal_legendre_oracle(n, x):
    k = np.arange(n + 1)
    V = npleg.legvander(np.atleast_1d(x), n) * np.sqrt((2 * k + 1) / 2)
    return 1 / np.sum(V * V, axis=1)


def test_christoffel_1d_oracle():
    xs = np.linspace(-1, 1, 11)
    for n in (0, 1, 5, 20, 40):
        assert np.allclose(christoffel_1d(n, xs), orthonormal_legendre_oracle(n, xs), rtol=1e-13)
    # K_n(1, 1) = sum (2k+1)/2 = (n+1)^2 / 2
    assert christoffel_1d(9, 1.0) == pytest.approx(2 / 100)
    assert christoffel_1d(0, 0.3) == pytest.approx(2.0)


@pytest.mark.parametrize("n", [2, 5, 8, 13, 20, 27, 32])
def test_disc_center_closed_form(n):
    # only radial terms survive at the origin: K_n(0, 0) = (floor(n/2) + 1)^2 / pi
    lam = christoffel_eval(Ball.unit(2), n, [0.0, 0.0]).value
    assert lam == pytest.approx(pi / (n // 2 + 1) ** 2, rel=1e-9)


def test_degree_zero_is_volume():
    for body in (square(), Ball.unit(2), LpBall(3.0), HalfBall3()):
        x = body.interior_point()
        assert christoffel_eval(body, 0, x).value == pytest.approx(body.volume(), rel=1e-10)


def test_degree_caps():
    with pytest.raises(DegreeTooLarge):
        christoffel_eval(Ball.unit(3), 15, [0, 0, 0])
    with pytest.raises(DegreeTooLarge):
        christoffel_eval(Ball.unit(2), 33, [0, 0])


def test_decreasing_in_degree():
    body = LpBall(1.5)
    X = np.array([[0.0, 0.0], [0.5, 0.2], [0.8, 0.1]])
    prev = christoffel_values(body, 1, X)
    for n in range(2, 14):
        cur = christoffel_values(body, n, X)
        assert np.all(cur <= prev * (1 + 1e-10))
        prev = cur


def test_reproducing_property(disc):
    n = 7
    F = gram_factor(disc, n)
    rule = body_rule(disc, 2 * n)
    x = np.array([[0.3, -0.6]])
    Kx = F.kernel(rule.nodes, x)[:, 0]
    assert rule.integrate(Kx * Kx).value == pytest.approx(float(F.kernel_diag(x)[0]), rel=1e-11)
    y = np.array([[-0.1, 0.4]])
    assert kernel_eval(disc, n, x[0], y[0]) == pytest.approx(kernel_eval(disc, n, y[0], x[0]), rel=1e-12)


@given(seed=st.integers(0, 100_000), n=st.integers(1, 8))
def test_affine_invariance(seed, n):
    rng = np.random.default_rng(seed)
    poly = random_polygon(rng)
    A = rng.normal(size=(2, 2))
    if abs(np.linalg.det(A)) < 0.2:
        A += np.eye(2)
    T = AffineMap(A, rng.normal(size=2))
    x = interior_point(poly, rng)
    lam = christoffel_eval(poly, n, x).value
    lam_img = christoffel_eval(AffineImage(T, poly), n, T(x[None, :])[0]).value
    assert lam_img == pytest.approx(lam * abs(T.det), rel=1e-9)


def test_cholesky_and_orthogonal_paths_agree(disc):
    X = np.array([[0.0, 0.0], [0.7, 0.1], [0.2, -0.95]])
    a = 1 / gram_factor(disc, 12, algorithm="cholesky").kernel_diag(X)
    b = 1 / gram_factor(disc, 12, algorithm="orthogonal").kernel_diag(X)
    assert np.allclose(a, b, rtol=1e-10)


def test_extended_precision_agrees():
    body = LpBall(4.0)
    x = [0.5, 0.5]
    a = christoffel_eval(body, 10, x).value
    b = christoffel_eval(body, 10, x, precision="extended").value
    assert b == pytest.approx(a, rel=1e-10)


def test_condition_warning_on_forced_cholesky(disc):
    with pytest.warns(ConditionTooHigh):
        gram_factor(disc, 24, algorithm="cholesky")


def test_auto_path_is_quiet_at_cap(disc):
    with warnings.catch_warnings():
        warnings.simplefilter("error", ConditionTooHigh)
        lam = christoffel_eval(disc, 32, [0.0, 0.0])
    assert lam.method == "arc_quadrature"


def test_exterior_flag(disc):
    v = christoffel_eval(disc, 6, [1.5, 0.0])
    assert v.exterior and v.value > 0
    assert not christoffel_eval(disc, 6, [0.5, 0.0]).exterior


@pytest.mark.parametrize("body", [
    Polygon2D(np.array([[0, 0], [4, 0], [4.2, 0.3], [0.1, 0.2]])), LpBall(1.0, 3), HalfBall3(),
])
def test_john_position(body):
    T = john_map(body)
    h = AffineImage(T, body).support(unit_directions(body.dim, 20000))
    assert h.min() >= 1 - 1e-9
    assert h.max() <= body.dim


def test_john_normalized_evaluation_is_invariant():
    poly = Polygon2D(np.array([[0, 0], [4, 0], [4.2, 0.3], [0.1, 0.2]]))
    x = np.array([2.0, 0.1])
    plain = christoffel_eval(poly, 8, x).value
    assert christoffel_eval(poly, 8, x, john=True).value == pytest.approx(plain, rel=1e-9)
    assert isinstance(normalized_body(poly), AffineImage)
