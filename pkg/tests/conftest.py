import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy.spatial import ConvexHull

from christoffel.geometry.bodies import Ball, HalfBall3, LpBall, Polygon2D

settings.register_profile("lab", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile("lab")

# one line per acceptance criterion, repeated after the test summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)


def square():
    return Polygon2D(np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]))


def random_polygon(rng, lo=-1.0, hi=1.0, k_max=8):
    """Convex hull of a few uniform points, counter-clockwise."""
    while True:
        P = rng.uniform(lo, hi, (int(rng.integers(3, k_max + 1)), 2))
        try:
            hull = ConvexHull(P)
        except Exception:
            continue
        V = P[hull.vertices]
        if hull.volume > 0.05 * (hi - lo) ** 2:
            return Polygon2D(V)


def interior_point(poly, rng):
    w = rng.dirichlet(np.ones(len(poly.vertices)))
    c = poly.vertices.mean(axis=0)
    return 0.5 * c + 0.5 * w @ poly.vertices


@pytest.fixture
def disc():
    return Ball.unit(2)


@pytest.fixture
def unit_square():
    return square()


@pytest.fixture
def halfball():
    return HalfBall3()


@pytest.fixture
def lp15():
    return LpBall(1.5)
