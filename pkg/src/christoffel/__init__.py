"""Christoffel functions of convex bodies in dimensions 1 to 3."""

from .basis import BasisSpec, basis_eval
from .errors import ConditionTooHigh
from .geometry import (
    AffineImage, AffineMap, Ball, HalfBall3, Hull, LpBall, Polygon2D, Revolution, measure,
)
from .kernel import ChristoffelValue, christoffel_1d, christoffel_eval, christoffel_values, kernel_eval
from .quadrature import ball_moment, body_integral, gram_matrix, polygon_moment

__version__ = "0.1.0"
