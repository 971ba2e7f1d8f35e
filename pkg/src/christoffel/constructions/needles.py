"""Needle polynomials certifying upper bounds for the Christoffel function."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..basis import legendre_table
from ..errors import SigmaViolated
from ..geometry.affine import AffineMap
from ..geometry.bodies import ConvexBody
from ..geometry.measure import Measurement
from ..kernel import christoffel_1d
from ..quadrature import IntegralResult, body_integral
from .boxmaps import BoxMap


def univariate_needle(m: int, y: float) -> np.ndarray:
    """Legendre coefficients of ``K_m(t, y) / K_m(y, y)`` on ``[-1, 1]``.

    This is the unique minimizer of ``int q^2`` over degree ``m`` with
    ``q(y) = 1``, so ``int q^2 = lambda_m([-1, 1], y)``.
    """
    P = legendre_table(float(y), m)
    k = np.arange(m + 1)
    c = (2 * k + 1) / 2 * P
    return c / float(c @ P)


def legendre_series(coef, t) -> np.ndarray:
    P = legendre_table(t, len(coef) - 1)
    return P @ np.asarray(coef)


@dataclass(frozen=True, eq=False)
class Certificate:
    """``P(z) = prod_i q_i((T^-1 z)_i)`` with ``P(x) = 1`` and verified ``int_D P^2``."""

    T: AffineMap
    y: np.ndarray
    degrees: tuple
    coefficients: tuple
    value_at_x: float
    l2sq: IntegralResult
    bound: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def degree(self) -> int:
        return int(sum(self.degrees))

    def __call__(self, Z) -> np.ndarray:
        Y = self.T.inverse()(np.atleast_2d(Z))
        out = np.ones(Y.shape[0])
        for i, c in enumerate(self.coefficients):
            out *= legendre_series(c, Y[:, i])
        return out

    def to_dict(self) -> dict:
        diag = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.diagnostics.items()}
        return {"map": self.T.to_dict(), "y": self.y.tolist(), "degrees": list(self.degrees),
                "coefficients": [list(map(float, c)) for c in self.coefficients],
                "value_at_x": self.value_at_x,
                "l2sq": {"value": self.l2sq.value, "abs_error_bound": self.l2sq.abs_error_bound,
                         "method": self.l2sq.method},
                "bound": self.bound, "diagnostics": diag}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def needle_certificate(body: ConvexBody, n: int, box_map: BoxMap) -> Certificate:
    d = body.dim
    if n < d:
        raise ValueError("degree must be at least the dimension")
    m = n // d
    y = np.asarray(box_map.y, dtype=float)
    coefs = tuple(univariate_needle(m, yi) for yi in y)
    degrees = (m,) * d
    partial = Certificate(box_map.T, y, degrees, coefs, 1.0, IntegralResult(np.nan, 0.0, ""), np.nan)
    x = box_map.T(y)
    value = float(partial(x[None, :])[0])
    l2sq = body_integral(body, lambda Z: partial(Z) ** 2, 2 * d * m)
    lam_1d = [float(christoffel_1d(m, yi)) for yi in y]
    bound = box_map.det * float(np.prod(lam_1d))
    diag = {"box_kind": box_map.kind, "det": box_map.det, "univariate_lambda": lam_1d}
    return Certificate(box_map.T, y, degrees, coefs, value, l2sq, bound, diag)


def bound_rhs(meas: Measurement, n: int, d: int, sigma: float = 1.0) -> float:
    """Right-hand side of the upper bounds without constants.

    ``d = 2``: ``n^-2 sqrt(min(l1 l2, delta))``;
    ``d = 3``: ``n^-3 min(sqrt(delta), delta^(-1/2) section_volume)``.
    """
    delta = meas.delta
    if delta < sigma * n ** -2:
        raise SigmaViolated(f"delta = {delta:.3g} is below sigma n^-2 = {sigma * n ** -2:.3g}")
    if d == 2:
        return n ** -2.0 * np.sqrt(min(meas.l1 * meas.l2, delta))
    if d == 3:
        return n ** -3.0 * min(np.sqrt(delta), meas.section_volume / np.sqrt(delta))
    raise ValueError("bound is stated for d = 2 and d = 3")
