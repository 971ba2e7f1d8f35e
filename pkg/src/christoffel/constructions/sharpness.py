"""Bodies on which the upper bounds are attained up to constants."""

from __future__ import annotations

from math import gamma, pi, sqrt

import numpy as np

from ..errors import ParameterOutOfRange, RoundTripFailed
from ..geometry.affine import AffineMap
from ..geometry.bodies import AffineImage, Ball, ConvexBody, Hull, Revolution, unit_directions
from ..geometry.measure import boundary_distance, chord_lengths, exit_distance, section_volume

ROUND_TRIP_TOL = 1e-6


def unit_ball_volume(k: int) -> float:
    return pi ** (k / 2) / gamma(k / 2 + 1)


def chord_heights(alpha: float, delta: float):
    """``(m1, m2)``: heights below and above the axis where ``x = -alpha y + 2 - delta`` meets ``|p| = 2``."""
    S = sqrt(4 * alpha ** 2 + 4 * delta - delta ** 2)
    k = 2 - delta
    return (S - alpha * k) / (1 + alpha ** 2), (S + alpha * k) / (1 + alpha ** 2)


def solve_shear(delta: float, ratio: float, tol: float = 1e-12) -> float:
    """``alpha`` in ``[-1, 1]`` with ``m2 / m1 = ratio`` (the quotient increases with alpha)."""
    q = lambda a: np.divide(*reversed(chord_heights(a, delta)))
    lo, hi = -1.0, 1.0
    if not q(lo) <= ratio <= q(hi):
        raise ParameterOutOfRange(f"chord ratio {ratio:.3g} is not reachable with |alpha| <= 1")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if q(mid) < ratio:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _sheared_disc_hull(delta, l1, l2):
    alpha = solve_shear(delta, l2 / l1)
    # m1 m2 = delta (4 - delta) / (1 + alpha^2), so scale by the chord itself
    m1, _ = chord_heights(alpha, delta)
    mu = l1 / m1
    T = AffineMap(np.array([[1.0, alpha], [0.0, mu]]), np.zeros(2))
    return Hull((Ball.unit(2), AffineImage(T, Ball.unit(2, 2.0)))), alpha, mu


def sharpness_body_2d(delta: float, l1: float, l2: float, verify: bool = True):
    """Planar body with exit distance ``delta`` and chords ``l1``, ``l2`` at ``x = (2 - delta, 0)``, ``u = e_1``.

    Returns ``(body, x)``.
    """
    if not (10 * delta < l1 < 0.1 and 10 * delta < l2 < 0.1):
        raise ParameterOutOfRange("need 10 delta < l_i < 1/10")
    x = np.array([2 - delta, 0.0])
    if l1 * l2 <= delta:
        body, _, _ = _sheared_disc_hull(delta, l1, l2)
    else:
        # base chords with product delta, shear sign matching the longer side, so
        # the vertical support line at (2, 0) survives the added chord ends
        if l2 >= l1:
            b1 = min(l1, sqrt(delta))
            b2 = delta / b1
        else:
            b2 = min(l2, sqrt(delta))
            b1 = delta / b2
        base, _, _ = _sheared_disc_hull(delta, b1, b2)
        ends = [(2 - delta, l2)] if l2 > b2 else []
        ends += [(2 - delta, -l1)] if l1 > b1 else []
        body = Hull(base.parts, np.array(ends))
    if verify:
        err = roundtrip_2d(body, x, delta, l1, l2)
        if err > ROUND_TRIP_TOL:
            raise RoundTripFailed(f"measurements differ from the request by {err:.3g}")
        check_ball_sandwich(body, 1.0, 4.0)
    return body, x


def roundtrip_2d(body, x, delta, l1, l2) -> float:
    u = np.array([1.0, 0.0])
    got = np.array([exit_distance(body, x, u), *chord_lengths(body, x, u)])
    return float(np.max(np.abs(got - np.array([delta, l1, l2]))))


def check_ball_sandwich(body: ConvexBody, inner: float, outer: float) -> None:
    """Raise unless ``inner B ⊂ body ⊂ outer B`` (support functions on a direction sample)."""
    U = unit_directions(body.dim, 4096)
    h = np.asarray(body.support(U))
    if h.min() < inner * (1 - 1e-12) or h.max() > outer * (1 + 1e-12):
        raise RoundTripFailed(f"support ranges over [{h.min():.6g}, {h.max():.6g}], "
                              f"outside [{inner}, {outer}]")


def default_betas(d: int):
    """``(beta1, beta2)`` keeping both cases reachable and the unit ball clear of the section."""
    w = unit_ball_volume(d - 1)
    return w * (d - 1) * 2.5 ** (d - 1), w / 2


def section_scale(delta: float, v: float, d: int) -> float:
    """``mu`` with ``Vol_{d-1}(mu sqrt(delta (4 - delta)) B^{d-1}) = v``."""
    w = unit_ball_volume(d - 1)
    return (v / w) ** (1 / (d - 1)) / sqrt(delta * (4 - delta))


def sharpness_body_nd(delta: float, v: float, d: int, beta1: float | None = None,
                      beta2: float | None = None, verify: bool = True):
    """Body with exit distance ``delta`` and central section volume ``v`` at ``x = (2 - delta) e_1``.

    Returns ``(body, x)``; in 3D the body is a solid of revolution about the first axis.
    """
    if d not in (2, 3):
        raise ValueError("d must be 2 or 3")
    b1, b2 = default_betas(d)
    b1 = b1 if beta1 is None else beta1
    b2 = b2 if beta2 is None else beta2
    if not (0 < delta < 0.5 and b1 * delta ** (d - 1) < v < b2):
        raise ParameterOutOfRange(f"need beta1 delta^(d-1) < v < beta2 with (beta1, beta2) = ({b1:.3g}, {b2:.3g})")
    mu = section_scale(delta, v, d)
    if mu <= 1:
        T = AffineMap(np.diag([1.0, mu]), np.zeros(2))
        planar = Hull((Ball.unit(2), AffineImage(T, Ball.unit(2, 2.0))))
    else:
        rho = mu * sqrt(delta * (4 - delta))
        planar = Hull((Ball.unit(2, 2.0),), np.array([[2 - delta, rho], [2 - delta, -rho]]))
    body = planar if d == 2 else Revolution(planar, 0)
    x = np.zeros(d)
    x[0] = 2 - delta
    if verify:
        u = np.eye(d)[0]
        got_delta = exit_distance(body, x, u)
        got_v = section_volume(body, x, u)
        got_dist, _ = boundary_distance(body, x)
        err = max(abs(got_delta - delta), abs(got_v - v) / v, abs(got_dist - delta))
        if err > ROUND_TRIP_TOL:
            raise RoundTripFailed(f"measurements differ from the request by {err:.3g}")
        check_ball_sandwich(body, 1.0, 3.0)
    return body, x
