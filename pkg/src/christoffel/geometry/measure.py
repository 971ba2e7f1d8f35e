"""Exit distances, distance to the boundary, chords and sections."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from ..errors import XOnBoundary
from .bodies import Ball, ConvexBody, HalfBall3, Polygon2D, unit_directions

REL_TOL = 1e-12
SECTION_RAYS = 512


def _unit(u):
    u = np.asarray(u, dtype=float)
    return u / np.linalg.norm(u, axis=-1, keepdims=True)


def body_scale(body: ConvexBody) -> float:
    lo, hi = body.bounding_box()
    return float(np.linalg.norm(hi - lo))


def check_interior(body: ConvexBody, x, tol: float = REL_TOL) -> None:
    """Raise :class:`XOnBoundary` unless ``x`` is an interior point (up to ``tol`` relative)."""
    x = np.asarray(x, dtype=float)
    if not bool(body.contains(x)):
        raise XOnBoundary(f"point {x.tolist()} is not inside the body")
    U = unit_directions(body.dim, 64)
    gap = float(np.min(body.support(U) - U @ x))
    if gap <= tol * body_scale(body):
        raise XOnBoundary(f"point {x.tolist()} lies on the boundary")


def exit_distances(body: ConvexBody, x, U, rel_tol: float = REL_TOL) -> np.ndarray:
    """``max{t : x + t u in D}`` for every row ``u`` of ``U`` (bisection on membership)."""
    x = np.asarray(x, dtype=float)
    U = _unit(np.atleast_2d(U))
    hi = np.asarray(body.support(U), dtype=float) - U @ x
    hi = np.maximum(hi, 0.0) * (1.0 + 1e-12) + 1e-300
    lo = np.zeros_like(hi)
    stop = rel_tol * hi
    active = np.ones(hi.size, dtype=bool)
    for _ in range(200):
        if not active.any():
            break
        mid = 0.5 * (lo[active] + hi[active])
        inside = np.atleast_1d(body.contains(x + mid[:, None] * U[active]))
        idx = np.flatnonzero(active)
        lo[idx[inside]] = mid[inside]
        hi[idx[~inside]] = mid[~inside]
        active = (hi - lo) > stop
    return 0.5 * (lo + hi)


def exit_distance(body: ConvexBody, x, u, rel_tol: float = REL_TOL) -> float:
    check_interior(body, x)
    delta = float(exit_distances(body, x, np.atleast_2d(u), rel_tol)[0])
    if delta <= rel_tol * body_scale(body):
        raise XOnBoundary("exit distance vanishes")
    return delta


def _closed_form_distance(body, x):
    if isinstance(body, Polygon2D):
        V = body.vertices
        E = np.roll(V, -1, axis=0) - V
        n = np.column_stack([E[:, 1], -E[:, 0]]) / np.hypot(E[:, 0], E[:, 1])[:, None]
        d = np.sum(n * (V - x), axis=1)
        k = int(np.argmin(d))
        return float(d[k]), n[k]
    if isinstance(body, Ball):
        r = x - body.center
        nr = float(np.linalg.norm(r))
        u = r / nr if nr > 0 else np.eye(body.dim)[0]
        return body.radius - nr, u
    if isinstance(body, HalfBall3):
        nr = float(np.linalg.norm(x))
        if x[2] <= 1.0 - nr:
            return float(x[2]), np.array([0.0, 0.0, -1.0])
        return 1.0 - nr, x / nr
    return None


def _tangent_basis(u):
    a = np.eye(3)[int(np.argmin(np.abs(u)))]
    e = np.cross(u, a)
    e /= np.linalg.norm(e)
    return e, np.cross(u, e)


def boundary_distance(body: ConvexBody, x):
    """``(dist(x, boundary), u*)`` with ``x + dist * u*`` on the boundary."""
    x = np.asarray(x, dtype=float)
    check_interior(body, x)
    closed = _closed_form_distance(body, x)
    if closed is not None:
        return closed
    if body.dim == 1:
        h = body.support(np.array([[1.0], [-1.0]])) - np.array([x[0], -x[0]])
        k = int(np.argmin(h))
        return float(h[k]), np.array([1.0 if k == 0 else -1.0])
    gap = lambda U: body.support(U) - U @ x
    if body.dim == 2:
        theta = np.linspace(0.0, 2 * np.pi, 4096, endpoint=False)
        g = gap(np.column_stack([np.cos(theta), np.sin(theta)]))
        k = int(np.argmin(g))
        step = theta[1] - theta[0]
        f = lambda t: float(gap(np.array([np.cos(t), np.sin(t)])))
        res = minimize_scalar(f, bounds=(theta[k] - step, theta[k] + step), method="bounded",
                              options={"xatol": 1e-12})
        t = res.x if res.fun < g[k] else theta[k]
        u = np.array([np.cos(t), np.sin(t)])
        return float(min(res.fun, g[k])), u
    U = unit_directions(3, 8192)
    g = gap(U)
    k = int(np.argmin(g))
    u0 = U[k]
    e, f = _tangent_basis(u0)
    to_u = lambda s: _unit(u0 + s[0] * e + s[1] * f)
    res = minimize(lambda s: float(gap(to_u(s))), np.zeros(2), method="Nelder-Mead",
                   options={"xatol": 1e-11, "fatol": 1e-14, "initial_simplex": [[0, 0], [0.03, 0], [0, 0.03]]})
    if res.fun < g[k]:
        return float(res.fun), to_u(res.x)
    return float(g[k]), u0


def chord_direction(u) -> np.ndarray:
    """``u`` rotated by +90 degrees."""
    u = _unit(u)
    return np.array([-u[1], u[0]])


def chord_lengths(body: ConvexBody, x, u):
    """``(l1, l2)``: reach from ``x`` along ``-v`` and ``+v`` where ``v`` is ``u`` turned by +90 degrees."""
    if body.dim != 2:
        raise ValueError("chord lengths are defined for planar bodies")
    check_interior(body, x)
    v = chord_direction(u)
    l1, l2 = exit_distances(body, x, np.array([-v, v]))
    return float(l1), float(l2)


def plane_basis(u):
    """Orthonormal ``(e, f)`` spanning the plane perpendicular to ``u`` in R^3."""
    return _tangent_basis(_unit(u))


def section_polygon(body: ConvexBody, x, u, rays: int = SECTION_RAYS):
    """Rays from ``x`` inside the plane through ``x`` with normal ``u`` (3D).

    Returns ``(points, radii, (e, f))``: boundary points of the section in R^3,
    their distances from ``x``, and the in-plane basis used for the angles.
    """
    x = np.asarray(x, dtype=float)
    check_interior(body, x)
    e, f = plane_basis(u)
    theta = np.linspace(0.0, 2 * np.pi, rays, endpoint=False)
    dirs = np.cos(theta)[:, None] * e + np.sin(theta)[:, None] * f
    r = exit_distances(body, x, dirs)
    return x + r[:, None] * dirs, r, (e, f)


def section_volume(body: ConvexBody, x, u, rays: int = SECTION_RAYS) -> float:
    """(d-1)-volume of ``{y in D : <y - x, u> = 0}``."""
    if body.dim == 2:
        l1, l2 = chord_lengths(body, x, u)
        return l1 + l2
    if body.dim != 3:
        raise ValueError("sections are defined for d = 2, 3")
    _, r, _ = section_polygon(body, x, u, rays)
    # periodic trapezoid rule for (1/2) int r(theta)^2 dtheta
    return float(np.pi * np.mean(r * r))


@dataclass(frozen=True)
class Measurement:
    x: np.ndarray
    u: np.ndarray
    delta: float
    dist_boundary: float
    nu: float
    section_volume: float
    v_dir: np.ndarray | None = None
    l1: float | None = None
    l2: float | None = None

    def to_dict(self) -> dict:
        out = {}
        for k, v in self.__dict__.items():
            out[k] = v.tolist() if isinstance(v, np.ndarray) else v
        return out


def measure(body: ConvexBody, x, u=None) -> Measurement:
    x = np.asarray(x, dtype=float)
    dist, ustar = boundary_distance(body, x)
    u = ustar if u is None else _unit(u)
    delta = exit_distance(body, x, u)
    if body.dim == 2:
        l1, l2 = chord_lengths(body, x, u)
        return Measurement(x, u, delta, dist, delta / dist, l1 + l2, chord_direction(u), l1, l2)
    if body.dim == 1:
        return Measurement(x, u, delta, dist, delta / dist, 1.0)
    return Measurement(x, u, delta, dist, delta / dist, section_volume(body, x, u))


def boundary_samples(body: ConvexBody, k: int = 4096, center=None) -> np.ndarray:
    """Boundary points hit by ``k`` rays from an interior point."""
    c = body.interior_point() if center is None else np.asarray(center, dtype=float)
    U = unit_directions(body.dim, k)
    return c + exit_distances(body, c, U)[:, None] * U


def inradius_on_ray(body: ConvexBody, x, u, grid: int = 256):
    """``sup dist(y, boundary)`` over ``y = x + t u``, ``t <= 0`` inside the body.

    Returns ``(r, t0)``.  A coarse grid is refined by a bounded scalar search.
    """
    x = np.asarray(x, dtype=float)
    u = _unit(u)
    back = float(exit_distances(body, x, -u[None, :])[0])
    U = unit_directions(body.dim, 1024 if body.dim == 2 else 2048)
    hU = body.support(U)

    def dist(t):
        return float(np.min(hU - U @ (x + t * u)))

    ts = -np.linspace(0.0, back, grid + 1)[:-1]
    vals = np.array([dist(t) for t in ts])
    k = int(np.argmax(vals))
    lo, hi = ts[min(k + 1, grid - 1)], ts[max(k - 1, 0)]
    res = minimize_scalar(lambda t: -dist(t), bounds=(min(lo, hi), max(lo, hi)), method="bounded",
                          options={"xatol": 1e-10 * max(back, 1e-300)})
    if -res.fun > vals[k]:
        return -res.fun, float(res.x)
    return float(vals[k]), float(ts[k])
