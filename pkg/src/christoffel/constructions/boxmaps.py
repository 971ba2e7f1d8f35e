"""Circumscribed parallelotopes ``D ⊂ T([-1, 1]^d)`` placing a vertex near ``x``.

Three constructions are provided: a slab-and-halfspace box driven only by the
exit distance, a planar parallelogram built from the two chord lengths, and a
3D corner built over the largest triangle inscribed in the section through
``x``.  Each returns a :class:`BoxMap` whose containment has been verified.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from ..errors import ContainmentFailed, DegenerateAngle, InvalidNormal, SectionDegenerate
from ..geometry.affine import AffineMap
from ..geometry.bodies import ConvexBody, Polygon2D, unit_directions
from ..geometry.measure import (
    boundary_samples, body_scale, chord_direction, exit_distance, exit_distances, inradius_on_ray,
    plane_basis, section_polygon,
)

CONTAINMENT_TOL = 1e-9
CONTAINMENT_SAMPLES = 4096
# relative enlargement of the reflected triangle, absorbing the polygonization of the section
SECTION_MARGIN = 1e-3


@dataclass(frozen=True, eq=False)
class BoxMap:
    T: AffineMap
    y: np.ndarray
    kind: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def slacks(self) -> np.ndarray:
        return 1.0 - np.abs(self.y)

    @property
    def det(self) -> float:
        return abs(self.T.det)

    def to_dict(self) -> dict:
        diag = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.diagnostics.items()}
        return {"kind": self.kind, "map": self.T.to_dict(), "y": self.y.tolist(),
                "slacks": self.slacks.tolist(), "det": self.det, "diagnostics": diag}


def box_containment_gap(body: ConvexBody, T: AffineMap, samples: int = CONTAINMENT_SAMPLES) -> float:
    """Largest excess of ``max_i |(T^-1 p)_i|`` over 1 for ``p`` in ``D``.

    Exact part: the support function of ``D`` against every facet pair of the
    box.  Sampled part: ``samples`` radial boundary points.
    """
    inv = T.inverse()
    A, b = inv.matrix, inv.offset
    hi = np.asarray(body.support(A)) + b
    lo = np.asarray(body.support(-A)) - b
    exact = float(max(hi.max(), lo.max())) - 1.0
    P = boundary_samples(body, samples)
    sampled = float(np.max(np.abs(inv(P)))) - 1.0
    return max(exact, sampled)


def verify_box(body, T, y, x, tol=CONTAINMENT_TOL):
    gap = box_containment_gap(body, T)
    if gap > tol:
        raise ContainmentFailed(f"body leaves the parallelotope by {gap:.3g}")
    err = float(np.linalg.norm(T(y) - x))
    if err > 1e-10 * max(1.0, body_scale(body)):
        raise ContainmentFailed(f"T(y) misses x by {err:.3g}")
    return gap


def box_from_planes(normals, upper, lower) -> AffineMap:
    """``T`` mapping ``{z_i = 1}`` to ``<n_i, p> = upper_i`` and ``{z_i = -1}`` to ``<n_i, p> = lower_i``."""
    Nm = np.asarray(normals, dtype=float)
    c, e = np.asarray(upper, dtype=float), np.asarray(lower, dtype=float)
    width = c - e
    inv = AffineMap(2 * Nm / width[:, None], -(c + e) / width)
    return inv.inverse()


# ---------------------------------------------------------------- halfspace box


def halfspace_box_map(R: float, d: int, a: float, delta: float, w) -> BoxMap:
    """Box for a body inside ``R B^d`` with supporting hyperplane normal ``w`` at ``(a + delta) e_1``.

    Coordinates are normalized: ``x = a e_1`` and the exit direction is ``e_1``.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (d,):
        raise ValueError("normal has the wrong dimension")
    if not w[0] > 0:
        raise InvalidNormal(f"first component of the normal must be positive, got {w[0]:.3g}")
    if not delta > 0:
        raise ValueError("delta must be positive")
    s = R * d / w[0]
    A = np.zeros((d, d))
    A[0, 0] = 0.5 * (a + delta + s)
    A[0, 1:] = -R / w[0] * w[1:]
    A[1:, 1:] = R * np.eye(d - 1)
    off = np.zeros(d)
    off[0] = 0.5 * (a + delta - s)
    T = AffineMap(A, off)
    x = np.zeros(d)
    x[0] = a
    y = T.inverse()(x)
    diag = {"R": R, "a": a, "delta": delta, "w1": float(w[0]),
            "nominal_slack": 2 * w[0] * delta / (R * d), "exact_slack": 2 * delta / (a + delta + s)}
    return BoxMap(T, y, "halfspace", diag)


def orthonormal_frame(u) -> np.ndarray:
    """Rotation-like matrix whose first column is ``u``."""
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    if u.size == 1:
        return u.reshape(1, 1)
    if u.size == 2:
        return np.column_stack([u, [-u[1], u[0]]])
    e, f = plane_basis(u)
    return np.column_stack([u, e, f])


def supporting_normal(body: ConvexBody, p, prefer) -> np.ndarray:
    """Unit outward normal of a supporting hyperplane at boundary point ``p``, closest to ``prefer``."""
    p = np.asarray(p, dtype=float)
    prefer = np.asarray(prefer, dtype=float)
    d = body.dim
    U = unit_directions(d, 4096 if d == 2 else 8192)
    g = np.asarray(body.support(U)) - U @ p
    tol = 1e-6 * body_scale(body)
    cand = np.flatnonzero(g <= g.min() + tol)
    w0 = U[cand[np.argmax(U[cand] @ prefer)]]
    gap = lambda w: float(body.support(w) - w @ p)
    if d == 2:
        t0 = np.arctan2(w0[1], w0[0])
        step = 2 * np.pi / U.shape[0]
        res = minimize_scalar(lambda t: gap(np.array([np.cos(t), np.sin(t)])),
                              bounds=(t0 - 2 * step, t0 + 2 * step), method="bounded", options={"xatol": 1e-13})
        w = np.array([np.cos(res.x), np.sin(res.x)])
    else:
        e, f = plane_basis(w0)
        to_w = lambda s: (w0 + s[0] * e + s[1] * f) / np.linalg.norm(w0 + s[0] * e + s[1] * f)
        res = minimize(lambda s: gap(to_w(s)), np.zeros(2), method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-16, "initial_simplex": [[0, 0], [0.02, 0], [0, 0.02]]})
        w = to_w(res.x)
    return w if gap(w) <= gap(w0) else w0


def halfspace_box_for(body: ConvexBody, x, u) -> BoxMap:
    """World-coordinate wrapper of :func:`halfspace_box_map` for ``x`` and exit direction ``u``."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float) / np.linalg.norm(u)
    d = body.dim
    F = orthonormal_frame(u)
    c = body.interior_point()
    a = float((x - c) @ u)
    origin = x - a * u
    U = unit_directions(d, 4096 if d == 2 else 8192)
    R = float(np.max(np.asarray(body.support(U)) - U @ origin)) * 1.001
    delta = exit_distance(body, x, u)
    w_world = supporting_normal(body, x + delta * u, u)
    w = F.T @ w_world
    if not w[0] > 0:
        raise InvalidNormal(f"supporting normal {w_world.tolist()} points away from u")
    # put the hyperplane at the exact support level, so containment holds by construction
    level = float(body.support(w_world) - w_world @ origin)
    delta_plane = level / w[0] - a
    local = halfspace_box_map(R, d, a, delta_plane, w)
    T = AffineMap(F @ local.T.matrix, F @ local.T.offset + origin)
    y = T.inverse()(x)
    verify_box(body, T, y, x)
    diag = dict(local.diagnostics, delta_exit=delta, normal=w_world)
    return BoxMap(T, y, "halfspace", diag)


# ---------------------------------------------------------------- planar parallelogram


def _line(p, q):
    """``(n, c)`` with ``<n, z> = c`` through ``p`` and ``q``."""
    d = np.asarray(q, float) - np.asarray(p, float)
    n = np.array([d[1], -d[0]])
    return n, float(n @ p)


def _meet(l1, l2):
    M = np.array([l1[0], l2[0]])
    return np.linalg.solve(M, np.array([l1[1], l2[1]]))


def parallelogram_2d(body: ConvexBody, x, u, r: float | None = None, R: float | None = None) -> BoxMap:
    """Parallelogram from the chord construction; routes to the halfspace box when a chord reaches ``r``.

    ``r`` defaults to the largest inscribed radius centred on the backward ray
    ``x + t u``, ``t <= 0``; the circle of that radius is centred at the local origin.
    """
    if body.dim != 2:
        raise ValueError("parallelogram construction is planar")
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float) / np.linalg.norm(u)
    v = chord_direction(u)
    r_sup, t0 = inradius_on_ray(body, x, u)
    if r is None:
        r = r_sup
    origin = x + t0 * u
    a = -t0
    delta = exit_distance(body, x, u)
    l1, l2 = (float(t) for t in exit_distances(body, x, np.array([-v, v])))
    if R is None:
        U = unit_directions(2, 4096)
        R = float(np.max(np.asarray(body.support(U)) - U @ origin)) / 2
    if l1 >= r or l2 >= r:
        bm = halfspace_box_for(body, x, u)
        bm.diagnostics.update(routed=True, r=r, l1=l1, l2=l2, delta=delta)
        return bm
    # local coordinates: first axis v, second axis u, origin at the inscribed centre
    F = np.column_stack([v, u])
    to_world = lambda z: origin + np.asarray(z) @ F.T
    X = np.array([0.0, a])
    top = np.array([0.0, a + delta])
    ends = {1: np.array([-l1, a]), 2: np.array([l2, a])}
    q = {i: _line(ends[i], top) for i in (1, 2)}
    rl = {i: _line(np.array([(-1) ** i * r, 0.0]), ends[i]) for i in (1, 2)}
    P = {i: _meet(rl[i], q[3 - i]) for i in (1, 2)}
    normals, upper = [], []
    for i in (1, 2):
        n, _ = q[i]
        n = n / np.linalg.norm(n)
        c = float(n @ P[i])
        if c < 0:
            n, c = -n, -c
        normals.append(n)
        upper.append(c)
    normals, upper = np.array(normals), np.array(upper)
    dq1 = top - ends[1]
    dq2 = top - ends[2]
    sin_phi = abs(dq1[0] * dq2[1] - dq1[1] * dq2[0]) / (np.linalg.norm(dq1) * np.linalg.norm(dq2))
    if sin_phi < 1e-12:
        raise DegenerateAngle(f"sin(phi) = {sin_phi:.3g}")
    nw = normals @ F.T
    # the chord construction contains the body when x is close to the boundary;
    # far inside it may not, and the plane is pushed out to the support line
    support_up = np.array([float(body.support(nw[i])) - float(nw[i] @ origin) for i in range(2)])
    enlarged = upper < support_up - CONTAINMENT_TOL * max(1.0, R)
    upper = np.maximum(upper, support_up)
    lower = np.array([-(float(body.support(-nw[i])) + float(nw[i] @ origin)) for i in range(2)])
    local = box_from_planes(normals, upper, lower)
    T = AffineMap(F @ local.matrix, F @ local.offset + origin)
    y = T.inverse()(x)
    verify_box(body, T, y, x)
    diag = {"r": r, "R": R, "t0": t0, "delta": delta, "l1": l1, "l2": l2, "sin_phi": float(sin_phi),
            "det": abs(T.det), "routed": False, "upper_enlarged": enlarged.tolist(),
            "angle_ratio": float(sin_phi / (delta / l1 + delta / l2)),
            "det_sin_phi": float(abs(T.det) * sin_phi)}
    return BoxMap(T, y, "parallelogram", diag)


# ---------------------------------------------------------------- 3D corner


def max_area_triangle(poly) -> np.ndarray:
    """Vertices of a largest-area triangle with vertices among the polygon's vertices."""
    V = np.asarray(poly.vertices if isinstance(poly, Polygon2D) else poly, dtype=float)
    k = V.shape[0]
    if k < 3:
        raise SectionDegenerate("need at least three vertices")
    best, arg = -1.0, None
    for i in range(k - 2):
        D = V[i + 1:] - V[i]
        A = np.abs(D[:, 0][:, None] * D[:, 1][None, :] - D[:, 1][:, None] * D[:, 0][None, :])
        A = np.triu(A, 1)
        j, m = np.unravel_index(np.argmax(A), A.shape)
        if A[j, m] > best:
            best, arg = A[j, m], (i, i + 1 + j, i + 1 + m)
    return V[list(arg)]


def triangle_area(S) -> float:
    S = np.asarray(S, dtype=float)
    d1, d2 = S[1] - S[0], S[2] - S[0]
    return 0.5 * abs(d1[0] * d2[1] - d1[1] * d2[0])


def homothety(S, center, k: float) -> np.ndarray:
    S = np.asarray(S, dtype=float)
    return k * (S - center) + center


def _in_triangle(P, S, tol=0.0):
    """Membership of planar points ``P`` in triangle ``S`` (either orientation)."""
    a, b, c = S
    def side(p, q, r):
        return (q[0] - p[0]) * (r[:, 1] - p[1]) - (q[1] - p[1]) * (r[:, 0] - p[0])
    orient = np.sign(side(a, b, c[None, :]))[0]
    s = [orient * side(a, b, P), orient * side(b, c, P), orient * side(c, a, P)]
    return np.all(np.array(s) >= -tol, axis=0)


def corner_map_3d(body: ConvexBody, x, u, margin: float = SECTION_MARGIN) -> BoxMap:
    """Corner parallelotope over the largest triangle in the section through ``x``.

    Requires the plane through ``x + delta u`` with normal ``u`` to support ``D``.
    """
    if body.dim != 3:
        raise ValueError("corner construction is three-dimensional")
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float) / np.linalg.norm(u)
    delta = exit_distance(body, x, u)
    back = float(exit_distances(body, x, -u[None, :])[0])
    pts, radii, (e, f) = section_polygon(body, x, u)
    plane = np.column_stack([(pts - x) @ e, (pts - x) @ f])
    area = float(np.pi * np.mean(radii ** 2))
    if area <= 1e-12 * body_scale(body) ** 2:
        raise SectionDegenerate("section through x is degenerate")
    S = max_area_triangle(plane)
    z = S.mean(axis=0)
    S1 = homothety(homothety(S, z, -2.0), z, 1.0 + margin)
    if not np.all(_in_triangle(plane, S1, 1e-12)):
        raise ContainmentFailed("section is not inside the reflected triangle")
    b = min(back, delta)
    k = 1.0 + delta / b
    S2 = homothety(S1, z, 3 * (k - 1) + 1)
    # local coordinates (along u, along e, along f) with x at the origin
    F = np.column_stack([u, e, f])
    apex = np.array([2 * delta, 0.0, 0.0])
    base = np.column_stack([np.full(3, delta), S2])
    inside = np.array([0.0, *z])
    normals, upper = [], []
    for j, m in ((1, 2), (2, 0), (0, 1)):
        n = np.cross(base[j] - apex, base[m] - apex)
        n /= np.linalg.norm(n)
        if n @ (inside - apex) > 0:
            n = -n
        normals.append(n)
        upper.append(float(n @ apex))
    normals = np.array(normals)
    nw = normals @ F.T
    lower = np.array([-(float(body.support(-nw[i])) + float(nw[i] @ x)) for i in range(3)])
    local = box_from_planes(normals, upper, lower)
    T = AffineMap(F @ local.matrix, F @ local.offset + x)
    y = T.inverse()(x)
    verify_box(body, T, y, x)
    diag = {"delta": delta, "backward_reach": back, "homothety": 3 * (k - 1) + 1,
            "section_area": area, "triangle_area": triangle_area(S), "det": abs(T.det),
            "det_ratio": float(abs(T.det) / (delta ** -2 * area)), "triangle": S, "S1": S1, "S2": S2}
    return BoxMap(T, y, "corner", diag)
