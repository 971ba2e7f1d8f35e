"""Parametrized boundary pieces of planar convex bodies.

A planar body exposes its boundary as a closed counter-clockwise chain of
pieces.  Straight pieces are :class:`Segment`; curved pieces are :class:`Arc`
objects wrapping a curve with vectorized ``point``/``deriv`` methods.  The
quadrature module integrates over these chains, and :class:`RadialBoundary`
turns a chain into an exact membership / ray-intersection oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class EllipseCurve:
    """``center + axes @ (cos t, sin t)``; a circle when ``axes`` is a multiple of I."""

    center: np.ndarray
    axes: np.ndarray

    def point(self, t):
        t = np.asarray(t, dtype=float)
        cs = np.stack([np.cos(t), np.sin(t)], axis=-1)
        return self.center + cs @ self.axes.T

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        ds = np.stack([-np.sin(t), np.cos(t)], axis=-1)
        return ds @ self.axes.T


@dataclass(frozen=True, eq=False)
class LpCurve:
    """The curve ``|x|^a + |y|^a = s^a`` parametrized by ``t`` in ``[0, 2 pi]``.

    ``x = s sgn(cos t)|cos t|^(2/a)``, ``y = s sgn(sin t)|sin t|^(2/a)``.  The
    parametrization is singular at multiples of pi/2 unless ``a == 2``.
    """

    alpha: float
    scale: float = 1.0

    @property
    def grading_levels(self) -> int:
        # the panel left at a singular end carries mass ~ width^(2/a); keep it below 1e-15
        return max(24, int(np.ceil(9.1 * self.alpha)))

    def point(self, t):
        t = np.asarray(t, dtype=float)
        p = 2.0 / self.alpha
        c, s = np.cos(t), np.sin(t)
        x = np.sign(c) * np.abs(c) ** p
        y = np.sign(s) * np.abs(s) ** p
        return self.scale * np.stack([x, y], axis=-1)

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        p = 2.0 / self.alpha
        c, s = np.cos(t), np.sin(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            dx = -p * np.abs(c) ** (p - 1.0) * s
            dy = p * np.abs(s) ** (p - 1.0) * c
        return self.scale * np.stack([dx, dy], axis=-1)


@dataclass(frozen=True, eq=False)
class MappedCurve:
    matrix: np.ndarray
    offset: np.ndarray
    base: object

    @property
    def grading_levels(self):
        return getattr(self.base, "grading_levels", None)

    def point(self, t):
        return self.base.point(t) @ self.matrix.T + self.offset

    def deriv(self, t):
        return self.base.deriv(t) @ self.matrix.T


@dataclass(frozen=True, eq=False)
class ReversedCurve:
    base: object
    pivot: float

    @property
    def grading_levels(self):
        return getattr(self.base, "grading_levels", None)

    def point(self, t):
        return self.base.point(self.pivot - np.asarray(t, dtype=float))

    def deriv(self, t):
        return -self.base.deriv(self.pivot - np.asarray(t, dtype=float))


@dataclass(frozen=True, eq=False)
class Segment:
    a: np.ndarray
    b: np.ndarray

    t0 = 0.0
    t1 = 1.0
    graded = (False, False)
    is_segment = True

    def point(self, t):
        t = np.asarray(t, dtype=float)
        return self.a + t[..., None] * (self.b - self.a)

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(self.b - self.a, t.shape + (2,)).copy()

    def length(self) -> float:
        return float(np.hypot(*(self.b - self.a)))

    def sub(self, ta: float, tb: float) -> "Segment":
        return Segment(self.point(np.array(ta)), self.point(np.array(tb)))

    def mapped(self, A, b) -> "Segment":
        return Segment(A @ self.a + b, A @ self.b + b)

    def reversed(self) -> "Segment":
        return Segment(self.b, self.a)


@dataclass(frozen=True, eq=False)
class Arc:
    curve: object
    t0: float
    t1: float
    graded: tuple = (False, False)
    # longest parameter span integrated by a single Gauss panel
    max_step: float = np.pi / 8

    is_segment = False

    def point(self, t):
        return self.curve.point(t)

    def deriv(self, t):
        return self.curve.deriv(t)

    def length(self) -> float:
        t = np.linspace(self.t0, self.t1, 65)
        p = self.point(t)
        return float(np.sum(np.hypot(*np.diff(p, axis=0).T)))

    def sub(self, ta: float, tb: float) -> "Arc":
        g = (self.graded[0] and ta == self.t0, self.graded[1] and tb == self.t1)
        return Arc(self.curve, float(ta), float(tb), g, self.max_step)

    def mapped(self, A, b) -> "Arc":
        return Arc(MappedCurve(np.asarray(A, float), np.asarray(b, float), self.curve),
                   self.t0, self.t1, self.graded, self.max_step)

    def reversed(self) -> "Arc":
        return Arc(ReversedCurve(self.curve, self.t0 + self.t1), self.t0, self.t1,
                   (self.graded[1], self.graded[0]), self.max_step)


def map_pieces(pieces, A, b):
    """Image of a ccw chain under ``z -> A z + b``, re-oriented to stay ccw."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    out = [p.mapped(A, b) for p in pieces]
    if np.linalg.det(A) < 0:
        out = [p.reversed() for p in reversed(out)]
    return out


def _angle(v):
    return np.arctan2(v[..., 1], v[..., 0])


def _split_for_radial(piece, center):
    """Split arcs so every part subtends less than a quarter turn from ``center``."""
    if piece.is_segment:
        return [piece]
    t = np.linspace(piece.t0, piece.t1, 257)
    ang = np.unwrap(_angle(piece.point(t) - center))
    span = abs(ang[-1] - ang[0])
    k = max(1, int(np.ceil(span / (np.pi / 4))))
    edges = np.linspace(piece.t0, piece.t1, k + 1)
    return [piece.sub(edges[i], edges[i + 1]) for i in range(k)]


class RadialBoundary:
    """Star-shaped description of a closed ccw chain about an interior ``center``.

    Provides the radial function ``r(theta)``, exact membership and location
    of boundary points on the chain.
    """

    def __init__(self, pieces, center):
        self.center = np.asarray(center, dtype=float)
        parts = []
        for p in pieces:
            if p.is_segment and p.length() == 0.0:
                continue
            parts.extend(_split_for_radial(p, self.center))
        self.pieces = parts
        starts = np.array([_angle(p.point(np.array(p.t0)) - self.center) for p in parts])
        ends = np.array([_angle(p.point(np.array(p.t1)) - self.center) for p in parts])
        spans = np.mod(ends - starts, TWO_PI)
        self.start_angles = starts
        self.spans = spans
        self.origin = starts[0]
        self.cum = np.concatenate([[0.0], np.cumsum(spans)])
        self.total = self.cum[-1]
        self.scale = max(float(np.max(np.abs(np.array([p.point(np.array(p.t0)) for p in parts])
                                                  - self.center))), 1e-300)

    def _locate_angles(self, theta):
        rel = np.mod(np.asarray(theta, dtype=float) - self.origin, TWO_PI)
        idx = np.searchsorted(self.cum, rel, side="right") - 1
        idx = np.clip(idx, 0, len(self.pieces) - 1)
        return rel, idx

    def hit(self, theta):
        """Boundary hit of rays from the center: returns (points, piece index, parameter)."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        rel, idx = self._locate_angles(theta)
        pts = np.empty((theta.size, 2))
        tpar = np.empty(theta.size)
        e = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        for i in np.unique(idx):
            sel = idx == i
            piece = self.pieces[i]
            if piece.is_segment:
                a, d = piece.a - self.center, piece.b - piece.a
                ee = e[sel]
                denom = ee[:, 0] * d[1] - ee[:, 1] * d[0]
                s = (ee[:, 1] * a[0] - ee[:, 0] * a[1]) / denom
                s = np.clip(s, 0.0, 1.0)
                tpar[sel] = s
                pts[sel] = piece.point(s)
            else:
                target = rel[sel] - self.cum[i]
                lo = np.full(target.size, piece.t0)
                hi = np.full(target.size, piece.t1)
                a0 = self.start_angles[i]
                for _ in range(64):
                    mid = 0.5 * (lo + hi)
                    phi = np.mod(_angle(piece.point(mid) - self.center) - a0, TWO_PI)
                    # guard the wrap right at the piece start
                    phi = np.where(phi > np.pi * 1.5, phi - TWO_PI, phi)
                    below = phi < target
                    lo = np.where(below, mid, lo)
                    hi = np.where(below, hi, mid)
                t = 0.5 * (lo + hi)
                tpar[sel] = t
                pts[sel] = piece.point(t)
        return pts, idx, tpar

    def radius(self, theta):
        pts, _, _ = self.hit(theta)
        return np.hypot(*(pts - self.center).T)

    def contains(self, p, tol=0.0):
        p = np.asarray(p, dtype=float)
        single = p.ndim == 1
        P = np.atleast_2d(p)
        v = P - self.center
        r = np.hypot(v[:, 0], v[:, 1])
        out = np.ones(P.shape[0], dtype=bool)
        nz = r > 0
        if np.any(nz):
            rad = self.radius(_angle(v[nz]))
            out[nz] = r[nz] <= rad + tol + 4e-16 * self.scale
        return bool(out[0]) if single else out

    def locate(self, p):
        """Position of a boundary point as (piece index, parameter, angular position)."""
        v = np.asarray(p, dtype=float) - self.center
        theta = float(_angle(v))
        _, idx, tpar = self.hit(np.array([theta]))
        rel, _ = self._locate_angles(np.array([theta]))
        return int(idx[0]), float(tpar[0]), float(rel[0])


def sub_chain(radial: RadialBoundary, pa, pb):
    """Pieces of ``radial`` running counter-clockwise from boundary point ``pa`` to ``pb``."""
    ia, ta, posa = radial.locate(pa)
    ib, tb, posb = radial.locate(pb)
    pieces = radial.pieces
    n = len(pieces)
    out = []
    if ia == ib and posb >= posa:
        out.append(pieces[ia].sub(ta, tb))
    else:
        out.append(pieces[ia].sub(ta, pieces[ia].t1))
        j = (ia + 1) % n
        while j != ib:
            out.append(pieces[j])
            j = (j + 1) % n
        out.append(pieces[ib].sub(pieces[ib].t0, tb))
    return [p for p in out if _nondegenerate(p, radial.scale)]


def _nondegenerate(piece, scale):
    if piece.is_segment:
        return piece.length() > 1e-14 * scale
    return piece.t1 - piece.t0 > 1e-14 * max(1.0, abs(piece.t0))


def hull_boundary(parts, points, grid=4096):
    """Boundary chain of the convex hull of planar bodies and isolated points.

    ``parts`` must expose ``support``, ``support_point``, ``boundary`` and
    ``interior_point``.  The owner of each outer normal direction is found on
    a grid (refined where a part or point sticks out only within one grid
    cell); switches between owners are located by bisection and become
    bitangent segments, while runs owned by a body become sub-chains of its
    boundary.
    """
    points = np.zeros((0, 2)) if points is None else np.atleast_2d(np.asarray(points, dtype=float))
    if points.size == 0:
        points = np.zeros((0, 2))
    n_parts = len(parts)
    n_own = n_parts + points.shape[0]

    def supports(theta):
        theta = np.atleast_1d(theta)
        U = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        cols = [np.atleast_1d(p.support(U)) for p in parts]
        if points.shape[0]:
            cols.append(U @ points.T)
        return np.column_stack(cols).reshape(theta.size, n_own)

    def spoint(owner, theta):
        u = np.array([np.cos(theta), np.sin(theta)])
        if owner < n_parts:
            return np.asarray(parts[owner].support_point(u), dtype=float)
        return points[owner - n_parts]

    theta = np.linspace(0.0, TWO_PI, grid, endpoint=False)
    H = supports(theta)
    # directions where an owner wins by a sliver smaller than the grid spacing
    extra = []
    step = TWO_PI / grid
    from scipy.optimize import minimize_scalar

    for k in range(n_own):
        others = np.delete(H, k, axis=1)
        if others.shape[1] == 0:
            continue
        margin = H[:, k] - others.max(axis=1)
        if np.any(margin > 0):
            continue
        j = int(np.argmax(margin))

        def neg_margin(t, k=k):
            h = supports(np.array([t]))[0]
            return -(h[k] - np.max(np.delete(h, k)))

        res = minimize_scalar(neg_margin, bounds=(theta[j] - step, theta[j] + step),
                              method="bounded", options={"xatol": 1e-13})
        if -res.fun > 0:
            extra.append(float(np.mod(res.x, TWO_PI)))
    if extra:
        theta = np.sort(np.concatenate([theta, extra]))
        H = supports(theta)
    owner = np.argmax(H, axis=1)

    if np.all(owner == owner[0]):
        o = int(owner[0])
        if o >= n_parts:
            raise ValueError("hull of a single point is not a body")
        return list(parts[o].boundary())

    def switches(ta, A, tb, B, depth=0):
        # owner A at ta, owner B at tb (ta < tb)
        if tb - ta < 1e-15 or depth > 80:
            return [(0.5 * (ta + tb), A, B)]
        tm = 0.5 * (ta + tb)
        M = int(np.argmax(supports(np.array([tm]))[0]))
        if M == A:
            return switches(tm, A, tb, B, depth + 1)
        if M == B:
            return switches(ta, A, tm, B, depth + 1)
        return switches(ta, A, tm, M, depth + 1) + switches(tm, M, tb, B, depth + 1)

    events = []
    m = theta.size
    for i in range(m):
        j = (i + 1) % m
        if owner[i] != owner[j]:
            ta, tb = theta[i], theta[j] + (TWO_PI if j == 0 else 0.0)
            events.extend(switches(ta, int(owner[i]), tb, int(owner[j])))
    events.sort(key=lambda e: e[0])

    scale = float(np.max(np.abs(H)))
    radials = {}
    pieces = []
    ne = len(events)
    for k in range(ne):
        t_start, _, cur = events[k]
        t_end, cur2, nxt = events[(k + 1) % ne]
        if cur < n_parts:
            if cur not in radials:
                radials[cur] = RadialBoundary(parts[cur].boundary(), parts[cur].interior_point())
            pa = spoint(cur, t_start)
            pb = spoint(cur, t_end)
            pieces.extend(sub_chain(radials[cur], pa, pb))
        a = spoint(cur, t_end)
        b = spoint(nxt, t_end)
        if np.hypot(*(b - a)) > 1e-13 * scale:
            pieces.append(Segment(a, b))
    return pieces
