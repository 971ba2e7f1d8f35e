"""Convex bodies in R^1, R^2 and R^3.

Every body answers membership (vectorized over point arrays), support
function and support point queries, and exposes an interior witness and a
bounding box.  Planar bodies additionally expose their boundary as a ccw chain
of :mod:`~christoffel.geometry.curves` pieces, which is what the quadrature
and the exact hull machinery run on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import linprog, minimize_scalar

from .affine import AffineMap
from .curves import (
    Arc, EllipseCurve, LpCurve, MappedCurve, RadialBoundary, ReversedCurve, Segment, hull_boundary,
    map_pieces,
)


def fibonacci_sphere(k: int) -> np.ndarray:
    i = np.arange(k) + 0.5
    z = 1.0 - 2.0 * i / k
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = np.pi * (1.0 + 5 ** 0.5) * i
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def unit_directions(dim: int, k: int) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        t = np.linspace(0.0, 2 * np.pi, k, endpoint=False)
        return np.column_stack([np.cos(t), np.sin(t)])
    if dim == 3:
        return fibonacci_sphere(k)
    raise ValueError("dimensions above 3 are not supported")


def lp_octant_arcs(alpha: float, scale: float = 1.0):
    """The l_alpha circle as eight ccw arcs whose singular ends all sit at parameter 0.

    Floating point resolves parameters near 0 far better than near pi/2, which
    is what lets the quadrature grade towards the singular points.
    """
    base = LpCurve(alpha, scale)
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    mirrored = MappedCurve(swap, np.zeros(2), ReversedCurve(base, 0.0))
    q = np.pi / 4
    arcs = []
    for k in range(4):
        R = np.round(np.array([[np.cos(k * 2 * q), -np.sin(k * 2 * q)],
                               [np.sin(k * 2 * q), np.cos(k * 2 * q)]]))
        first = Arc(base, 0.0, q, (True, False))
        second = Arc(mirrored, -q, 0.0, (False, True))
        if k == 0:
            arcs += [first, second]
        else:
            arcs += [first.mapped(R, np.zeros(2)), second.mapped(R, np.zeros(2))]
    return arcs


def _as_points(p, dim):
    p = np.asarray(p, dtype=float)
    single = p.ndim == 1
    P = np.atleast_2d(p)
    if P.shape[-1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got shape {p.shape}")
    return P, single


def _ret(values, single):
    return values[0] if single else values


class ConvexBody:
    """Common interface; concrete variants are frozen dataclasses."""

    dim: int

    def contains(self, p, tol: float = 0.0):
        raise NotImplementedError

    def support(self, u):
        raise NotImplementedError

    def support_point(self, u):
        raise NotImplementedError

    def interior_point(self) -> np.ndarray:
        raise NotImplementedError

    def boundary(self):
        raise NotImplementedError(f"{type(self).__name__} has no planar boundary chain")

    def to_dict(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def bounding_box(self):
        E = np.eye(self.dim)
        hi = np.atleast_1d(self.support(E))
        lo = -np.atleast_1d(self.support(-E))
        return lo, hi

    def circumradius(self, center=None, k: int = 4096) -> float:
        """``max |y - center|`` over the body (support-function estimate, padded)."""
        c = self.interior_point() if center is None else np.asarray(center, dtype=float)
        U = unit_directions(self.dim, k)
        return float(np.max(self.support(U) - U @ c)) * (1.0 + 1e-6)

    def volume(self) -> float:
        from ..quadrature import body_integral

        return body_integral(self, lambda X: np.ones(len(X)), 0).value


@dataclass(frozen=True, eq=False)
class Polygon2D(ConvexBody):
    vertices: np.ndarray

    def __post_init__(self):
        V = np.array(self.vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] != 2 or V.shape[0] < 3:
            raise ValueError("polygon needs at least 3 planar vertices")
        E = np.roll(V, -1, axis=0) - V
        if np.any(np.hypot(E[:, 0], E[:, 1]) == 0):
            raise ValueError("repeated polygon vertex")
        turn = E[:, 0] * np.roll(E, -1, axis=0)[:, 1] - E[:, 1] * np.roll(E, -1, axis=0)[:, 0]
        if np.all(turn < 0):
            raise ValueError("polygon vertices must be counter-clockwise")
        if not np.all(turn > 0):
            raise ValueError("polygon vertices must be in strictly convex position")
        V.setflags(write=False)
        object.__setattr__(self, "vertices", V)

    dim = 2

    def contains(self, p, tol=0.0):
        P, single = _as_points(p, 2)
        V = self.vertices
        E = np.roll(V, -1, axis=0) - V
        rel = P[:, None, :] - V[None, :, :]
        cross = E[None, :, 0] * rel[:, :, 1] - E[None, :, 1] * rel[:, :, 0]
        return _ret(np.all(cross >= -tol, axis=1), single)

    def support(self, u):
        u = np.asarray(u, dtype=float)
        return np.max(u @ self.vertices.T, axis=-1)

    def support_point(self, u):
        u = np.asarray(u, dtype=float)
        return self.vertices[np.argmax(u @ self.vertices.T, axis=-1)]

    def interior_point(self):
        return self.vertices.mean(axis=0)

    def boundary(self):
        V = self.vertices
        return [Segment(V[i], V[(i + 1) % len(V)]) for i in range(len(V))]

    def area(self) -> float:
        x, y = self.vertices.T
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def to_dict(self):
        return {"type": "polygon", "vertices": self.vertices.tolist()}


@dataclass(frozen=True, eq=False)
class Ball(ConvexBody):
    center: np.ndarray
    radius: float = 1.0

    def __post_init__(self):
        c = np.atleast_1d(np.array(self.center, dtype=float))
        if c.size not in (1, 2, 3):
            raise ValueError("ball dimension must be 1, 2 or 3")
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @classmethod
    def unit(cls, dim: int, radius: float = 1.0) -> "Ball":
        return cls(np.zeros(dim), radius)

    @property
    def dim(self):
        return self.center.size

    def contains(self, p, tol=0.0):
        P, single = _as_points(p, self.dim)
        d2 = np.sum((P - self.center) ** 2, axis=1)
        return _ret(d2 <= (self.radius + tol) ** 2, single)

    def support(self, u):
        u = np.asarray(u, dtype=float)
        return u @ self.center + self.radius * np.linalg.norm(u, axis=-1)

    def support_point(self, u):
        u = np.asarray(u, dtype=float)
        return self.center + self.radius * u / np.linalg.norm(u, axis=-1, keepdims=True)

    def interior_point(self):
        return self.center.copy()

    def boundary(self):
        if self.dim != 2:
            return super().boundary()
        return [Arc(EllipseCurve(self.center, self.radius * np.eye(2)), 0.0, 2 * np.pi)]

    def to_dict(self):
        return {"type": "ball", "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class LpBall(ConvexBody):
    """``{x : |x_1|^a + ... + |x_d|^a <= scale^a}``."""

    alpha: float
    dim: int = 2
    scale: float = 1.0

    def __post_init__(self):
        if not self.alpha >= 1:
            raise ValueError("LpBall exponent must be >= 1")
        if self.dim not in (1, 2, 3):
            raise ValueError("LpBall dimension must be 1, 2 or 3")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "scale", float(self.scale))

    @property
    def dual_exponent(self) -> float:
        return np.inf if self.alpha == 1 else self.alpha / (self.alpha - 1.0)

    def contains(self, p, tol=0.0):
        P, single = _as_points(p, self.dim)
        s = np.sum(np.abs(P / self.scale) ** self.alpha, axis=1)
        return _ret(s <= 1.0 + tol, single)

    def support(self, u):
        u = np.asarray(u, dtype=float)
        return self.scale * np.linalg.norm(u, ord=self.dual_exponent, axis=-1)

    def support_point(self, u):
        u = np.asarray(u, dtype=float)
        if self.alpha == 1:
            i = np.argmax(np.abs(u), axis=-1)
            return self.scale * np.sign(u) * (np.arange(self.dim) == np.expand_dims(i, -1))
        q = self.dual_exponent
        nrm = np.linalg.norm(u, ord=q, axis=-1, keepdims=True)
        return self.scale * np.sign(u) * (np.abs(u) / nrm) ** (q - 1.0)

    def interior_point(self):
        return np.zeros(self.dim)

    def boundary(self):
        if self.dim != 2:
            return super().boundary()
        s = self.scale
        if self.alpha == 1:
            V = s * np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
            return [Segment(V[i], V[(i + 1) % 4]) for i in range(4)]
        if self.alpha == 2:
            return [Arc(EllipseCurve(np.zeros(2), s * np.eye(2)), 0.0, 2 * np.pi)]
        return lp_octant_arcs(self.alpha, s)

    def to_dict(self):
        return {"type": "lpball", "alpha": self.alpha, "dim": self.dim, "scale": self.scale}


@dataclass(frozen=True, eq=False)
class BoundaryRegion(ConvexBody):
    """Planar convex region given directly by a ccw boundary chain."""

    pieces: tuple
    interior: np.ndarray

    dim = 2

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        object.__setattr__(self, "interior", np.asarray(self.interior, dtype=float))

    @cached_property
    def radial(self) -> RadialBoundary:
        return RadialBoundary(self.pieces, self.interior)

    def boundary(self):
        return list(self.pieces)

    def contains(self, p, tol=0.0):
        P, single = _as_points(p, 2)
        return _ret(self.radial.contains(P, tol), single)

    def _support_one(self, u):
        best = -np.inf
        for piece in self.pieces:
            if piece.is_segment:
                best = max(best, float(piece.a @ u), float(piece.b @ u))
                continue
            t = np.linspace(piece.t0, piece.t1, 129)
            vals = piece.point(t) @ u
            j = int(np.argmax(vals))
            lo, hi = t[max(j - 1, 0)], t[min(j + 1, t.size - 1)]
            res = minimize_scalar(lambda s: -float(piece.point(np.array(s)) @ u),
                                  bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
            best = max(best, float(vals[j]), -res.fun)
        return best

    def support(self, u):
        u = np.asarray(u, dtype=float)
        if u.ndim == 1:
            return self._support_one(u)
        return np.array([self._support_one(v) for v in u])

    def support_point(self, u):
        u = np.asarray(u, dtype=float)
        if u.ndim > 1:
            return np.array([self.support_point(v) for v in u])
        best, arg = -np.inf, None
        for piece in self.pieces:
            t = np.linspace(piece.t0, piece.t1, 257)
            pts = piece.point(t)
            j = int(np.argmax(pts @ u))
            if pts[j] @ u > best:
                best, arg = float(pts[j] @ u), pts[j]
        return arg

    def interior_point(self):
        return self.interior.copy()

    def to_dict(self):
        raise NotImplementedError("boundary regions are internal and not serializable")


def half_disc_meridian() -> BoundaryRegion:
    """``{(z, rho) : z >= 0, z^2 + rho^2 <= 1}``, the meridian section of the unit half-ball."""
    arc = Arc(EllipseCurve(np.zeros(2), np.eye(2)), -np.pi / 2, np.pi / 2)
    seg = Segment(np.array([0.0, 1.0]), np.array([0.0, -1.0]))
    return BoundaryRegion((arc, seg), np.array([0.4, 0.0]))


@dataclass(frozen=True, eq=False)
class HalfBall3(ConvexBody):
    """``{x in B^3 : x_3 >= 0}``."""

    dim = 3
    axis = 2

    def contains(self, p, tol=0.0):
        P, single = _as_points(p, 3)
        ok = (np.sum(P * P, axis=1) <= (1.0 + tol) ** 2) & (P[:, 2] >= -tol)
        return _ret(ok, single)

    def support(self, u):
        u = np.asarray(u, dtype=float)
        full = np.linalg.norm(u, axis=-1)
        flat = np.hypot(u[..., 0], u[..., 1])
        return np.where(u[..., 2] >= 0, full, flat)

    def support_point(self, u):
        u = np.asarray(u, dtype=float)
        if u.ndim > 1:
            return np.array([self.support_point(v) for v in u])
        if u[2] >= 0:
            return u / np.linalg.norm(u)
        r = np.hypot(u[0], u[1])
        if r == 0:
            return np.zeros(3)
        return np.array([u[0] / r, u[1] / r, 0.0])

    def interior_point(self):
        return np.array([0.0, 0.0, 0.4])

    @cached_property
    def meridian(self) -> BoundaryRegion:
        return half_disc_meridian()

    def to_dict(self):
        return {"type": "halfball3"}


@dataclass(frozen=True, eq=False)
class Revolution(ConvexBody):
    """Solid of revolution in R^3 about coordinate ``axis``.

    ``meridian`` is a planar convex body in (axis coordinate, radius)
    coordinates, symmetric under ``radius -> -radius``.
    """

    meridian: ConvexBody
    axis: int = 0

    dim = 3

    def __post_init__(self):
        if self.meridian.dim != 2:
            raise ValueError("meridian must be planar")
        if self.axis not in (0, 1, 2):
            raise ValueError("axis must be 0, 1 or 2")
        U = unit_directions(2, 16)
        h1 = self.meridian.support(U)
        h2 = self.meridian.support(U * np.array([1.0, -1.0]))
        if not np.allclose(h1, h2, rtol=1e-9, atol=1e-12):
            raise ValueError("meridian must be symmetric about its first axis")

    @property
    def perp_axes(self):
        return [i for i in range(3) if i != self.axis]

    def to_meridian(self, P):
        P = np.atleast_2d(P)
        z = P[:, self.axis]
        rho = np.hypot(P[:, self.perp_axes[0]], P[:, self.perp_axes[1]])
        return np.column_stack([z, rho])

    def contains(self, p, tol=0.0):
        P, single = _as_points(p, 3)
        return _ret(np.atleast_1d(self.meridian.contains(self.to_meridian(P), tol)), single)

    def support(self, u):
        u = np.asarray(u, dtype=float)
        ua = u[..., self.axis]
        up = np.hypot(u[..., self.perp_axes[0]], u[..., self.perp_axes[1]])
        return self.meridian.support(np.stack([ua, up], axis=-1))

    def support_point(self, u):
        u = np.asarray(u, dtype=float)
        if u.ndim > 1:
            return np.array([self.support_point(v) for v in u])
        a, (b, c) = self.axis, self.perp_axes
        up = np.hypot(u[b], u[c])
        z, rho = self.meridian.support_point(np.array([u[a], up]))
        out = np.zeros(3)
        out[a] = z
        if up > 0:
            out[b], out[c] = rho * u[b] / up, rho * u[c] / up
        else:
            out[b] = rho
        return out

    def interior_point(self):
        z0, _ = self.meridian.interior_point()
        out = np.zeros(3)
        out[self.axis] = z0
        return out

    def to_dict(self):
        return {"type": "revolution", "axis": self.axis, "meridian": self.meridian.to_dict()}


@dataclass(frozen=True, eq=False)
class AffineImage(ConvexBody):
    map: AffineMap
    base: ConvexBody

    def __post_init__(self):
        if self.map.dim != self.base.dim:
            raise ValueError("map and base dimensions differ")
        if self.map.det == 0:
            raise ValueError("affine map is degenerate")

    @property
    def dim(self):
        return self.base.dim

    @cached_property
    def _inverse(self) -> AffineMap:
        return self.map.inverse()

    def contains(self, p, tol=0.0):
        P, single = _as_points(p, self.dim)
        return _ret(np.atleast_1d(self.base.contains(self._inverse(P), tol)), single)

    def support(self, u):
        u = np.asarray(u, dtype=float)
        return self.base.support(u @ self.map.matrix) + u @ self.map.offset

    def support_point(self, u):
        u = np.asarray(u, dtype=float)
        return self.map(self.base.support_point(u @ self.map.matrix))

    def interior_point(self):
        return self.map(self.base.interior_point())

    def boundary(self):
        return map_pieces(self.base.boundary(), self.map.matrix, self.map.offset)

    def to_dict(self):
        d = {"type": "affine", "base": self.base.to_dict()}
        d.update(self.map.to_dict())
        return d


@dataclass(frozen=True, eq=False)
class Hull(ConvexBody):
    """Closed convex hull of bodies and isolated points."""

    parts: tuple
    points: np.ndarray = field(default=None)

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("a hull needs at least one body")
        dims = {p.dim for p in parts}
        if len(dims) != 1:
            raise ValueError("hull parts have different dimensions")
        dim = dims.pop()
        pts = np.zeros((0, dim)) if self.points is None else np.atleast_2d(np.array(self.points, dtype=float))
        if pts.size == 0:
            pts = np.zeros((0, dim))
        if pts.shape[1] != dim:
            raise ValueError("hull points have the wrong dimension")
        pts.setflags(write=False)
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "points", pts)

    @property
    def dim(self):
        return self.parts[0].dim

    def support(self, u):
        u = np.asarray(u, dtype=float)
        vals = [np.asarray(p.support(u)) for p in self.parts]
        if self.points.shape[0]:
            vals.append(np.max(u @ self.points.T, axis=-1))
        return np.max(np.stack(vals, axis=-1), axis=-1)

    def support_point(self, u):
        u = np.asarray(u, dtype=float)
        if u.ndim > 1:
            return np.array([self.support_point(v) for v in u])
        cands = [np.asarray(p.support_point(u)) for p in self.parts] + list(self.points)
        vals = [float(c @ u) for c in cands]
        return cands[int(np.argmax(vals))]

    def interior_point(self):
        return np.mean([p.interior_point() for p in self.parts], axis=0)

    @cached_property
    def _boundary(self):
        return hull_boundary(self.parts, self.points)

    def boundary(self):
        if self.dim != 2:
            return super().boundary()
        return list(self._boundary)

    @cached_property
    def radial(self) -> RadialBoundary:
        return RadialBoundary(self._boundary, self.interior_point())

    @cached_property
    def generators(self) -> np.ndarray:
        """Boundary samples of every part (1024 each) plus the isolated points."""
        U = unit_directions(self.dim, 1024)
        gens = [np.atleast_2d(p.support_point(U)) for p in self.parts]
        gens.append(self.points)
        return np.vstack(gens)

    def contains_lp(self, p, tol=1e-12):
        """Membership by LP feasibility of a convex combination of generators."""
        P, single = _as_points(p, self.dim)
        G = self.generators
        m = G.shape[0]
        A_eq = np.vstack([G.T, np.ones((1, m))])
        out = np.empty(P.shape[0], dtype=bool)
        for i, q in enumerate(P):
            # minimize the total violation |G lam - q|_1 via slack variables
            A = np.hstack([A_eq, np.vstack([np.eye(self.dim), np.zeros((1, self.dim))]),
                           -np.vstack([np.eye(self.dim), np.zeros((1, self.dim))])])
            c = np.concatenate([np.zeros(m), np.ones(2 * self.dim)])
            res = linprog(c, A_eq=A, b_eq=np.concatenate([q, [1.0]]), bounds=(0, None), method="highs")
            out[i] = res.status == 0 and res.fun <= tol * max(1.0, float(np.abs(q).max()))
        return _ret(out, single)

    def contains(self, p, tol=1e-12):
        if self.dim == 2:
            P, single = _as_points(p, 2)
            return _ret(self.radial.contains(P, tol), single)
        return self.contains_lp(p, tol)

    def to_dict(self):
        return {"type": "hull", "parts": [p.to_dict() for p in self.parts],
                "points": self.points.tolist()}


def body_from_dict(data: dict) -> ConvexBody:
    kind = data.get("type")
    if kind == "polygon":
        return Polygon2D(np.asarray(data["vertices"], dtype=float))
    if kind == "ball":
        return Ball(np.asarray(data.get("center", [0.0, 0.0]), dtype=float), float(data.get("radius", 1.0)))
    if kind == "lpball":
        return LpBall(float(data["alpha"]), int(data.get("dim", 2)), float(data.get("scale", 1.0)))
    if kind == "halfball3":
        return HalfBall3()
    if kind == "revolution":
        return Revolution(body_from_dict(data["meridian"]), int(data.get("axis", 0)))
    if kind == "affine":
        return AffineImage(AffineMap.from_dict(data), body_from_dict(data["base"]))
    if kind == "hull":
        return Hull(tuple(body_from_dict(p) for p in data["parts"]), data.get("points") or None)
    raise ValueError(f"unknown body type {kind!r}")


def body_from_json(text: str) -> ConvexBody:
    return body_from_dict(json.loads(text))


def contains(body: ConvexBody, p, tol: float = 0.0):
    return body.contains(p, tol)


def support(body: ConvexBody, u):
    return body.support(u)
