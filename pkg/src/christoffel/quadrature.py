"""Integration of polynomials over convex bodies.

Planar bodies are integrated with a fan rule: every boundary piece is joined
to an interior centre ``c`` and the resulting curved triangles are mapped from
``[0, 1] x [t0, t1]`` by ``(s, t) -> c + s (gamma(t) - c)``.  The Jacobian is
``s * cross(gamma(t) - c, gamma'(t))``, which is non-negative for convex
bodies, so every weight is positive.  Straight edges are integrated exactly,
smooth arcs spectrally.  Solids of revolution reduce to a planar rule on the
meridian half-plane, and anything else in 3D falls back to stratified Monte
Carlo.  Polygon moments are also available exactly in rational arithmetic.
"""

from __future__ import annotations

import csv
import weakref
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import ceil, comb, gamma, prod
from typing import Callable, Mapping

import numpy as np

from .basis import DEGREE_CAPS, BasisSpec, basis_eval, multi_indices
from .errors import DegreeTooLarge, MCVarianceTooHigh
from .geometry.affine import AffineMap
from .geometry.bodies import (
    AffineImage, Ball, ConvexBody, HalfBall3, LpBall, Polygon2D, Revolution, half_disc_meridian,
)
from .geometry.curves import RadialBoundary, sub_chain

MC_SEED = 0x5EED
MC_SAMPLES = 2_000_000
MC_REL_LIMIT = 1e-2
GRADING_RATIO = 0.15
GRADING_LEVELS = 24
# every panel of an arc with a singular end gets at least this many nodes
GRADED_NODES = 22
GRAM_BLOCK = 4096


@dataclass(frozen=True)
class MultiIndex:
    exponents: tuple

    def __post_init__(self):
        e = tuple(int(a) for a in self.exponents)
        if any(a < 0 for a in e):
            raise ValueError("exponents must be non-negative")
        object.__setattr__(self, "exponents", e)

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    def __lt__(self, other):
        # graded, then lexicographically descending (x^2 < xy < y^2 in degree 2)
        return (self.degree, tuple(-a for a in self.exponents)) < (
            other.degree, tuple(-a for a in other.exponents))


@dataclass(frozen=True)
class IntegralResult:
    value: float
    abs_error_bound: float
    method: str


@dataclass(frozen=True, eq=False)
class Rule:
    """Positive-weight cubature rule; Monte Carlo rules also carry their strata."""

    nodes: np.ndarray
    weights: np.ndarray
    method: str
    strata: np.ndarray | None = None
    stratum_volume: float = 0.0
    per_stratum: int = 0
    n_strata: int = 0

    def integrate(self, values) -> IntegralResult:
        values = np.asarray(values, dtype=float)
        value = float(values @ self.weights)
        if self.method != "monte_carlo":
            return IntegralResult(value, 0.0, self.method)
        return IntegralResult(value, self.mc_bound(values), self.method)

    def mc_bound(self, values) -> float:
        """Three standard deviations of the stratified estimator."""
        n = self.per_stratum
        s1 = np.bincount(self.strata, weights=values, minlength=self.n_strata)
        s2 = np.bincount(self.strata, weights=values * values, minlength=self.n_strata)
        mean = s1 / n
        var = np.maximum(s2 / n - mean * mean, 0.0) * n / (n - 1)
        return 3.0 * self.stratum_volume * float(np.sqrt(np.sum(var) / n))


# ---------------------------------------------------------------- exact moments


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def polygon_moment(poly: Polygon2D, alpha) -> Fraction:
    """Exact ``int_P x^a y^b`` via the boundary integral of ``x^(a+1) y^b / (a+1) dy``."""
    a, b = MultiIndex(alpha).exponents if not isinstance(alpha, MultiIndex) else alpha.exponents
    if a + b > 2 * DEGREE_CAPS[2]:
        raise DegreeTooLarge(f"moment degree {a + b} exceeds {2 * DEGREE_CAPS[2]}")
    V = [(_frac(x), _frac(y)) for x, y in np.asarray(poly.vertices, dtype=float).tolist()]
    ca = [comb(a + 1, i) for i in range(a + 2)]
    cb = [comb(b, j) for j in range(b + 1)]
    total = Fraction(0)
    for k in range(len(V)):
        x0, y0 = V[k]
        x1, y1 = V[(k + 1) % len(V)]
        dx, dy = x1 - x0, y1 - y0
        if dy == 0:
            continue
        xp = [x0 ** (a + 1 - i) * dx ** i * ca[i] for i in range(a + 2)]
        yp = [y0 ** (b - j) * dy ** j * cb[j] for j in range(b + 1)]
        edge = sum(xp[i] * yp[j] / (i + j + 1) for i in range(a + 2) for j in range(b + 1))
        total += edge * dy
    return total / (a + 1)


def ball_moment(dim: int, alpha) -> float:
    """``int_{B^d} x^alpha`` over the unit ball."""
    alpha = tuple(alpha)
    if dim not in (1, 2, 3) or len(alpha) != dim:
        raise ValueError("dimension mismatch")
    if any(a % 2 for a in alpha):
        return 0.0
    return prod(gamma((a + 1) / 2) for a in alpha) / gamma((sum(alpha) + dim) / 2 + 1)


def lpball_moment(dim: int, alpha_exp: float, beta) -> float:
    """``int x^beta`` over ``{sum |x_i|^alpha <= 1}``."""
    beta = tuple(beta)
    if any(b % 2 for b in beta):
        return 0.0
    a = float(alpha_exp)
    return (2.0 / a) ** dim * prod(gamma((b + 1) / a) for b in beta) / gamma((sum(beta) + dim) / a + 1)


# ---------------------------------------------------------------- rules


@lru_cache(maxsize=None)
def gauss(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    return x, w


def gauss_on(a: float, b: float, m: int):
    x, w = gauss(m)
    h = 0.5 * (b - a)
    return a + h * (x + 1.0), h * w


def arc_panels(piece):
    """Parameter panels ``(a, b, graded)`` for an arc.

    Spans are at most ``max_step``; panels touching a singular end are
    refined geometrically towards it.
    """
    span = piece.t1 - piece.t0
    k = max(1, ceil(span / piece.max_step - 1e-12))
    edges = np.linspace(piece.t0, piece.t1, k + 1)
    panels = [(edges[i], edges[i + 1], False) for i in range(k)]
    if piece.graded[0] and piece.graded[1] and k == 1:
        mid = 0.5 * (piece.t0 + piece.t1)
        panels = [(piece.t0, mid, False), (mid, piece.t1, False)]
    levels = getattr(piece.curve, "grading_levels", None) or GRADING_LEVELS
    if piece.graded[0]:
        a, b, _ = panels.pop(0)
        panels = _graded(a, b, True, levels) + panels
    if piece.graded[1]:
        a, b, _ = panels.pop()
        panels = panels + _graded(a, b, False, levels)
    return panels


def _graded(a, b, toward_start, levels):
    h = b - a
    r = GRADING_RATIO ** np.arange(levels + 1)
    if toward_start:
        cuts = np.concatenate([[a], a + h * r[::-1]])
    else:
        cuts = np.concatenate([b - h * r, [b]])
    return [(cuts[i], cuts[i + 1], True) for i in range(cuts.size - 1)]


def fan_rule(pieces, center, degree: int) -> Rule:
    """Positive rule exact (segments) or spectral (arcs) for polynomials of ``degree``."""
    c = np.asarray(center, dtype=float)
    s, ws = gauss_on(0.0, 1.0, ceil((degree + 2) / 2))
    m_seg = ceil((degree + 1) / 2)
    m_arc = ceil((degree + 16) / 2)
    nodes, weights = [], []
    for piece in pieces:
        panels = [(0.0, 1.0, False)] if piece.is_segment else arc_panels(piece)
        for a, b, _ in panels:
            m = m_seg if piece.is_segment else (max(m_arc, GRADED_NODES) if any(piece.graded) else m_arc)
            t, wt = gauss_on(a, b, m)
            g = piece.point(t) - c
            dg = piece.deriv(t)
            cr = g[:, 0] * dg[:, 1] - g[:, 1] * dg[:, 0]
            keep = cr > 0
            if not keep.any():
                continue
            g, w = g[keep], (wt * cr)[keep]
            nodes.append(c + s[None, :, None] * g[:, None, :])
            weights.append(w[:, None] * (ws * s)[None, :])
    X = np.concatenate([n.reshape(-1, 2) for n in nodes])
    W = np.concatenate([w.ravel() for w in weights])
    return Rule(X, W, "arc_quadrature")


def interval_rule(lo: float, hi: float, degree: int) -> Rule:
    x, w = gauss_on(lo, hi, ceil((degree + 1) / 2))
    return Rule(x[:, None], w, "gauss_legendre")


def half_meridian(meridian: ConvexBody):
    """Boundary of ``meridian ∩ {rho >= 0}`` (ccw) and a fan centre on the axis."""
    z0 = float(meridian.interior_point()[0])
    center = np.array([z0, 0.0])
    radial = RadialBoundary(meridian.boundary(), center)
    pts, _, _ = radial.hit(np.array([0.0, np.pi]))
    chain = sub_chain(radial, pts[0], pts[1])
    return chain, center


def revolution_rule(meridian: ConvexBody, axis: int, degree: int) -> Rule:
    """Rule on the solid swept by a symmetric meridian about coordinate ``axis``."""
    chain, center = half_meridian(meridian)
    planar = fan_rule(chain, center, degree + 1)
    M = degree + 2
    phi = 2 * np.pi * np.arange(M) / M
    z = np.repeat(planar.nodes[:, 0], M)
    rho = np.repeat(planar.nodes[:, 1], M)
    ph = np.tile(phi, planar.nodes.shape[0])
    perp = [i for i in range(3) if i != axis]
    X = np.empty((z.size, 3))
    X[:, axis] = z
    X[:, perp[0]] = rho * np.cos(ph)
    X[:, perp[1]] = rho * np.sin(ph)
    W = np.repeat(planar.weights * planar.nodes[:, 1], M) * (2 * np.pi / M)
    keep = W > 0
    return Rule(X[keep], W[keep], "revolution")


_SEED = [MC_SEED]


def set_default_seed(seed: int) -> None:
    """Seed used by Monte Carlo rules when none is passed explicitly."""
    _SEED[0] = int(seed)


def _seed(seed):
    return _SEED[0] if seed is None else int(seed)


def mc_rule(body: ConvexBody, samples: int = MC_SAMPLES, seed: int | None = None) -> Rule:
    """Stratified Monte Carlo over the bounding box (equal samples per stratum)."""
    seed = _seed(seed)
    d = body.dim
    g = {1: 4096, 2: 64, 3: 16}[d]
    n_strata = g ** d
    per = max(2, ceil(samples / n_strata))
    lo, hi = body.bounding_box()
    cell = (hi - lo) / g
    rng = np.random.default_rng(seed)
    grid = np.stack(np.meshgrid(*[np.arange(g)] * d, indexing="ij"), axis=-1).reshape(-1, d)
    strata = np.repeat(np.arange(n_strata), per)
    X = lo + (grid[strata] + rng.random((strata.size, d))) * cell
    inside = np.asarray(body.contains(X))
    vol = float(np.prod(cell))
    return Rule(X[inside], np.full(int(inside.sum()), vol / per), "monte_carlo",
                strata[inside], vol, per, n_strata)


_RULES: "weakref.WeakKeyDictionary[ConvexBody, dict]" = weakref.WeakKeyDictionary()


def body_rule(body: ConvexBody, degree: int, method: str = "auto",
              samples: int = MC_SAMPLES, seed: int | None = None) -> Rule:
    """Cubature rule integrating polynomials of total degree ``degree`` over ``body``."""
    seed = _seed(seed)
    cache = _RULES.setdefault(body, {})
    key = (degree, method, samples if method == "monte_carlo" else None, seed)
    if key not in cache:
        cache[key] = _build_rule(body, degree, method, samples, seed)
    return cache[key]


def _build_rule(body, degree, method, samples, seed):
    if method == "monte_carlo":
        return mc_rule(body, samples, seed)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    if body.dim == 1:
        lo, hi = body.bounding_box()
        return interval_rule(float(lo[0]), float(hi[0]), degree)
    if body.dim == 2:
        return fan_rule(body.boundary(), body.interior_point(), degree)
    if isinstance(body, AffineImage):
        base = body_rule(body.base, degree)
        return Rule(body.map(base.nodes), abs(body.map.det) * base.weights, base.method)
    if isinstance(body, Ball) or (isinstance(body, LpBall) and body.alpha == 2):
        c = body.center if isinstance(body, Ball) else np.zeros(3)
        r = body.radius if isinstance(body, Ball) else body.scale
        base = revolution_rule(Ball(np.zeros(2), r), 0, degree)
        return Rule(base.nodes + c, base.weights, base.method)
    if isinstance(body, HalfBall3):
        return revolution_rule(half_disc_meridian(), 2, degree)
    if isinstance(body, Revolution):
        return revolution_rule(body.meridian, body.axis, degree)
    return mc_rule(body, samples, seed)


# ---------------------------------------------------------------- integrals

Polynomial = Mapping[tuple, float]


def poly_eval(f: Polynomial, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    out = np.zeros(X.shape[0])
    for alpha, c in f.items():
        out += float(c) * np.prod(X ** np.asarray(alpha), axis=1)
    return out


def poly_degree(f: Polynomial) -> int:
    return max((sum(a) for a in f), default=0)


def body_integral(body: ConvexBody, f, degree_hint: int | None = None, *, method: str = "auto",
                  samples: int = MC_SAMPLES, seed: int | None = None) -> IntegralResult:
    """``int_D f``.

    ``f`` is either a mapping from exponent tuples to coefficients (exact on
    polygons) or a vectorized callable on ``(k, d)`` point arrays, in which
    case ``degree_hint`` is its total degree.
    """
    if isinstance(f, Mapping):
        deg = poly_degree(f)
        if isinstance(body, Polygon2D) and method == "auto":
            total = sum((_frac(c) * polygon_moment(body, a) for a, c in f.items()), Fraction(0))
            return IntegralResult(float(total), 0.0, "exact_rational")
        func = lambda X: poly_eval(f, X)
    else:
        if degree_hint is None:
            raise ValueError("degree_hint is required for callable integrands")
        deg, func = int(degree_hint), f
    if deg > 2 * DEGREE_CAPS[body.dim]:
        raise DegreeTooLarge(f"integrand degree {deg} exceeds {2 * DEGREE_CAPS[body.dim]}")
    rule = body_rule(body, deg, method, samples, seed)
    res = rule.integrate(func(rule.nodes))
    if res.method == "monte_carlo" and method == "auto":
        scale = rule.integrate(np.abs(func(rule.nodes))).value
        if res.abs_error_bound > MC_REL_LIMIT * max(scale, 1e-300):
            raise MCVarianceTooHigh(f"3-sigma bound {res.abs_error_bound:.3g} vs magnitude {scale:.3g}")
    return res


def gram_matrix(body: ConvexBody, n: int, spec: BasisSpec | None = None, dtype=float,
                rule: Rule | None = None) -> np.ndarray:
    """``G[i, j] = int_D b_i b_j`` for the tensor Legendre basis of ``spec``."""
    spec = BasisSpec.for_body(body, n) if spec is None else spec
    rule = body_rule(body, 2 * spec.degree) if rule is None else rule
    if rule.method == "monte_carlo":
        vol = rule.integrate(np.ones(rule.weights.size))
        if vol.abs_error_bound > MC_REL_LIMIT * vol.value:
            raise MCVarianceTooHigh("Monte Carlo volume estimate too noisy for a Gram matrix")
    N = spec.size
    G = np.zeros((N, N), dtype=dtype)
    X, W = rule.nodes, np.asarray(rule.weights, dtype=dtype)
    for start in range(0, X.shape[0], GRAM_BLOCK):
        B = basis_eval(spec, X[start:start + GRAM_BLOCK], dtype)
        G += B.T @ (W[start:start + GRAM_BLOCK, None] * B)
    return 0.5 * (G + G.T)


def dump_moments(body: ConvexBody, degree: int, path) -> None:
    """Write every monomial moment of total degree <= ``degree`` to a CSV file."""
    idx = multi_indices(body.dim, degree)
    rule = None if isinstance(body, Polygon2D) else body_rule(body, degree)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["exponents", "degree", "value", "method"])
        for a in idx:
            if rule is None:
                val, meth = float(polygon_moment(body, a)), "exact_rational"
            else:
                val, meth = float(rule.integrate(np.prod(rule.nodes ** np.asarray(a), axis=1)).value), rule.method
            w.writerow([" ".join(map(str, a)), sum(a), repr(val), meth])
