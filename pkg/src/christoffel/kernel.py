"""Christoffel function and reproducing kernel from a factored Gram matrix."""

from __future__ import annotations

import threading
import warnings
import weakref
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .basis import BasisSpec, basis_eval, check_degree, legendre_table
from .errors import ConditionTooHigh, NotPositiveDefinite
from .geometry.affine import AffineMap
from .geometry.bodies import AffineImage, ConvexBody, unit_directions
from . import quadrature
from .quadrature import body_rule, gram_matrix

CONDITION_LIMIT = 1e12
# above this the Cholesky path loses too many digits and the orthogonalization path takes over
CHOLESKY_LIMIT = 1e8


@dataclass(frozen=True, eq=False)
class GramFactor:
    """Cholesky factor of the Jacobi-scaled Gram matrix ``D G D``, ``D = diag(G)^(-1/2)``."""

    spec: BasisSpec
    lower: np.ndarray
    scale: np.ndarray
    condition: float
    method: str
    precision: str = "double"
    scaled_gram: np.ndarray | None = field(default=None, repr=False)

    def gram(self) -> np.ndarray:
        """Reassemble ``G`` from the factor."""
        G = self.lower @ self.lower.T
        return G / np.outer(self.scale, self.scale)

    def coefficients(self, X) -> np.ndarray:
        """``G^(-1) p(x)`` for each row of ``X`` (columns of the result, scaled basis)."""
        P = (basis_eval(self.spec, np.atleast_2d(X)) * self.scale).T
        z = solve_triangular(self.lower, P, lower=True)
        c = solve_triangular(self.lower.T, z, lower=False)
        if self.precision == "extended":
            Pl = (basis_eval(self.spec, np.atleast_2d(X), np.longdouble) * self.scale.astype(np.longdouble)).T
            c = c.astype(np.longdouble)
            for _ in range(2):
                r = Pl - self.scaled_gram @ c
                z = solve_triangular(self.lower, r.astype(float), lower=True)
                c = c + solve_triangular(self.lower.T, z, lower=False).astype(np.longdouble)
            return c, Pl
        return c, P

    def kernel_diag(self, X) -> np.ndarray:
        if self.precision == "extended":
            c, P = self.coefficients(X)
            return np.sum(P * c, axis=0)
        P = (basis_eval(self.spec, np.atleast_2d(X)) * self.scale).T
        z = solve_triangular(self.lower, P, lower=True)
        return np.sum(z * z, axis=0)

    def kernel(self, X, Y) -> np.ndarray:
        """``K(x_i, y_j)`` as a matrix."""
        c, _ = self.coefficients(X)
        PY = (basis_eval(self.spec, np.atleast_2d(Y)) * self.scale).T
        return np.asarray(c.T @ PY.astype(c.dtype), dtype=float)


def condition_estimate(G: np.ndarray) -> float:
    """Condition number of the Jacobi-scaled matrix (2-norm, from its eigenvalues)."""
    d = 1.0 / np.sqrt(np.diag(G).astype(float))
    ev = np.linalg.eigvalsh(G.astype(float) * np.outer(d, d))
    return float(ev[-1] / ev[0]) if ev[0] > 0 else np.inf


def factor_gram(G: np.ndarray, spec: BasisSpec, method: str, precision: str = "double") -> GramFactor:
    d = np.sqrt(np.diag(G).astype(float))
    if not np.all(d > 0):
        raise NotPositiveDefinite("Gram matrix has a non-positive diagonal")
    scale = 1.0 / d
    Gs = G * np.outer(scale, scale).astype(G.dtype)
    try:
        L = np.linalg.cholesky(Gs.astype(float))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    cond = condition_estimate(G)
    if cond > CONDITION_LIMIT:
        warnings.warn(f"Gram condition estimate {cond:.3g} exceeds {CONDITION_LIMIT:.0e}", ConditionTooHigh)
    return GramFactor(spec, L, scale, cond, method, precision, Gs if precision == "extended" else None)


class OrthoFactor:
    """Discrete orthonormal basis built by block Gram-Schmidt at the quadrature nodes.

    Degree ``k`` candidates are ``t_i * q_parent`` for parents of degree
    ``k - 1``; each block is orthogonalized twice against all earlier columns
    and then QR-factored.  The recurrence is replayed at evaluation points, so
    the Gram matrix (and its squared condition number) never appears.
    """

    def __init__(self, spec: BasisSpec, nodes, weights, method: str, condition: float):
        self.spec = spec
        self.method = method
        self.condition = condition
        self.precision = "double"
        lo, hi = np.asarray(spec.lo), np.asarray(spec.hi)
        self._lo, self._hi = lo, hi
        sw = np.sqrt(np.asarray(weights, dtype=float))
        T = self._reference(nodes)
        idx = spec.indices
        pos = {a: k for k, a in enumerate(idx)}
        N = len(idx)
        Q = np.empty((T.shape[0], N))
        self.q0 = 1.0 / float(np.linalg.norm(sw))
        Q[:, 0] = sw * self.q0
        self.blocks = []
        start = 1
        for k in range(1, spec.degree + 1):
            members = [a for a in idx if sum(a) == k]
            axes, parents = [], []
            for a in members:
                i = next(j for j, e in enumerate(a) if e > 0)
                parent = list(a)
                parent[i] -= 1
                axes.append(i)
                parents.append(pos[tuple(parent)])
            axes, parents = np.array(axes), np.array(parents)
            V = T[:, axes] * Q[:, parents]
            prev = Q[:, :start]
            C = prev.T @ V
            V -= prev @ C
            C2 = prev.T @ V
            V -= prev @ C2
            Qb, R = np.linalg.qr(V)
            diag = np.abs(np.diag(R))
            if diag.min() <= 1e-13 * max(diag.max(), 1.0):
                raise NotPositiveDefinite("quadrature rule cannot separate the polynomial space")
            Q[:, start:start + len(members)] = Qb
            self.blocks.append((axes, parents, C + C2, R))
            start += len(members)
        self.orthogonality_defect = float(np.max(np.abs(Q.T @ Q - np.eye(N))))

    def _reference(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return (2 * X - self._lo - self._hi) / (self._hi - self._lo)

    def values(self, X) -> np.ndarray:
        """Orthonormal basis values, shape ``(k, N)``."""
        T = self._reference(X)
        Q = np.empty((T.shape[0], self.spec.size))
        Q[:, 0] = self.q0
        start = 1
        for axes, parents, C, R in self.blocks:
            V = T[:, axes] * Q[:, parents] - Q[:, :start] @ C
            m = len(axes)
            Q[:, start:start + m] = solve_triangular(R, V.T, trans="T", lower=False).T
            start += m
        return Q

    def kernel_diag(self, X) -> np.ndarray:
        Q = self.values(X)
        return np.sum(Q * Q, axis=1)

    def kernel(self, X, Y) -> np.ndarray:
        return self.values(X) @ self.values(Y).T


_FACTORS: "weakref.WeakKeyDictionary[ConvexBody, dict]" = weakref.WeakKeyDictionary()
_LOCK = threading.Lock()


def gram_factor(body: ConvexBody, n: int, precision: str = "double", algorithm: str = "auto"):
    """Memoized factor for ``(body, n, precision, algorithm)``.

    ``algorithm`` is ``"cholesky"``, ``"orthogonal"`` or ``"auto"``; the
    latter factors the Gram matrix when its scaled condition number is at most
    ``CHOLESKY_LIMIT`` and orthogonalizes at the quadrature nodes otherwise.
    """
    check_degree(body.dim, n)
    if precision not in ("double", "extended"):
        raise ValueError("precision must be 'double' or 'extended'")
    if algorithm not in ("auto", "cholesky", "orthogonal"):
        raise ValueError("unknown algorithm")
    with _LOCK:
        cache = _FACTORS.setdefault(body, {})
        key = (n, precision, algorithm, quadrature._SEED[0])
        if key not in cache:
            cache[key] = _build_factor(body, n, precision, algorithm)
        return cache[key]


def _build_factor(body, n, precision, algorithm):
    spec = BasisSpec.for_body(body, n)
    rule = body_rule(body, 2 * n)
    if algorithm == "orthogonal":
        return OrthoFactor(spec, rule.nodes, rule.weights, rule.method, np.nan)
    dtype = np.longdouble if precision == "extended" else float
    G = gram_matrix(body, n, spec, dtype=dtype, rule=rule)
    cond = condition_estimate(G)
    if algorithm == "auto" and cond > CHOLESKY_LIMIT:
        F = OrthoFactor(spec, rule.nodes, rule.weights, rule.method, cond)
        if F.orthogonality_defect > 1e-8:
            warnings.warn(f"orthogonalization defect {F.orthogonality_defect:.3g}", ConditionTooHigh)
        return F
    return factor_gram(G, spec, rule.method, precision)


@dataclass(frozen=True)
class ChristoffelValue:
    value: float
    n: int
    x: tuple
    condition: float
    method: str
    exterior: bool = False
    basis_size: int = 0

    def to_dict(self) -> dict:
        return {"lambda": self.value, "n": self.n, "x": list(self.x), "N": self.basis_size,
                "condition": self.condition, "method": self.method, "exterior": self.exterior}


def christoffel_values(body: ConvexBody, n: int, X, precision: str = "double", john: bool = False) -> np.ndarray:
    """``lambda_n(D, x)`` for every row of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if john:
        T = john_map(body)
        return christoffel_values(normalized_body(body), n, T(X), precision) / abs(T.det)
    F = gram_factor(body, n, precision)
    return 1.0 / np.asarray(F.kernel_diag(X), dtype=float)


def christoffel_eval(body: ConvexBody, n: int, x, precision: str = "double", john: bool = False) -> ChristoffelValue:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lam = float(christoffel_values(body, n, x[None, :], precision, john)[0])
    F = gram_factor(normalized_body(body) if john else body, n, precision)
    exterior = not bool(body.contains(x))
    return ChristoffelValue(lam, n, tuple(x.tolist()), F.condition, F.method, exterior, F.spec.size)


def kernel_eval(body: ConvexBody, n: int, x, y, precision: str = "double") -> float:
    F = gram_factor(body, n, precision)
    return float(F.kernel(np.atleast_1d(x)[None, :], np.atleast_1d(y)[None, :])[0, 0])


def christoffel_1d(n: int, x) -> np.ndarray | float:
    """``lambda_n([-1, 1], x) = 1 / sum_k (2k+1)/2 P_k(x)^2``."""
    check_degree(1, n)
    P = legendre_table(x, n)
    k = np.arange(n + 1)
    val = 1.0 / np.sum((2 * k + 1) / 2 * P * P, axis=-1)
    return float(val) if np.ndim(val) == 0 else val


# ---------------------------------------------------------------- John normalization

_JOHN: "weakref.WeakKeyDictionary[ConvexBody, tuple]" = weakref.WeakKeyDictionary()


def john_map(body: ConvexBody, directions: int | None = None) -> AffineMap:
    """Affine ``T`` with ``B^d ⊂ T(D) ⊂ d B^d`` (approximately the John position).

    The maximal volume ellipsoid is found inside the polytope cut out by
    supporting half-planes on a direction sample, then shrunk about its centre
    until it lies in ``D`` (checked through support functions on a finer
    sample).
    """
    if body in _JOHN:
        return _JOHN[body][0]
    import cvxpy as cp

    d = body.dim
    if d == 1:
        lo, hi = body.bounding_box()
        T = AffineMap(np.array([[2.0 / (hi[0] - lo[0])]]), np.array([-(hi[0] + lo[0]) / (hi[0] - lo[0])]))
        _JOHN[body] = (T, AffineImage(T, body))
        return T
    k = directions or (256 if d == 2 else 600)
    U = unit_directions(d, k)
    h = np.asarray(body.support(U))
    B = cp.Variable((d, d), PSD=True)
    c = cp.Variable(d)
    cons = [cp.norm(B @ U[i]) + U[i] @ c <= h[i] for i in range(k)]
    cp.Problem(cp.Maximize(cp.log_det(B)), cons).solve()
    Bv, cv = np.asarray(B.value), np.asarray(c.value)
    Bv = 0.5 * (Bv + Bv.T)
    shrink = min(1.0, _containment_ratio(body, Bv, cv, 8 * k))
    Bv = Bv * shrink * (1 - 1e-9)
    Binv = np.linalg.inv(Bv)
    T = AffineMap(Binv, -Binv @ cv)
    _JOHN[body] = (T, AffineImage(T, body))
    return T


def _containment_ratio(body, Bv, cv, k):
    """``min_v (h_D(v) - <v, c>) / |B v|``: the largest scaling of the ellipsoid that stays inside ``D``.

    A direction grid is refined locally around its worst points, which
    matters at facet normals of thin polytopes.
    """
    from scipy.optimize import minimize, minimize_scalar

    d = Bv.shape[0]
    ratio = lambda V: (np.asarray(body.support(V)) - V @ cv) / np.linalg.norm(V @ Bv, axis=-1)
    V = unit_directions(d, k)
    r = ratio(V)
    best = float(r.min())
    for i in np.argsort(r)[:5]:
        if d == 2:
            t0, step = np.arctan2(V[i, 1], V[i, 0]), 4 * np.pi / k
            f = lambda t: float(ratio(np.array([[np.cos(t), np.sin(t)]]))[0])
            res = minimize_scalar(f, bounds=(t0 - step, t0 + step), method="bounded", options={"xatol": 1e-12})
        else:
            f = lambda w: float(ratio((w / np.linalg.norm(w))[None, :])[0])
            res = minimize(f, V[i], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14})
        best = min(best, float(res.fun))
    return best


def normalized_body(body: ConvexBody) -> AffineImage:
    john_map(body)
    return _JOHN[body][1]
