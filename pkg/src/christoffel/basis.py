"""Tensor Legendre basis of total degree <= n on a reference box."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .errors import DegreeTooLarge

DEGREE_CAPS = {1: 60, 2: 32, 3: 14}


@lru_cache(maxsize=None)
def multi_indices(dim: int, n: int) -> tuple:
    """Exponent tuples of total degree <= n, graded then lexicographically descending."""
    out = []
    for k in range(n + 1):
        out.extend(_of_degree(dim, k))
    return tuple(out)


def _of_degree(dim, k):
    if dim == 1:
        return [(k,)]
    res = []
    for first in range(k, -1, -1):
        res.extend((first,) + rest for rest in _of_degree(dim - 1, k - first))
    return res


def check_degree(dim: int, n: int) -> None:
    if n < 0:
        raise ValueError("degree must be non-negative")
    if dim not in DEGREE_CAPS:
        raise ValueError("dimensions 1, 2 and 3 are supported")
    if n > DEGREE_CAPS[dim]:
        raise DegreeTooLarge(f"degree {n} exceeds the cap {DEGREE_CAPS[dim]} for d={dim}")


def legendre_table(t, n: int, dtype=float) -> np.ndarray:
    """``P_0..P_n`` at ``t``; shape ``t.shape + (n + 1,)``."""
    t = np.asarray(t, dtype=dtype)
    P = np.empty(t.shape + (n + 1,), dtype=dtype)
    P[..., 0] = 1
    if n >= 1:
        P[..., 1] = t
    for k in range(1, n):
        P[..., k + 1] = ((2 * k + 1) * t * P[..., k] - k * P[..., k - 1]) / (k + 1)
    return P


@dataclass(frozen=True)
class BasisSpec:
    dim: int
    degree: int
    lo: tuple
    hi: tuple

    def __post_init__(self):
        check_degree(self.dim, self.degree)
        if len(self.lo) != self.dim or len(self.hi) != self.dim:
            raise ValueError("box has the wrong dimension")
        if any(h <= l for l, h in zip(self.lo, self.hi)):
            raise ValueError("empty reference box")

    @classmethod
    def for_body(cls, body, n: int) -> "BasisSpec":
        lo, hi = body.bounding_box()
        return cls(body.dim, n, tuple(map(float, lo)), tuple(map(float, hi)))

    @property
    def size(self) -> int:
        return comb(self.degree + self.dim, self.dim)

    @property
    def indices(self) -> tuple:
        return multi_indices(self.dim, self.degree)


def basis_eval(spec: BasisSpec, X, dtype=float) -> np.ndarray:
    """Basis values at points ``X`` (shape ``(k, d)`` or ``(d,)``), columns in graded order."""
    X = np.asarray(X, dtype=dtype)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    lo = np.asarray(spec.lo, dtype=dtype)
    hi = np.asarray(spec.hi, dtype=dtype)
    T = (2 * X - lo - hi) / (hi - lo)
    idx = np.array(spec.indices)
    out = None
    for i in range(spec.dim):
        col = legendre_table(T[:, i], spec.degree, dtype)[:, idx[:, i]]
        out = col if out is None else out * col
    return out[0] if single else out
