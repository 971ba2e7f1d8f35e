from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class AffineMap:
    """``T(z) = offset + matrix @ z`` on R^d."""

    matrix: np.ndarray
    offset: np.ndarray
    det: float = field(init=False)

    def __post_init__(self):
        A = np.array(self.matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("matrix must be square")
        b = np.zeros(A.shape[0]) if self.offset is None else np.array(self.offset, dtype=float)
        if b.shape != (A.shape[0],):
            raise ValueError("offset has wrong shape")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "offset", b)
        object.__setattr__(self, "det", float(np.linalg.det(A)))

    @classmethod
    def identity(cls, dim: int) -> "AffineMap":
        return cls(np.eye(dim), np.zeros(dim))

    @classmethod
    def scaling(cls, factors, offset=None) -> "AffineMap":
        factors = np.atleast_1d(np.asarray(factors, dtype=float))
        return cls(np.diag(factors), offset)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return z @ self.matrix.T + self.offset

    def apply_linear(self, v):
        return np.asarray(v, dtype=float) @ self.matrix.T

    def inverse(self) -> "AffineMap":
        Ainv = np.linalg.inv(self.matrix)
        return AffineMap(Ainv, -Ainv @ self.offset)

    def compose(self, other: "AffineMap") -> "AffineMap":
        """Return ``self o other``."""
        return AffineMap(self.matrix @ other.matrix, self.matrix @ other.offset + self.offset)

    def to_dict(self) -> dict:
        return {"matrix": self.matrix.tolist(), "offset": self.offset.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "AffineMap":
        return cls(np.asarray(data["matrix"], dtype=float), np.asarray(data.get("offset"), dtype=float)
                   if data.get("offset") is not None else None)
