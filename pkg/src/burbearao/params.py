"""Composite parameter points: a vector part plus an optional symmetric matrix part."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

SYMMETRY_RTOL = 1e-12


def _as_symmetric(mat) -> np.ndarray:
    m = np.array(mat, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"matrix part must be square, got shape {m.shape}")
    scale = max(float(np.max(np.abs(m))), 1.0) if m.size else 1.0
    if m.size and float(np.max(np.abs(m - m.T))) > SYMMETRY_RTOL * scale:
        raise DomainError("matrix part is not symmetric")
    # store the exact symmetric part so updates cannot drift
    return 0.5 * (m + m.T)


@dataclass(frozen=True, eq=False)
class CompositeParam:
    """A point in parameter space.

    The inner product is the dot product of the vector parts plus
    ``trace(A.T @ B)`` of the matrix parts when both are present.
    """

    vec: np.ndarray
    mat: np.ndarray | None = None

    def __post_init__(self):
        v = np.atleast_1d(np.array(self.vec, dtype=float))
        if v.ndim != 1:
            raise DomainError(f"vector part must be 1-D, got shape {v.shape}")
        object.__setattr__(self, "vec", v)
        if self.mat is not None:
            object.__setattr__(self, "mat", _as_symmetric(self.mat))
        v.setflags(write=False)
        if self.mat is not None:
            self.mat.setflags(write=False)

    @classmethod
    def _trusted(cls, vec: np.ndarray, mat: np.ndarray | None) -> CompositeParam:
        """Build from arrays already known to be valid (results of exact symmetric arithmetic)."""
        obj = object.__new__(cls)
        vec.setflags(write=False)
        if mat is not None:
            mat.setflags(write=False)
        object.__setattr__(obj, "vec", vec)
        object.__setattr__(obj, "mat", mat)
        return obj

    @classmethod
    def scalar(cls, x: float) -> CompositeParam:
        return cls(np.array([float(x)]))

    @property
    def has_matrix(self) -> bool:
        return self.mat is not None

    def _check_compatible(self, other: CompositeParam):
        if self.vec.shape != other.vec.shape or self.has_matrix != other.has_matrix or (
            self.has_matrix and self.mat.shape != other.mat.shape
        ):
            raise DomainError("incompatible parameter shapes")

    def __add__(self, other: CompositeParam) -> CompositeParam:
        self._check_compatible(other)
        mat = None if self.mat is None else self.mat + other.mat
        return CompositeParam._trusted(self.vec + other.vec, mat)

    def __sub__(self, other: CompositeParam) -> CompositeParam:
        self._check_compatible(other)
        mat = None if self.mat is None else self.mat - other.mat
        return CompositeParam._trusted(self.vec - other.vec, mat)

    def __mul__(self, s: float) -> CompositeParam:
        s = float(s)
        mat = None if self.mat is None else s * self.mat
        return CompositeParam._trusted(s * self.vec, mat)

    __rmul__ = __mul__

    def __neg__(self) -> CompositeParam:
        return self * -1.0

    def dot(self, other: CompositeParam) -> float:
        self._check_compatible(other)
        out = float(self.vec @ other.vec)
        if self.mat is not None:
            out += float(np.sum(self.mat * other.mat))
        return out

    def max_abs(self) -> float:
        """Max norm over both parts."""
        m = float(np.max(np.abs(self.vec))) if self.vec.size else 0.0
        if self.mat is not None and self.mat.size:
            m = max(m, float(np.max(np.abs(self.mat))))
        return m

    def is_finite(self) -> bool:
        ok = bool(np.all(np.isfinite(self.vec)))
        if self.mat is not None:
            ok = ok and bool(np.all(np.isfinite(self.mat)))
        return ok

    def flat(self) -> np.ndarray:
        """Vector part followed by the upper triangle of the matrix part (row-major)."""
        if self.mat is None:
            return self.vec.copy()
        iu = np.triu_indices(self.mat.shape[0])
        return np.concatenate([self.vec, self.mat[iu]])

    def allclose(self, other: CompositeParam, rtol=1e-9, atol=0.0) -> bool:
        self._check_compatible(other)
        ok = np.allclose(self.vec, other.vec, rtol=rtol, atol=atol)
        if self.mat is not None:
            ok = ok and np.allclose(self.mat, other.mat, rtol=rtol, atol=atol)
        return bool(ok)

    def __repr__(self):
        if self.mat is None:
            return f"CompositeParam(vec={self.vec.tolist()})"
        return f"CompositeParam(vec={self.vec.tolist()}, mat={self.mat.tolist()})"


def as_param(x) -> CompositeParam:
    """Coerce scalars, sequences and CompositeParam into a CompositeParam."""
    if isinstance(x, CompositeParam):
        return x
    return CompositeParam(np.atleast_1d(np.asarray(x, dtype=float)))


def weighted_sum(points, weights) -> CompositeParam:
    """Fixed-order weighted sum of points."""
    acc = None
    for p, w in zip(points, weights):
        term = p * w
        acc = term if acc is None else acc + term
    return acc


def relative_change(new: CompositeParam, old: CompositeParam) -> float:
    """Max-norm change relative to the max-norm of the old point."""
    return (new - old).max_abs() / max(old.max_abs(), np.finfo(float).tiny)
