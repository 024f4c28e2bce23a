"""Strictly convex generators and the divergences they induce.

A generator ``F`` carries its value, gradient and inverse gradient over a
declared domain. From it we build the Burbea-Rao (Jensen difference)
divergence, its skewed and scaled variants, the Bregman divergence, the
Jeffreys-Bregman symmetrization and the diversity of a weighted population.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import xlogy

from .errors import DomainError, InternalConsistencyError, ScaleError, WeightError
from .params import CompositeParam, as_param, weighted_sum

NONNEG_SLACK = 1e-12
WEIGHT_TOL = 1e-9


@dataclass(frozen=True)
class Domain:
    """Box constraint on the vector part plus an optional PD matrix part.

    ``closed_lower`` admits the lower bound for value evaluation only;
    gradients always require the open interior.
    """

    lower: float | tuple = -math.inf
    upper: float | tuple = math.inf
    closed_lower: bool = False
    has_matrix: bool = False
    matrix_pd: bool = False
    description: str = ""

    def __post_init__(self):
        lower, upper = np.asarray(self.lower, dtype=float), np.asarray(self.upper, dtype=float)
        object.__setattr__(self, "_lower", lower)
        object.__setattr__(self, "_upper", upper)
        object.__setattr__(self, "_boxed", bool(np.any(np.isfinite(lower)) or np.any(np.isfinite(upper))))

    def violation(self, x: CompositeParam, interior: bool = False) -> str | None:
        if not x.is_finite():
            return "non-finite coordinates"
        if x.has_matrix != self.has_matrix:
            return "matrix part presence does not match the domain"
        v = x.vec
        lower, upper = self._lower, self._upper
        if lower.ndim and lower.shape != v.shape:
            return f"expected {lower.size} coordinates, got {v.size}"
        if v.size and self._boxed:
            if self.closed_lower and not interior:
                if (v < lower).any():
                    return f"coordinates below {self.lower}"
            elif (v <= lower).any():
                return f"coordinates must exceed {self.lower}"
            if (v >= upper).any():
                return f"coordinates must be below {self.upper}"
        if self.matrix_pd and not is_pd(x.mat):
            return "matrix part is not positive-definite"
        return None


def is_pd(m: np.ndarray) -> bool:
    """Positive-definiteness via an attempted Cholesky factorization."""
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return False
    return True


class Generator:
    """Base class for strictly convex differentiable generators.

    Subclasses implement ``_value``, ``_grad`` and ``_grad_inverse`` on
    already validated points, and ``_dual_violation`` for the gradient image.
    """

    name = "generator"
    domain = Domain()

    def check(self, x, interior: bool = False, label: str = "point") -> CompositeParam:
        x = as_param(x)
        reason = self.domain.violation(x, interior=interior)
        if reason is not None:
            raise DomainError(f"{self.name}: {label} {x!r} outside domain ({reason})")
        return x

    def contains(self, x, interior: bool = False) -> bool:
        return self.domain.violation(as_param(x), interior=interior) is None

    def __call__(self, x) -> float:
        return float(self._value(self.check(x)))

    def grad(self, x) -> CompositeParam:
        return self._grad(self.check(x, interior=True))

    def grad_inverse(self, y) -> CompositeParam:
        y = as_param(y)
        reason = self._dual_violation(y) if y.is_finite() else "non-finite coordinates"
        if reason is not None:
            raise DomainError(f"{self.name}: gradient value {y!r} has no preimage ({reason})")
        return self._grad_inverse(y)

    def _dual_violation(self, y: CompositeParam) -> str | None:
        return None

    def _value(self, x: CompositeParam) -> float:
        raise NotImplementedError

    def _grad(self, x: CompositeParam) -> CompositeParam:
        raise NotImplementedError

    def _grad_inverse(self, y: CompositeParam) -> CompositeParam:
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class QuadraticGenerator(Generator):
    """F(x) = <Qx, x> for a symmetric positive-definite Q."""

    def __init__(self, Q):
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        if Q.shape[0] != Q.shape[1] or not np.allclose(Q, Q.T, rtol=1e-12, atol=0):
            raise DomainError("Q must be a symmetric square matrix")
        if not is_pd(Q):
            raise DomainError("Q must be positive-definite")
        self.Q = 0.5 * (Q + Q.T)
        self.dim = Q.shape[0]
        self.name = f"quadratic(d={self.dim})"
        self.domain = Domain(description="R^d")

    @classmethod
    def identity(cls, d: int) -> QuadraticGenerator:
        return cls(np.eye(d))

    def check(self, x, interior=False, label="point"):
        x = super().check(x, interior, label)
        if x.vec.shape != (self.dim,):
            raise DomainError(f"{self.name}: {label} has dimension {x.vec.size}")
        return x

    def _value(self, x):
        return float(x.vec @ self.Q @ x.vec)

    def _grad(self, x):
        return CompositeParam(2.0 * self.Q @ x.vec)

    def _dual_violation(self, y):
        if y.vec.shape != (self.dim,) or y.has_matrix:
            return "wrong shape"
        return None

    def _grad_inverse(self, y):
        return CompositeParam(0.5 * np.linalg.solve(self.Q, y.vec))


class ShannonGenerator(Generator):
    """Negative Shannon entropy F(x) = sum x log x, separable on the positive orthant.

    With ``extended=True`` the generator is sum (x log x - x), the form used
    for positive measures. ``0 log 0`` is taken as 0 for value evaluation.
    """

    def __init__(self, extended: bool = False):
        self.extended = extended
        self.name = "xlogx-x" if extended else "xlogx"
        self.domain = Domain(lower=0.0, closed_lower=True, description="[0, inf)^d")

    def _value(self, x):
        v = float(np.sum(xlogy(x.vec, x.vec)))
        if self.extended:
            v -= float(np.sum(x.vec))
        return v

    def _grad(self, x):
        g = np.log(x.vec)
        return CompositeParam(g if self.extended else g + 1.0)

    def _dual_violation(self, y):
        return "matrix part not allowed" if y.has_matrix else None

    def _grad_inverse(self, y):
        return CompositeParam(np.exp(y.vec if self.extended else y.vec - 1.0))


class RenyiGenerator(Generator):
    """Negative Renyi entropy F(x) = -log(sum x_j^a) / (1 - a) for order a in (0, 1)."""

    def __init__(self, order: float):
        if not 0.0 < order < 1.0:
            raise DomainError(f"Renyi order must lie in (0, 1), got {order}")
        self.order = float(order)
        self.name = f"renyi(order={order:g})"
        self.domain = Domain(lower=0.0, description="(0, inf)^d")

    def _value(self, x):
        a = self.order
        return -math.log(float(np.sum(x.vec**a))) / (1.0 - a)

    def _grad(self, x):
        a = self.order
        s = float(np.sum(x.vec**a))
        return CompositeParam(-(a / (1.0 - a)) * x.vec ** (a - 1.0) / s)

    def _dual_violation(self, y):
        if y.has_matrix:
            return "matrix part not allowed"
        if np.any(y.vec >= 0.0):
            return "gradient coordinates must be negative"
        return None

    def _grad_inverse(self, y):
        # y_j = -c x_j^(a-1) / S with c = a/(1-a), S = sum x^a; solve S first
        a = self.order
        c = a / (1.0 - a)
        r = -y.vec / c
        t = float(np.sum(r ** (a / (a - 1.0))))
        s = t ** (1.0 - a)
        return CompositeParam((r * s) ** (1.0 / (a - 1.0)))


# ---------------------------------------------------------------------------
# divergences
# ---------------------------------------------------------------------------


def _nonneg(value: float, scale: float, what: str) -> float:
    """Clamp round-off negatives; flag anything larger as a bug."""
    if value >= 0.0:
        return value
    if value >= -NONNEG_SLACK * max(1.0, scale):
        return 0.0
    raise InternalConsistencyError(f"{what} evaluated to {value!r}")


def _check_skew(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"skew weight must lie in the open interval (0, 1), got {alpha}")
    return alpha


def burbea_rao(g: Generator, p, q) -> float:
    """Jensen difference (F(p) + F(q))/2 - F((p + q)/2)."""
    p = g.check(p, label="p")
    q = g.check(q, label="q")
    m = g.check(0.5 * (p + q), label="midpoint")
    fp, fq, fm = g(p), g(q), g(m)
    val = 0.5 * fp + 0.5 * fq - fm
    return _nonneg(val, max(abs(fp), abs(fq), abs(fm)), "Burbea-Rao divergence")


def skew_burbea_rao(g: Generator, p, q, alpha: float) -> float:
    """alpha F(p) + (1 - alpha) F(q) - F(alpha p + (1 - alpha) q), alpha in (0, 1)."""
    alpha = _check_skew(alpha)
    p = g.check(p, label="p")
    q = g.check(q, label="q")
    return _skew_raw(g, p, q, alpha, clamp=True)


def _skew_raw(g, p, q, alpha, clamp, fp=None, fq=None):
    """Skew Jensen difference of validated points; F(p), F(q) may be supplied."""
    # The larger weight is canonical and the smaller is 1 - larger, which is
    # exact in floating point, so (p, q, a) and (q, p, 1 - a) see identical weights.
    if alpha >= 0.5:
        big, bp, sp = alpha, p, q
    else:
        big, bp, sp = 1.0 - alpha, q, p
    small = 1.0 - big
    m = g.check(big * bp + small * sp, label="skew mixture")
    fp = g(p) if fp is None else fp
    fq = g(q) if fq is None else fq
    fm = g(m)
    fb, fs = (fp, fq) if alpha >= 0.5 else (fq, fp)
    val = (big * fb + small * fs) - fm
    if not clamp:
        return val
    return _nonneg(val, max(abs(fp), abs(fq), abs(fm)), "skew Burbea-Rao divergence")


def scaled_skew_burbea_rao(g: Generator, p, q, alpha: float) -> float:
    """Skew Jensen difference divided by alpha (1 - alpha); alpha may be any real except 0 and 1."""
    alpha = float(alpha)
    if alpha in (0.0, 1.0):
        raise ScaleError("scaled skew divergence is undefined at alpha in {0, 1}")
    p = g.check(p, label="p")
    q = g.check(q, label="q")
    raw = _skew_raw(g, p, q, alpha, clamp=False)
    val = raw / (alpha * (1.0 - alpha))
    scale = max(abs(g(p)), abs(g(q))) / abs(alpha * (1.0 - alpha))
    return _nonneg(val, scale, "scaled skew Burbea-Rao divergence")


def bregman(g: Generator, p, q) -> float:
    """F(p) - F(q) - <p - q, grad F(q)>."""
    p = g.check(p, label="p")
    q = g.check(q, interior=True, label="q")
    fp, fq = g(p), g(q)
    lin = (p - q).dot(g.grad(q))
    val = fp - fq - lin
    return _nonneg(val, max(abs(fp), abs(fq), abs(lin)), "Bregman divergence")


def jeffreys_bregman(g: Generator, p, q, form: str = "average") -> float:
    """Symmetrized Bregman divergence (B(p, q) + B(q, p)) / 2.

    ``form="inner"`` evaluates the equivalent <p - q, grad F(p) - grad F(q)> / 2.
    """
    if form == "average":
        return 0.5 * (bregman(g, p, q) + bregman(g, q, p))
    if form == "inner":
        p = g.check(p, interior=True, label="p")
        q = g.check(q, interior=True, label="q")
        gp, gq = g.grad(p), g.grad(q)
        val = 0.5 * (p - q).dot(gp - gq)
        return _nonneg(val, max(gp.max_abs(), gq.max_abs(), 1.0), "Jeffreys-Bregman divergence")
    raise ValueError(f"unknown form {form!r}")


def check_weights(weights, n: int, allow_zero: bool = False) -> np.ndarray:
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.size != n:
        raise WeightError(f"expected {n} weights, got {w.size}")
    if not np.all(np.isfinite(w)):
        raise WeightError("weights must be finite")
    if allow_zero:
        if np.any(w < 0.0) or not np.any(w > 0.0):
            raise WeightError("weights must be non-negative and not all zero")
    elif np.any(w <= 0.0):
        raise WeightError("weights must be positive")
    if abs(float(np.sum(w)) - 1.0) > WEIGHT_TOL:
        raise WeightError(f"weights sum to {float(np.sum(w))!r}, not 1")
    return w


def population_diversity(g: Generator, points: Sequence, weights) -> float:
    """sum_i w_i F(p_i) - F(sum_i w_i p_i) for positive normalized weights."""
    pts = [g.check(p, label=f"point {i}") for i, p in enumerate(points)]
    w = check_weights(weights, len(pts))
    values = [g(p) for p in pts]
    mean = g.check(weighted_sum(pts, w), label="weighted mean")
    fm = g(mean)
    val = float(sum(wi * fi for wi, fi in zip(w, values))) - fm
    scale = max([abs(fm)] + [abs(v) for v in values])
    return _nonneg(val, scale, "population diversity")
