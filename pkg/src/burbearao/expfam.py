"""Exponential families in canonical form and their closed-form distances.

A density reads ``exp(<t(x), theta> - F(theta) + k(x))``. Skew Bhattacharyya
distances between members of one family are skew Jensen differences of the
log-normalizer ``F`` on natural parameters, and the Kullback-Leibler
divergence is a Bregman divergence of ``F`` on swapped natural parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.special import gammaln

from .errors import DomainError
from .generators import (
    Domain,
    Generator,
    _nonneg,
    _skew_raw,
    bregman,
    burbea_rao,
    is_pd,
    skew_burbea_rao,
)
from .params import CompositeParam, as_param

SIMPLEX_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class GaussianParam:
    """Mean vector and symmetric positive-definite covariance matrix."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.array(self.mean, dtype=float))
        cov = np.atleast_2d(np.array(self.cov, dtype=float))
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise DomainError(f"mean {mean.shape} and covariance {cov.shape} shapes disagree")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise DomainError("Gaussian parameters must be finite")
        scale = max(float(np.max(np.abs(cov))), 1.0)
        if float(np.max(np.abs(cov - cov.T))) > 1e-12 * scale:
            raise DomainError("covariance is not symmetric")
        cov = 0.5 * (cov + cov.T)
        if not is_pd(cov):
            raise DomainError("covariance is not positive-definite")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    def __repr__(self):
        return f"GaussianParam(mean={self.mean.tolist()}, cov={self.cov.tolist()})"


@dataclass(frozen=True)
class NormalParam:
    """Univariate Gaussian source parameters (mean, variance)."""

    mean: float
    var: float


# ---------------------------------------------------------------------------
# log-normalizers
# ---------------------------------------------------------------------------


class PoissonLogNormalizer(Generator):
    """F(theta) = exp(theta)."""

    name = "poisson-lognormalizer"
    domain = Domain(lower=(-math.inf,), upper=(math.inf,), description="R")

    def _value(self, x):
        return math.exp(x.vec[0])

    def _grad(self, x):
        return CompositeParam(np.exp(x.vec))

    def _dual_violation(self, y):
        if y.vec.shape != (1,) or y.has_matrix:
            return "wrong shape"
        if y.vec[0] <= 0.0:
            return "expected rate must be positive"
        return None

    def _grad_inverse(self, y):
        return CompositeParam(np.log(y.vec))


def _log1p_sum_exp(v: np.ndarray) -> float:
    """Overflow-safe log(1 + sum exp(v))."""
    return float(np.logaddexp.reduce(np.append(v, 0.0)))


class MultinomialLogNormalizer(Generator):
    """F(theta) = log(1 + sum_i exp(theta_i)) on d-1 free natural parameters."""

    def __init__(self, d: int):
        if d < 2:
            raise DomainError("a categorical family needs at least 2 outcomes")
        self.d = d
        self.name = f"multinomial-lognormalizer(d={d})"
        self.domain = Domain(lower=(-math.inf,) * (d - 1), upper=(math.inf,) * (d - 1), description="R^(d-1)")

    def _value(self, x):
        return float(_log1p_sum_exp(x.vec))

    def _grad(self, x):
        return CompositeParam(np.exp(x.vec - _log1p_sum_exp(x.vec)))

    def _dual_violation(self, y):
        if y.vec.shape != (self.d - 1,) or y.has_matrix:
            return "wrong shape"
        if np.any(y.vec <= 0.0) or float(np.sum(y.vec)) >= 1.0:
            return "expected statistics must lie in the open simplex"
        return None

    def _grad_inverse(self, y):
        return CompositeParam(np.log(y.vec) - math.log1p(-float(np.sum(y.vec))))


class NormalLogNormalizer(Generator):
    """F(theta) = -theta_1^2 / (4 theta_2) + log(-pi / theta_2) / 2, theta_2 < 0."""

    name = "normal-lognormalizer"
    domain = Domain(lower=(-math.inf, -math.inf), upper=(math.inf, 0.0), description="R x (-inf, 0)")

    def _value(self, x):
        t1, t2 = x.vec
        return -t1 * t1 / (4.0 * t2) + 0.5 * math.log(-math.pi / t2)

    def _grad(self, x):
        t1, t2 = x.vec
        mu = -t1 / (2.0 * t2)
        var = -1.0 / (2.0 * t2)
        return CompositeParam(np.array([mu, mu * mu + var]))

    def _dual_violation(self, y):
        if y.vec.shape != (2,) or y.has_matrix:
            return "wrong shape"
        if y.vec[1] - y.vec[0] ** 2 <= 0.0:
            return "second moment must exceed squared mean"
        return None

    def _grad_inverse(self, y):
        mu, m2 = y.vec
        var = m2 - mu * mu
        return CompositeParam(np.array([mu / var, -0.5 / var]))


class MVNLogNormalizer(Generator):
    """F(theta) = tr(theta_2^-1 theta_1 theta_1^T)/4 - log det(theta_2)/2 + d log(pi)/2.

    theta = (Sigma^-1 mu, Sigma^-1 / 2); the gradient is (mu, -(Sigma + mu mu^T))
    matching the sufficient statistic t(x) = (x, -x x^T).
    """

    def __init__(self, d: int):
        self.d = d
        self.name = f"mvn-lognormalizer(d={d})"
        self.domain = Domain(
            lower=(-math.inf,) * d, upper=(math.inf,) * d, has_matrix=True, matrix_pd=True,
            description="R^d x PD(d)",
        )

    def check(self, x, interior=False, label="point"):
        x = as_param(x)
        if x.mat is not None and x.mat.shape != (self.d, self.d):
            raise DomainError(f"{self.name}: {label} has a {x.mat.shape} matrix part")
        return super().check(x, interior, label)

    def _value(self, x):
        L = np.linalg.cholesky(x.mat)
        z = np.linalg.solve(L, x.vec)
        logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
        return 0.25 * float(z @ z) - 0.5 * logdet + 0.5 * self.d * math.log(math.pi)

    def _grad(self, x):
        sigma = 0.5 * _spd_inverse(x.mat)
        mu = sigma @ x.vec
        return CompositeParam(mu, -(sigma + np.outer(mu, mu)))

    def _dual_violation(self, y):
        if y.vec.shape != (self.d,) or y.mat is None or y.mat.shape != (self.d, self.d):
            return "wrong shape"
        if not is_pd(-y.mat - np.outer(y.vec, y.vec)):
            return "implied covariance is not positive-definite"
        return None

    def _grad_inverse(self, y):
        sigma = -y.mat - np.outer(y.vec, y.vec)
        prec = _spd_inverse(sigma)
        return CompositeParam(prec @ y.vec, 0.5 * prec)


def _spd_inverse(m: np.ndarray) -> np.ndarray:
    L = np.linalg.cholesky(m)
    Linv = np.linalg.solve(L, np.eye(m.shape[0]))
    inv = Linv.T @ Linv
    return 0.5 * (inv + inv.T)


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------


class ExpFamily:
    """An exponential family: log-normalizer plus source/natural coordinate maps."""

    name = "expfamily"
    discrete = False
    log_normalizer: Generator

    def to_natural(self, s) -> CompositeParam:
        raise NotImplementedError

    def to_source(self, theta) -> Any:
        raise NotImplementedError

    def sufficient_statistic(self, x) -> CompositeParam:
        raise NotImplementedError

    def carrier(self, x) -> float:
        return 0.0

    def log_density(self, theta, x) -> float:
        theta = self.log_normalizer.check(theta)
        return self.sufficient_statistic(x).dot(theta) - self.log_normalizer(theta) + self.carrier(x)

    def density(self, theta, x) -> float:
        return math.exp(self.log_density(theta, x))

    def source_to_json(self, s) -> Any:
        raise NotImplementedError

    def source_from_json(self, obj) -> Any:
        raise NotImplementedError

    def bhattacharyya_closed_form(self, sp, sq) -> float:
        """Bhattacharyya distance written directly in source parameters."""
        raise NotImplementedError

    def __repr__(self):
        return f"<ExpFamily {self.name}>"


def _positive_float(x, what) -> float:
    try:
        v = float(x)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"{what} must be a number, got {x!r}") from exc
    if not math.isfinite(v) or v <= 0.0:
        raise DomainError(f"{what} must be positive and finite, got {x!r}")
    return v


class Poisson(ExpFamily):
    """Poisson counts: theta = log(rate), F = exp(theta), k(x) = -log x!."""

    name = "poisson"
    discrete = True
    support = "non-negative integers"

    def __init__(self):
        self.log_normalizer = PoissonLogNormalizer()

    def to_natural(self, s):
        return CompositeParam(np.array([math.log(_positive_float(s, "Poisson rate"))]))

    def to_source(self, theta):
        theta = self.log_normalizer.check(theta)
        return math.exp(theta.vec[0])

    def sufficient_statistic(self, x):
        return CompositeParam(np.array([float(x)]))

    def carrier(self, x):
        return -float(gammaln(x + 1.0))

    def source_to_json(self, s):
        return {"rate": float(s)}

    def source_from_json(self, obj):
        if isinstance(obj, dict):
            obj = obj.get("rate")
        return _positive_float(obj, "Poisson rate")

    def bhattacharyya_closed_form(self, sp, sq):
        return 0.5 * (math.sqrt(sp) - math.sqrt(sq)) ** 2


class Multinomial(ExpFamily):
    """Single-trial multinomial (categorical) over d outcomes.

    theta_i = log(p_i / p_d) for i < d, F = log(1 + sum exp theta_i).
    """

    discrete = True

    def __init__(self, d: int):
        self.d = d
        self.name = f"multinomial(d={d})"
        self.support = f"categories 0..{d - 1}"
        self.log_normalizer = MultinomialLogNormalizer(d)

    def _check_probs(self, s) -> np.ndarray:
        p = np.asarray(s, dtype=float).reshape(-1)
        if p.size != self.d:
            raise DomainError(f"expected {self.d} probabilities, got {p.size}")
        if not np.all(np.isfinite(p)) or np.any(p <= 0.0):
            raise DomainError("probabilities must lie in the open simplex interior")
        if abs(float(np.sum(p)) - 1.0) > SIMPLEX_TOL:
            raise DomainError(f"probabilities sum to {float(np.sum(p))!r}, not 1")
        return p

    def to_natural(self, s):
        p = self._check_probs(s)
        return CompositeParam(np.log(p[:-1]) - math.log(p[-1]))

    def to_source(self, theta):
        theta = self.log_normalizer.check(theta)
        z = np.append(theta.vec, 0.0)
        return np.exp(z - np.logaddexp.reduce(z))

    def sufficient_statistic(self, x):
        k = int(x)
        if not 0 <= k < self.d:
            raise DomainError(f"category {x!r} outside 0..{self.d - 1}")
        t = np.zeros(self.d - 1)
        if k < self.d - 1:
            t[k] = 1.0
        return CompositeParam(t)

    def source_to_json(self, s):
        return {"probs": [float(v) for v in s]}

    def source_from_json(self, obj):
        if isinstance(obj, dict):
            obj = obj.get("probs")
        return self._check_probs(obj)

    def bhattacharyya_closed_form(self, sp, sq):
        return -math.log(float(np.sum(np.sqrt(self._check_probs(sp) * self._check_probs(sq)))))


class UnivariateGaussian(ExpFamily):
    """Normal N(mean, var) with theta = (mean/var, -1/(2 var)) and t(x) = (x, x^2)."""

    name = "gaussian"
    support = "real line"

    def __init__(self):
        self.log_normalizer = NormalLogNormalizer()

    def _check(self, s) -> NormalParam:
        if isinstance(s, NormalParam):
            mean, var = s.mean, s.var
        else:
            mean, var = s
        mean = float(mean)
        if not math.isfinite(mean):
            raise DomainError("mean must be finite")
        return NormalParam(mean, _positive_float(var, "variance"))

    def to_natural(self, s):
        s = self._check(s)
        return CompositeParam(np.array([s.mean / s.var, -0.5 / s.var]))

    def to_source(self, theta):
        t1, t2 = self.log_normalizer.check(theta).vec
        return NormalParam(-t1 / (2.0 * t2), -1.0 / (2.0 * t2))

    def sufficient_statistic(self, x):
        x = float(x)
        return CompositeParam(np.array([x, x * x]))

    def source_to_json(self, s):
        s = self._check(s)
        return {"mean": s.mean, "var": s.var}

    def source_from_json(self, obj):
        if isinstance(obj, dict):
            return self._check((obj.get("mean"), obj.get("var")))
        return self._check(obj)

    def bhattacharyya_closed_form(self, sp, sq):
        sp, sq = self._check(sp), self._check(sq)
        tot = sp.var + sq.var
        return 0.25 * (sp.mean - sq.mean) ** 2 / tot + 0.5 * math.log(tot / (2.0 * math.sqrt(sp.var * sq.var)))


class MultivariateGaussian(ExpFamily):
    """Multivariate normal with theta = (Sigma^-1 mu, Sigma^-1 / 2)."""

    def __init__(self, d: int):
        if d < 1:
            raise DomainError("dimension must be positive")
        self.d = d
        self.name = f"mvgaussian(d={d})"
        self.support = f"R^{d}"
        self.log_normalizer = MVNLogNormalizer(d)

    def _check(self, s) -> GaussianParam:
        if not isinstance(s, GaussianParam):
            s = GaussianParam(*s)
        if s.dim != self.d:
            raise DomainError(f"expected dimension {self.d}, got {s.dim}")
        return s

    def to_natural(self, s):
        s = self._check(s)
        prec = _spd_inverse(s.cov)
        return CompositeParam(prec @ s.mean, 0.5 * prec)

    def to_source(self, theta):
        theta = self.log_normalizer.check(theta)
        cov = 0.5 * _spd_inverse(theta.mat)
        return GaussianParam(cov @ theta.vec, cov)

    def sufficient_statistic(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        return CompositeParam(x, -np.outer(x, x))

    def source_to_json(self, s):
        s = self._check(s)
        return {"mean": s.mean.tolist(), "cov": s.cov.tolist()}

    def source_from_json(self, obj):
        if not isinstance(obj, dict) or "mean" not in obj or "cov" not in obj:
            raise DomainError("multivariate Gaussian payload needs 'mean' and 'cov'")
        return self._check(GaussianParam(obj["mean"], obj["cov"]))

    def bhattacharyya_closed_form(self, sp, sq):
        return gaussian_bhattacharyya(self._check(sp), self._check(sq))


def gaussian_bhattacharyya(a: GaussianParam, b: GaussianParam) -> float:
    """(mu_a - mu_b)^T S^-1 (mu_a - mu_b) / 8 + log(det S / sqrt(det Sa det Sb)) / 2, S = (Sa + Sb)/2."""
    s = 0.5 * (a.cov + b.cov)
    L = np.linalg.cholesky(s)
    z = np.linalg.solve(L, a.mean - b.mean)
    logdet_s = 2.0 * float(np.sum(np.log(np.diag(L))))
    logdet_a = 2.0 * float(np.sum(np.log(np.diag(np.linalg.cholesky(a.cov)))))
    logdet_b = 2.0 * float(np.sum(np.log(np.diag(np.linalg.cholesky(b.cov)))))
    val = 0.125 * float(z @ z) + 0.5 * (logdet_s - 0.5 * (logdet_a + logdet_b))
    return _nonneg(val, abs(logdet_s) + abs(logdet_a) + abs(logdet_b), "Gaussian Bhattacharyya distance")


def get_family(name: str, d: int | None = None) -> ExpFamily:
    """Family lookup by CLI name."""
    key = name.lower()
    if key == "poisson":
        return Poisson()
    if key in ("gaussian", "normal"):
        return UnivariateGaussian()
    if key == "multinomial":
        if d is None:
            raise DomainError("multinomial needs a dimension")
        return Multinomial(d)
    if key in ("mvgaussian", "mvn"):
        if d is None:
            raise DomainError("mvgaussian needs a dimension")
        return MultivariateGaussian(d)
    raise DomainError(f"unknown family {name!r}")


# ---------------------------------------------------------------------------
# distances
# ---------------------------------------------------------------------------


def to_natural(fam: ExpFamily, s) -> CompositeParam:
    return fam.to_natural(s)


def to_source(fam: ExpFamily, theta):
    return fam.to_source(theta)


def bhattacharyya(fam: ExpFamily, sp, sq) -> float:
    """-log of the Bhattacharyya coefficient, as a Jensen difference of F."""
    return burbea_rao(fam.log_normalizer, fam.to_natural(sp), fam.to_natural(sq))


def skew_bhattacharyya(fam: ExpFamily, sp, sq, alpha: float) -> float:
    """-log int p^alpha q^(1-alpha)."""
    return skew_burbea_rao(fam.log_normalizer, fam.to_natural(sp), fam.to_natural(sq), alpha)


def chernoff_coefficient(fam: ExpFamily, sp, sq, alpha: float) -> float:
    """int p^alpha q^(1-alpha) = exp(-skew Jensen difference)."""
    return math.exp(-skew_bhattacharyya(fam, sp, sq, alpha))


def hellinger(fam: ExpFamily, sp, sq) -> float:
    c = chernoff_coefficient(fam, sp, sq, 0.5)
    return math.sqrt(max(0.0, 1.0 - c))


def kl_divergence(fam: ExpFamily, sp, sq) -> float:
    """KL(p || q) = B_F(theta_q, theta_p)."""
    return bregman(fam.log_normalizer, fam.to_natural(sq), fam.to_natural(sp))


def amari_alpha_divergence(fam: ExpFamily, sp, sq, alpha: float) -> float:
    """Amari alpha-divergence; alpha = -1 gives KL(p||q), alpha = 1 gives KL(q||p)."""
    alpha = float(alpha)
    if alpha == -1.0:
        return kl_divergence(fam, sp, sq)
    if alpha == 1.0:
        return kl_divergence(fam, sq, sp)
    g = fam.log_normalizer
    tp, tq = g.check(fam.to_natural(sp)), g.check(fam.to_natural(sq))
    skew = (1.0 - alpha) / 2.0
    if 0.0 < skew < 1.0:
        jensen = skew_burbea_rao(g, tp, tq, skew)
    else:
        # outside (0, 1) the mixture may leave the natural domain; DomainError then
        jensen = _skew_raw(g, tp, tq, skew, clamp=False)
    val = 4.0 / (1.0 - alpha * alpha) * -math.expm1(-jensen)
    return _nonneg(val, 1.0, "alpha-divergence")


def chernoff_alpha_divergence(fam: ExpFamily, sp, sq, alpha: float) -> float:
    """(1 - C_alpha(p, q)) / (alpha (1 - alpha)), with the KL limits at 0 and 1."""
    alpha = float(alpha)
    if alpha == 1.0:
        return kl_divergence(fam, sp, sq)
    if alpha == 0.0:
        return kl_divergence(fam, sq, sp)
    return amari_alpha_divergence(fam, sp, sq, 1.0 - 2.0 * alpha)


__all__ = [
    "ExpFamily", "GaussianParam", "NormalParam", "Poisson", "Multinomial", "UnivariateGaussian",
    "MultivariateGaussian", "PoissonLogNormalizer", "MultinomialLogNormalizer", "NormalLogNormalizer",
    "MVNLogNormalizer", "get_family", "to_natural", "to_source", "bhattacharyya", "skew_bhattacharyya",
    "chernoff_coefficient", "hellinger", "kl_divergence", "amari_alpha_divergence",
    "chernoff_alpha_divergence", "gaussian_bhattacharyya",
]
