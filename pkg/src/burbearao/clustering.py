"""Gaussian mixtures: fitting, Bhattacharyya k-means and hierarchical simplification."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateClusterError, DomainError, EmptyClusterError, WeightError
from .expfam import GaussianParam, MultivariateGaussian, gaussian_bhattacharyya
from .gaussian_tailored import solve_tailored
from .generators import is_pd
from .solver import SolverConfig, WeightedSet, solve_centroid, weighted_sum

WEIGHT_TOL = 1e-9


@dataclass
class MixtureModel:
    weights: np.ndarray
    components: list

    def __post_init__(self):
        self.components = [c if isinstance(c, GaussianParam) else GaussianParam(*c) for c in self.components]
        if not self.components:
            raise DomainError("a mixture needs at least one component")
        d = self.components[0].dim
        if any(c.dim != d for c in self.components):
            raise DomainError("mixture components must share one dimension")
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if w.size != len(self.components):
            raise WeightError("one weight per component is required")
        if np.any(w <= 0.0) or abs(float(np.sum(w)) - 1.0) > WEIGHT_TOL:
            raise WeightError("mixture weights must be positive and sum to 1")
        self.weights = w

    @property
    def d(self) -> int:
        return self.components[0].dim

    def __len__(self):
        return len(self.components)

    def to_dict(self) -> dict:
        return {
            "family": "mvgaussian",
            "d": self.d,
            "components": [
                {"weight": float(w), "mean": c.mean.tolist(), "cov": c.cov.tolist()}
                for w, c in zip(self.weights, self.components)
            ],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> MixtureModel:
        if not isinstance(obj, dict) or obj.get("family", "mvgaussian") != "mvgaussian":
            raise DomainError("expected a mixture object with family 'mvgaussian'")
        comps = obj.get("components")
        if not isinstance(comps, list) or not comps:
            raise DomainError("mixture needs a non-empty 'components' list")
        try:
            m = cls(
                np.array([float(c["weight"]) for c in comps]),
                [GaussianParam(c["mean"], c["cov"]) for c in comps],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed mixture component: {exc}") from exc
        if "d" in obj and int(obj["d"]) != m.d:
            raise DomainError(f"declared d={obj['d']} but components have d={m.d}")
        return m

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> MixtureModel:
        return cls.from_dict(json.loads(text))

    def log_responsibilities(self, points: np.ndarray) -> np.ndarray:
        """log(w_j) + log N(x | mu_j, Sigma_j) for every point/component pair."""
        x = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty((x.shape[0], len(self)))
        for j, (w, c) in enumerate(zip(self.weights, self.components)):
            L = np.linalg.cholesky(c.cov)
            z = np.linalg.solve(L, (x - c.mean).T)
            logdet = 2.0 * np.sum(np.log(np.diag(L)))
            out[:, j] = math.log(w) - 0.5 * (np.sum(z * z, axis=0) + logdet + self.d * math.log(2 * math.pi))
        return out

    def assign(self, points: np.ndarray) -> np.ndarray:
        """Hard maximum-posterior component index per point."""
        return np.argmax(self.log_responsibilities(points), axis=1)


# ---------------------------------------------------------------------------
# fitting from raw points
# ---------------------------------------------------------------------------


def _as_cloud(points) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise DomainError(f"point cloud must be a non-empty (n, d) array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("point cloud has non-finite entries")
    return x


def _kmeanspp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = [x[rng.integers(n)]]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = float(np.sum(d2))
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers.append(x[idx])
        d2 = np.minimum(d2, np.sum((x - x[idx]) ** 2, axis=1))
    return np.array(centers)


def _lloyd(x, centers, max_iter):
    labels = None
    for _ in range(max_iter):
        d2 = np.sum((x[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new = np.argmin(d2, axis=1)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(centers.shape[0]):
            members = x[labels == j]
            if len(members):
                centers[j] = members.mean(axis=0)
    return labels, centers


def _moment_fit(members: np.ndarray) -> GaussianParam:
    mean = members.mean(axis=0)
    diff = members - mean
    cov = diff.T @ diff / members.shape[0]
    cov = 0.5 * (cov + cov.T)
    d = cov.shape[0]
    if not is_pd(cov):
        eps = 1e-6 * float(np.trace(cov)) / d
        if eps <= 0.0:
            eps = 1e-12
        cov = cov + eps * np.eye(d)
        if not is_pd(cov):
            raise DegenerateClusterError("covariance stays singular after regularization")
    return GaussianParam(mean, cov)


def fit_mixture(points, k: int, seed: int = 0, cfg: SolverConfig | None = None) -> MixtureModel:
    """Hard-assignment k-means (k-means++ seeding) followed by per-cluster moment fits.

    Every cluster needs at least d + 1 points; an undersized cluster is
    reseeded once at the point farthest from its center, then
    DegenerateClusterError is raised.
    """
    cfg = cfg or SolverConfig()
    x = _as_cloud(points)
    n, d = x.shape
    if not 1 <= k <= n:
        raise DomainError(f"k must lie in 1..{n}, got {k}")
    rng = np.random.default_rng(seed)
    centers = _kmeanspp(x, k, rng)
    labels, centers = _lloyd(x, centers.copy(), cfg.max_iterations)
    counts = np.bincount(labels, minlength=k)
    if np.any(counts < d + 1):
        for j in np.flatnonzero(counts < d + 1):
            dist = np.sum((x - centers[labels]) ** 2, axis=1)
            centers[j] = x[int(np.argmax(dist))]
        labels, centers = _lloyd(x, centers, cfg.max_iterations)
        counts = np.bincount(labels, minlength=k)
        if np.any(counts < d + 1):
            raise DegenerateClusterError(
                f"cluster sizes {counts.tolist()} leave fewer than d+1={d + 1} points in some cluster"
            )
    comps = [_moment_fit(x[labels == j]) for j in range(k)]
    return MixtureModel(counts / n, comps)


# ---------------------------------------------------------------------------
# centroids of Gaussian sets
# ---------------------------------------------------------------------------


def bhattacharyya_centroid(components: Sequence[GaussianParam], weights, cfg: SolverConfig | None = None):
    """Generic CCCP centroid over natural parameters; returns (GaussianParam, SolverReport)."""
    fam = MultivariateGaussian(components[0].dim)
    w = np.asarray(weights, dtype=float)
    s = WeightedSet([fam.to_natural(c) for c in components], w / np.sum(w))
    c, report = solve_centroid(fam.log_normalizer, s, cfg)
    return fam.to_source(c), report


def _cluster_energy(components, weights, centers, labels) -> float:
    return float(sum(w * gaussian_bhattacharyya(centers[l], c) for c, w, l in zip(components, weights, labels)))


@dataclass
class KMeansResult:
    mixture: MixtureModel
    labels: np.ndarray
    energies: list = field(default_factory=list)


def kmeans_bhattacharyya(components, weights, k: int, seed: int = 0, cfg: SolverConfig | None = None,
                         return_details: bool = False):
    """Lloyd iterations with Bhattacharyya assignment and Bhattacharyya-centroid updates."""
    cfg = cfg or SolverConfig()
    comps = [c if isinstance(c, GaussianParam) else GaussianParam(*c) for c in components]
    w = np.asarray(weights, dtype=float).reshape(-1)
    n = len(comps)
    if not 1 <= k <= n:
        raise DomainError(f"k must lie in 1..{n}, got {k}")
    if w.size != n or np.any(w <= 0.0):
        raise WeightError("one positive weight per component is required")
    w = w / np.sum(w)
    dist = np.array([[gaussian_bhattacharyya(a, b) for b in comps] for a in comps])

    # k-means++ style seeding under the Bhattacharyya distance
    rng = np.random.default_rng(seed)
    seeds = [int(rng.integers(n))]
    dmin = dist[seeds[0]].copy()
    for _ in range(1, k):
        total = float(np.sum(w * dmin))
        idx = int(rng.choice(n, p=w * dmin / total)) if total > 0.0 else next(i for i in range(n) if i not in seeds)
        seeds.append(idx)
        dmin = np.minimum(dmin, dist[idx])
    centers = [comps[i] for i in seeds]

    labels = None
    energies = []
    for _ in range(cfg.max_iterations):
        d_to_c = np.array([[gaussian_bhattacharyya(c, m) for m in centers] for c in comps])
        new = np.argmin(d_to_c, axis=1)
        new = _fill_empty(new, d_to_c, k)
        if labels is not None:
            energies.append(_cluster_energy(comps, w, centers, new))
            if np.array_equal(new, labels):
                break
        labels = new
        centers = [
            bhattacharyya_centroid([comps[i] for i in np.flatnonzero(labels == j)], w[labels == j], cfg)[0]
            for j in range(k)
        ]
        energies.append(_cluster_energy(comps, w, centers, labels))
    mix = MixtureModel(np.array([np.sum(w[labels == j]) for j in range(k)]), centers)
    if return_details:
        return KMeansResult(mix, labels, energies)
    return mix


def _fill_empty(labels, d_to_c, k):
    labels = labels.copy()
    for _ in range(k):
        counts = np.bincount(labels, minlength=k)
        empty = np.flatnonzero(counts == 0)
        if not empty.size:
            return labels
        own = d_to_c[np.arange(len(labels)), labels]
        own[counts[labels] <= 1] = -np.inf  # never strip a singleton cluster
        far = int(np.argmax(own))
        if own[far] == -np.inf:
            break
        labels[far] = empty[0]
    if np.any(np.bincount(labels, minlength=k) == 0):
        raise EmptyClusterError("could not repopulate an empty cluster")
    return labels


def hierarchical_simplify(m: MixtureModel, k_target: int, cfg: SolverConfig | None = None) -> MixtureModel:
    """Greedily merge the closest pair (Bhattacharyya distance) into its weighted centroid."""
    if not 1 <= k_target <= len(m):
        raise DomainError(f"k_target must lie in 1..{len(m)}, got {k_target}")
    comps = list(m.components)
    w = list(m.weights)
    while len(comps) > k_target:
        best, pair = math.inf, None
        for i in range(len(comps)):
            for j in range(i + 1, len(comps)):
                dij = gaussian_bhattacharyya(comps[i], comps[j])
                if dij < best:
                    best, pair = dij, (i, j)
        i, j = pair
        wsum = w[i] + w[j]
        merged, _ = bhattacharyya_centroid([comps[i], comps[j]], [w[i] / wsum, w[j] / wsum], cfg)
        comps = [c for t, c in enumerate(comps) if t not in pair] + [merged]
        w = [x for t, x in enumerate(w) if t not in pair] + [wsum]
    w = np.array(w)
    return MixtureModel(w / np.sum(w), comps)


# ---------------------------------------------------------------------------
# generic vs tailored comparison
# ---------------------------------------------------------------------------


@dataclass
class ComparisonRow:
    instance_id: int
    energy_generic: float
    energy_tailored: float
    winner: str  # "generic", "tailored" or "tie"
    iters_generic: int | None
    iters_tailored: int | None
    failure: str = ""


@dataclass
class ComparisonReport:
    rows: list

    @property
    def generic_correct(self) -> float:
        return float(np.mean([r.winner != "tailored" for r in self.rows]))

    @property
    def tailored_correct(self) -> float:
        return float(np.mean([r.winner != "generic" for r in self.rows]))

    @property
    def generic_losses(self) -> int:
        return sum(r.winner == "tailored" for r in self.rows)

    @property
    def tailored_losses(self) -> int:
        return sum(r.winner == "generic" for r in self.rows)

    @property
    def failures(self) -> int:
        return sum(bool(r.failure) for r in self.rows)

    @staticmethod
    def _mean(xs):
        xs = [x for x in xs if x is not None]
        return float(np.mean(xs)) if xs else math.nan

    @property
    def mean_iters_generic(self) -> float:
        return self._mean([r.iters_generic for r in self.rows])

    @property
    def mean_iters_tailored(self) -> float:
        return self._mean([r.iters_tailored for r in self.rows])

    def summary(self) -> dict:
        return {
            "instances": len(self.rows),
            "generic_correct": self.generic_correct,
            "tailored_correct": self.tailored_correct,
            "generic_losses": self.generic_losses,
            "tailored_losses": self.tailored_losses,
            "tailored_failures": self.failures,
            "mean_iters_generic": self.mean_iters_generic,
            "mean_iters_tailored": self.mean_iters_tailored,
        }


def _iters_to(trace, threshold):
    return next((i for i, e in enumerate(trace) if e <= threshold), None)


def compare_one(instance_id: int, components, weights, cfg: SolverConfig | None = None) -> ComparisonRow:
    """Run both solvers from the same start (barycenter of natural parameters)."""
    cfg = cfg or SolverConfig()
    comps = [c if isinstance(c, GaussianParam) else GaussianParam(*c) for c in components]
    w = np.asarray(weights, dtype=float)
    w = w / np.sum(w)
    failure = []
    try:
        fam = MultivariateGaussian(comps[0].dim)
        s = WeightedSet([fam.to_natural(c) for c in comps], w)
        _, rep_g = solve_centroid(fam.log_normalizer, s, cfg)
        trace_g = rep_g.energies
        start = fam.to_source(weighted_sum(s.active().points, s.active().weights))
    except Exception as exc:  # per-instance failures never abort a batch
        trace_g, start = [math.inf], None
        failure.append(f"generic {type(exc).__name__}: {exc}")
    try:
        _, rep_t = solve_tailored(comps, w, cfg, init=start)
        trace_t = rep_t.energies
        if rep_t.failure:
            failure.append(f"tailored {rep_t.failure}")
    except Exception as exc:
        trace_t = [math.inf]
        failure.append(f"tailored {type(exc).__name__}: {exc}")
    eg, et = trace_g[-1], trace_t[-1]
    best = min(eg, et)
    if eg > 1.01 * et + 1e-12:
        winner = "tailored"
    elif et > 1.01 * eg + 1e-12:
        winner = "generic"
    else:
        winner = "tie"
    thr = 1.01 * best + 1e-12
    return ComparisonRow(instance_id, eg, et, winner, _iters_to(trace_g, thr), _iters_to(trace_t, thr),
                         "; ".join(failure))


def compare_solvers(instances, cfg: SolverConfig | None = None) -> ComparisonReport:
    """Generic CCCP vs tailored solver on each (components, weights) instance.

    A method loses an instance when its final energy exceeds the other's by
    more than 1%. Iterations-to-1% count iterations until the energy is
    within 1% of the better final energy.
    """
    return ComparisonReport([compare_one(i, comps, w, cfg) for i, (comps, w) in enumerate(instances)])


def random_instances(count: int, d: int = 5, n_components: int = 5, seed: int = 0):
    """Random Gaussian sets: N(0, I) means, covariances A A^T / 4 + 0.1 I, Dirichlet(1) weights."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        comps = []
        for _ in range(n_components):
            A = 0.5 * rng.normal(size=(d, d))
            comps.append(GaussianParam(rng.normal(size=d), A @ A.T + 0.1 * np.eye(d)))
        out.append((comps, rng.dirichlet(np.ones(n_components))))
    return out
