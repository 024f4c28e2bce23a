"""Skew Burbea-Rao centroids by the convex-concave procedure.

The centroid minimizes ``sum_i w_i BR^(a_i)(c, p_i)``. Dropping the terms
that do not depend on ``c`` leaves a convex part ``(sum w_i a_i) F(c)`` minus
a concave part, and the CCCP update is a quasi-arithmetic mean in the
gradient representation::

    grad F(c_{t+1}) = sum_i w_i a_i grad F(a_i c_t + (1 - a_i) p_i) / sum_i w_i a_i
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, NonFiniteError, WeightError
from .generators import Generator, _check_skew, _skew_raw, check_weights
from .params import CompositeParam, as_param, relative_change, weighted_sum

log = logging.getLogger(__name__)

ENERGY_STALL = 1e-14
MAX_HALVINGS = 20


@dataclass
class WeightedSet:
    """Points with normalized non-negative weights and per-point skews in (0, 1).

    Zero-weight points are allowed and ignored by the solver.
    """

    points: list
    weights: np.ndarray | None = None
    skews: np.ndarray | None = None

    def __post_init__(self):
        self.points = [as_param(p) for p in self.points]
        n = len(self.points)
        if n < 1:
            raise WeightError("a weighted set needs at least one point")
        if self.weights is None:
            self.weights = np.full(n, 1.0 / n)
        self.weights = check_weights(self.weights, n, allow_zero=True)
        if self.skews is None:
            self.skews = np.full(n, 0.5)
        elif np.isscalar(self.skews):
            self.skews = np.full(n, float(self.skews))
        self.skews = np.asarray(self.skews, dtype=float).reshape(-1)
        if self.skews.size != n:
            raise WeightError(f"expected {n} skews, got {self.skews.size}")
        for a in self.skews:
            _check_skew(a)

    def __len__(self):
        return len(self.points)

    def active(self) -> WeightedSet:
        """Copy restricted to positive-weight points."""
        keep = [i for i in range(len(self)) if self.weights[i] > 0.0]
        w = self.weights[keep]
        return WeightedSet([self.points[i] for i in keep], w / np.sum(w), self.skews[keep])

    def with_skew(self, alpha: float) -> WeightedSet:
        return WeightedSet(self.points, self.weights, np.full(len(self), float(alpha)))


@dataclass
class SolverConfig:
    tolerance: float = 1e-10
    max_iterations: int = 200
    init: CompositeParam | None = None  # None: weighted arithmetic mean

    def __post_init__(self):
        if not self.tolerance > 0.0:
            raise ValueError("tolerance must be positive")
        if int(self.max_iterations) < 1:
            raise ValueError("max_iterations must be at least 1")
        self.max_iterations = int(self.max_iterations)


@dataclass
class SolverReport:
    iterations: int = 0
    energies: list = field(default_factory=list)
    converged: bool = False
    final_step: float = 0.0
    halvings: int = 0


def energy(g: Generator, s: WeightedSet, c) -> float:
    """Weighted sum of skew Burbea-Rao divergences from c to every point."""
    for p in s.points:
        g.check(p, label="point")
    return _energy(g, s, c, [g(p) for p in s.points])


def _energy(g: Generator, s: WeightedSet, c, f_points) -> float:
    """Energy with F(p_i) precomputed; the points are assumed validated."""
    c = g.check(c, label="centroid")
    fc = g(c)
    total = 0.0
    for p, w, a, fp in zip(s.points, s.weights, s.skews, f_points):
        if w > 0.0:
            total += w * _skew_raw(g, c, p, _check_skew(a), True, fc, fp)
    return total


def _dual_target(g: Generator, s: WeightedSet, c: CompositeParam) -> CompositeParam:
    wa = s.weights * s.skews
    norm = float(np.sum(wa))
    terms, coefs = [], []
    for p, w, a, k in zip(s.points, s.weights, s.skews, wa):
        if w > 0.0:
            terms.append(g.grad(a * c + (1.0 - a) * p))
            coefs.append(k / norm)
    target = weighted_sum(terms, coefs)
    if not target.is_finite():
        raise NonFiniteError("gradient average is not finite")
    return target


def _map_back(g: Generator, y: CompositeParam) -> CompositeParam:
    c = g.grad_inverse(y)
    if not c.is_finite():
        raise NonFiniteError("inverse gradient produced non-finite values")
    return g.check(c, interior=True, label="iterate")


def cccp_step(g: Generator, s: WeightedSet, c) -> CompositeParam:
    """One CCCP update from ``c``."""
    c = g.check(c, interior=True, label="iterate")
    return _map_back(g, _dual_target(g, s, c))


def _guarded_step(g, s, c) -> tuple[CompositeParam, int]:
    """CCCP step that halves toward the previous iterate (in gradient coordinates) on domain exits."""
    target = _dual_target(g, s, c)
    anchor = None
    for halvings in range(MAX_HALVINGS + 1):
        try:
            return _map_back(g, target), halvings
        except (DomainError, NonFiniteError, np.linalg.LinAlgError):
            if anchor is None:
                anchor = g.grad(c)
            target = 0.5 * (target + anchor)
    raise NonFiniteError(f"step left the domain after {MAX_HALVINGS} halvings")


def solve_centroid(g: Generator, s: WeightedSet, cfg: SolverConfig | None = None):
    """Iterate CCCP to the unique skew Burbea-Rao centroid.

    Stops when the max-norm relative step drops below ``cfg.tolerance``, or
    when the step has stopped shrinking and the energy moved by at most
    1e-14 (round-off floor). Returns ``(centroid, SolverReport)``.
    """
    cfg = cfg or SolverConfig()
    act = s.active()
    report = SolverReport()
    if len(act) == 1:
        c = g.check(act.points[0], label="point")
        report.energies = [0.0]
        report.converged = True
        return c, report

    c = cfg.init if cfg.init is not None else weighted_sum(act.points, act.weights)
    c = g.check(c, interior=True, label="initial point")
    f_points = [g(g.check(p, label="point")) for p in act.points]
    e = _energy(g, act, c, f_points)
    report.energies.append(e)
    prev_step = np.inf
    for it in range(1, cfg.max_iterations + 1):
        new, halvings = _guarded_step(g, act, c)
        report.halvings += halvings
        step = relative_change(new, c)
        e_new = _energy(g, act, new, f_points)
        report.energies.append(e_new)
        report.iterations = it
        report.final_step = step
        stalled = step >= prev_step and abs(e - e_new) <= ENERGY_STALL
        c, e, prev_step = new, e_new, step
        if step < cfg.tolerance or stalled:
            report.converged = True
            break
    else:
        log.debug("CCCP hit max_iterations=%d (step %.3g)", cfg.max_iterations, report.final_step)
    return c, report


def bregman_right_centroid(s: WeightedSet) -> CompositeParam:
    """Center of mass: minimizer of sum w_i B_F(p_i, c) for every generator."""
    act = s.active()
    return weighted_sum(act.points, act.weights)


def bregman_left_centroid(g: Generator, s: WeightedSet) -> CompositeParam:
    """grad F^-1(sum w_i grad F(p_i)): minimizer of sum w_i B_F(c, p_i)."""
    act = s.active()
    return _map_back(g, weighted_sum([g.grad(p) for p in act.points], act.weights))


def skew_orbit(g: Generator, s: WeightedSet, alphas: Sequence[float], cfg: SolverConfig | None = None):
    """Centroids for a uniform skew alpha over a grid.

    Small alpha approaches the left-sided Bregman centroid, alpha near one
    the center of mass.
    """
    out = []
    for a in alphas:
        c, _ = solve_centroid(g, s.with_skew(a), cfg)
        out.append(c)
    return out


def quasi_arithmetic_mean(f: Callable, f_inv: Callable, xs, ws=None) -> float:
    """f^-1(sum w_i f(x_i)) for a strictly monotone f."""
    xs = np.asarray(xs, dtype=float).reshape(-1)
    ws = np.full(xs.size, 1.0 / xs.size) if ws is None else check_weights(ws, xs.size)
    val = float(f_inv(float(np.sum(ws * np.array([f(x) for x in xs])))))
    # interness holds exactly in real arithmetic; keep round-off from breaking it
    return min(max(val, float(xs.min())), float(xs.max()))
