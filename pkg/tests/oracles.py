"""Independent numerical oracles.

Densities come from scipy.stats, never from the package's canonical-form
evaluator, so agreement is a genuine cross-check.
"""

import math

import numpy as np
from scipy import stats

GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


def gl_integrate(f, a, b, panels=400):
    """Composite 20-point Gauss-Legendre rule on [a, b]."""
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = (mid[:, None] + half[:, None] * GL_NODES[None, :]).reshape(-1)
    w = (half[:, None] * GL_WEIGHTS[None, :]).reshape(-1)
    return float(np.sum(w * f(x)))


def _normal_box(mp, vp, mq, vq):
    sp, sq = math.sqrt(vp), math.sqrt(vq)
    return min(mp - 10 * sp, mq - 10 * sq), max(mp + 10 * sp, mq + 10 * sq)


def normal_chernoff(mp, vp, mq, vq, alpha):
    """int p^alpha q^(1-alpha) dx for univariate normals."""
    a, b = _normal_box(mp, vp, mq, vq)

    def f(x):
        return np.exp(alpha * stats.norm.logpdf(x, mp, math.sqrt(vp))
                      + (1 - alpha) * stats.norm.logpdf(x, mq, math.sqrt(vq)))

    return gl_integrate(f, a, b)


def normal_kl(mp, vp, mq, vq):
    a, b = _normal_box(mp, vp, mq, vq)

    def f(x):
        lp = stats.norm.logpdf(x, mp, math.sqrt(vp))
        lq = stats.norm.logpdf(x, mq, math.sqrt(vq))
        return np.exp(lp) * (lp - lq)

    return gl_integrate(f, a, b)


def normal_total_mass(m, v):
    s = math.sqrt(v)
    return gl_integrate(lambda x: stats.norm.pdf(x, m, s), m - 10 * s, m + 10 * s)


def poisson_support(*rates):
    """0..K with the Poisson tail beyond K below 1e-12 for every rate."""
    top = max(rates)
    k = int(top + 20 * math.sqrt(top) + 40)
    while any(stats.poisson.sf(k, r) > 1e-12 for r in rates):
        k += 10
    return np.arange(k + 1)


def poisson_chernoff(lp, lq, alpha):
    x = poisson_support(lp, lq)
    return float(np.sum(np.exp(alpha * stats.poisson.logpmf(x, lp) + (1 - alpha) * stats.poisson.logpmf(x, lq))))


def poisson_kl(lp, lq):
    x = poisson_support(lp, lq)
    a, b = stats.poisson.logpmf(x, lp), stats.poisson.logpmf(x, lq)
    return float(np.sum(np.exp(a) * (a - b)))


def categorical_chernoff(p, q, alpha):
    p, q = np.asarray(p), np.asarray(q)
    return float(np.sum(p**alpha * q ** (1 - alpha)))


def mvn_total_mass(mean, cov, per_axis=120):
    """Tensor Gauss-Legendre integral of a 2-D normal density over mean +- 10 sd."""
    sd = np.sqrt(np.diag(cov))
    rv = stats.multivariate_normal(mean, cov)
    xs, wx = _axis_rule(mean[0] - 10 * sd[0], mean[0] + 10 * sd[0], per_axis)
    ys, wy = _axis_rule(mean[1] - 10 * sd[1], mean[1] + 10 * sd[1], per_axis)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    vals = rv.pdf(np.stack([X, Y], axis=-1))
    return float(wx @ vals @ wy)


def _axis_rule(a, b, panels):
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = (mid[:, None] + half[:, None] * GL_NODES[None, :]).reshape(-1)
    w = (half[:, None] * GL_WEIGHTS[None, :]).reshape(-1)
    return x, w


def scalar_tailored_step(means, variances, weights, m, v):
    """One mean-then-variance sweep of the tailored scheme written for d = 1."""
    u = [1.0 / (v + s) for s in variances]
    num = sum(w * 2 * ui * mi for w, ui, mi in zip(weights, u, means))
    den = sum(w * 2 * ui for w, ui in zip(weights, u))
    m_new = num / den
    u = [1.0 / (v + s) for s in variances]
    a = sum(w * (2 * ui - ui * ui * (m_new - mi) ** 2) for w, ui, mi in zip(weights, u, means))
    # B = a + a - a = a and B + diag(B) = 2a, so the update is 2 sum(w) / (2a)
    return m_new, 2.0 * sum(weights) / (2.0 * a)


def grid_argmin(f, lo, hi, step):
    xs = np.arange(lo, hi + step / 2, step)
    vals = f(xs)
    i = int(np.argmin(vals))
    return float(xs[i])
