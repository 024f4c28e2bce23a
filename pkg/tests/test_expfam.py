import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats

from burbearao import (
    CompositeParam,
    DomainError,
    GaussianParam,
    Multinomial,
    MultivariateGaussian,
    NormalParam,
    Poisson,
    UnivariateGaussian,
    amari_alpha_divergence,
    bhattacharyya,
    chernoff_coefficient,
    hellinger,
    kl_divergence,
    skew_bhattacharyya,
)
from burbearao.expfam import chernoff_alpha_divergence, gaussian_bhattacharyya, get_family

import oracles
from conftest import FAMILIES, random_gaussian, random_source


def same_source(fam, a, b, rtol):
    if isinstance(fam, Poisson):
        return math.isclose(a, b, rel_tol=rtol)
    if isinstance(fam, UnivariateGaussian):
        return math.isclose(a.mean, b[0], rel_tol=rtol, abs_tol=1e-12) and math.isclose(a.var, b[1], rel_tol=rtol)
    if isinstance(fam, Multinomial):
        return np.allclose(a, b, rtol=rtol, atol=0)
    return np.allclose(a.mean, b.mean, rtol=rtol, atol=1e-12) and np.allclose(a.cov, b.cov, rtol=rtol, atol=1e-12)


def chernoff_oracle(fam, sp, sq, alpha):
    if isinstance(fam, Poisson):
        return oracles.poisson_chernoff(sp, sq, alpha)
    if isinstance(fam, UnivariateGaussian):
        return oracles.normal_chernoff(sp[0], sp[1], sq[0], sq[1], alpha)
    return oracles.categorical_chernoff(sp, sq, alpha)


SCALAR_FAMILIES = [Poisson(), UnivariateGaussian(), Multinomial(3)]
SCALAR_IDS = ["poisson", "gaussian", "multinomial3"]


class TestCoordinates:
    def test_poisson_unit_rate(self):
        assert Poisson().to_natural(1.0).vec[0] == 0.0
        assert Poisson().to_source(CompositeParam([0.0])) == 1.0

    def test_mvn_standard(self):
        theta = MultivariateGaussian(2).to_natural(GaussianParam(np.zeros(2), np.eye(2)))
        assert_allclose(theta.vec, [0.0, 0.0])
        assert_allclose(theta.mat, 0.5 * np.eye(2))
        back = MultivariateGaussian(2).to_source(theta)
        assert_allclose(back.mean, [0.0, 0.0])
        assert_allclose(back.cov, np.eye(2))

    def test_univariate_canonical_chart(self):
        # natural coordinates are (mean/var, -1/(2 var)); the (mean, var) pair is the source chart
        assert_allclose(UnivariateGaussian().to_natural((1.0, 2.0)).vec, [0.5, -0.25])

    def test_multinomial_last_category_reference(self):
        theta = Multinomial(3).to_natural([0.2, 0.3, 0.5])
        assert_allclose(theta.vec, [math.log(0.4), math.log(0.6)])

    @pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: f.name)
    def test_round_trip(self, fam, rng):
        for _ in range(100):
            s = random_source(fam, rng)
            assert same_source(fam, fam.to_source(fam.to_natural(s)), s, 1e-9)

    @pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: f.name)
    def test_json_round_trip(self, fam, rng):
        s = random_source(fam, rng)
        text = json.dumps(fam.source_to_json(s))
        assert same_source(fam, fam.source_from_json(json.loads(text)), s, 1e-15)

    @pytest.mark.parametrize("fam,bad", [
        (Poisson(), 0.0),
        (Poisson(), -1.0),
        (UnivariateGaussian(), (0.0, 0.0)),
        (Multinomial(3), [0.5, 0.5, 0.0]),
        (Multinomial(3), [0.5, 0.4, 0.2]),
    ])
    def test_invalid_sources(self, fam, bad):
        with pytest.raises(DomainError):
            fam.to_natural(bad)

    def test_non_pd_covariance(self):
        with pytest.raises(DomainError):
            GaussianParam([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])

    def test_non_pd_natural_point(self):
        with pytest.raises(DomainError):
            MultivariateGaussian(2).to_source(CompositeParam([0.0, 0.0], [[1.0, 0.0], [0.0, -1.0]]))

    def test_get_family(self):
        assert isinstance(get_family("poisson"), Poisson)
        assert get_family("mvgaussian", 4).d == 4
        with pytest.raises(DomainError):
            get_family("gamma")


class TestDensities:
    def test_poisson_sums_to_one(self):
        fam = Poisson()
        theta = fam.to_natural(3.7)
        total = sum(fam.density(theta, x) for x in oracles.poisson_support(3.7))
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_poisson_matches_scipy(self):
        fam = Poisson()
        theta = fam.to_natural(3.7)
        for x in range(20):
            assert fam.log_density(theta, x) == pytest.approx(stats.poisson.logpmf(x, 3.7), rel=1e-12)

    def test_gaussian_integrates_to_one(self):
        fam = UnivariateGaussian()
        theta = fam.to_natural((0.7, 2.3))
        s = math.sqrt(2.3)
        total = oracles.gl_integrate(np.vectorize(lambda x: fam.density(theta, x)), 0.7 - 10 * s, 0.7 + 10 * s, panels=50)
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_gaussian_matches_scipy(self, rng):
        fam = UnivariateGaussian()
        theta = fam.to_natural((0.7, 2.3))
        for x in rng.normal(size=10):
            assert fam.log_density(theta, x) == pytest.approx(stats.norm.logpdf(x, 0.7, math.sqrt(2.3)), rel=1e-12)

    def test_multinomial_sums_to_one(self):
        fam = Multinomial(3)
        theta = fam.to_natural([0.2, 0.3, 0.5])
        assert_allclose([fam.density(theta, x) for x in range(3)], [0.2, 0.3, 0.5], rtol=1e-12)

    def test_mvn_matches_scipy(self, rng):
        fam = MultivariateGaussian(3)
        g = random_gaussian(rng, 3)
        theta = fam.to_natural(g)
        for x in rng.normal(size=(10, 3)):
            assert fam.log_density(theta, x) == pytest.approx(stats.multivariate_normal(g.mean, g.cov).logpdf(x), rel=1e-10)

    def test_mvn_integrates_to_one(self, rng):
        fam = MultivariateGaussian(2)
        g = random_gaussian(rng, 2)
        theta = fam.to_natural(g)
        sd = np.sqrt(np.diag(g.cov))
        xs, wx = oracles._axis_rule(g.mean[0] - 10 * sd[0], g.mean[0] + 10 * sd[0], 6)
        ys, wy = oracles._axis_rule(g.mean[1] - 10 * sd[1], g.mean[1] + 10 * sd[1], 6)
        vals = np.array([[fam.density(theta, (x, y)) for y in ys] for x in xs])
        assert float(wx @ vals @ wy) == pytest.approx(1.0, abs=1e-6)

    def test_mvn_oracle_is_sound(self, rng):
        g = random_gaussian(rng, 2)
        assert oracles.mvn_total_mass(g.mean, g.cov) == pytest.approx(1.0, abs=1e-6)


class TestBhattacharyya:
    def test_poisson_example(self):
        assert bhattacharyya(Poisson(), 1.0, 4.0) == pytest.approx(0.5, rel=1e-14)

    def test_gaussian_example(self):
        assert bhattacharyya(UnivariateGaussian(), (0.0, 1.0), (2.0, 1.0)) == pytest.approx(0.5, rel=1e-13)

    @pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: f.name)
    def test_identical(self, fam, rng):
        s = random_source(fam, rng)
        assert bhattacharyya(fam, s, s) == 0.0

    @pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: f.name)
    def test_closed_form_agreement(self, fam, rng):
        for _ in range(50):
            sp, sq = random_source(fam, rng), random_source(fam, rng)
            assert bhattacharyya(fam, sp, sq) == pytest.approx(fam.bhattacharyya_closed_form(sp, sq), rel=1e-10)

    def test_mvn_against_scipy_quadrature(self, rng):
        # independent check of the multivariate closed form with a 2-D integral of sqrt(p q)
        a, b = random_gaussian(rng, 2), random_gaussian(rng, 2)
        ra, rb = stats.multivariate_normal(a.mean, a.cov), stats.multivariate_normal(b.mean, b.cov)
        lo = np.minimum(a.mean - 10 * np.sqrt(np.diag(a.cov)), b.mean - 10 * np.sqrt(np.diag(b.cov)))
        hi = np.maximum(a.mean + 10 * np.sqrt(np.diag(a.cov)), b.mean + 10 * np.sqrt(np.diag(b.cov)))
        xs, wx = oracles._axis_rule(lo[0], hi[0], 120)
        ys, wy = oracles._axis_rule(lo[1], hi[1], 120)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        pts = np.stack([X, Y], axis=-1)
        coeff = float(wx @ np.exp(0.5 * (ra.logpdf(pts) + rb.logpdf(pts))) @ wy)
        assert gaussian_bhattacharyya(a, b) == pytest.approx(-math.log(coeff), abs=1e-6)

    @pytest.mark.parametrize("fam", SCALAR_FAMILIES, ids=SCALAR_IDS)
    def test_integration_oracle(self, fam, rng):
        for _ in range(20):
            sp, sq = random_source(fam, rng), random_source(fam, rng)
            assert bhattacharyya(fam, sp, sq) == pytest.approx(-math.log(chernoff_oracle(fam, sp, sq, 0.5)), abs=1e-5)


class TestChernoff:
    def test_identical_is_one(self):
        assert chernoff_coefficient(Poisson(), 2.0, 2.0, 0.3) == 1.0

    def test_poisson_half(self):
        assert chernoff_coefficient(Poisson(), 1.0, 4.0, 0.5) == pytest.approx(math.exp(-0.5), rel=1e-14)

    def test_half_is_bhattacharyya(self, rng):
        fam = MultivariateGaussian(2)
        sp, sq = random_source(fam, rng), random_source(fam, rng)
        assert skew_bhattacharyya(fam, sp, sq, 0.5) == pytest.approx(bhattacharyya(fam, sp, sq), rel=1e-14)

    def test_poisson_quarter_quadrature(self):
        expected = -math.log(oracles.poisson_chernoff(1.0, 4.0, 0.25))
        assert skew_bhattacharyya(Poisson(), 1.0, 4.0, 0.25) == pytest.approx(expected, abs=1e-10)

    @pytest.mark.parametrize("fam", SCALAR_FAMILIES, ids=SCALAR_IDS)
    def test_coefficient_matches_integral(self, fam, rng):
        for _ in range(20):
            sp, sq, a = random_source(fam, rng), random_source(fam, rng), float(rng.uniform(0.05, 0.95))
            c = chernoff_coefficient(fam, sp, sq, a)
            assert 0.0 < c <= 1.0
            assert c == pytest.approx(chernoff_oracle(fam, sp, sq, a), abs=1e-5)

    @pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: f.name)
    def test_kl_limit(self, fam, rng):
        for _ in range(20):
            sp, sq = random_source(fam, rng), random_source(fam, rng)
            ratio = skew_bhattacharyya(fam, sp, sq, 1e-4) / 1e-4 / kl_divergence(fam, sq, sp)
            assert 0.99 <= ratio <= 1.01


class TestHellinger:
    def test_identical(self):
        assert hellinger(Poisson(), 3.0, 3.0) == 0.0

    def test_poisson_example(self):
        # sqrt(1 - exp(-1/2))
        assert hellinger(Poisson(), 1.0, 4.0) == pytest.approx(0.6272713450, rel=1e-9)

    @pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: f.name)
    def test_bounds_and_definition(self, fam, rng):
        for _ in range(50):
            sp, sq = random_source(fam, rng), random_source(fam, rng)
            h = hellinger(fam, sp, sq)
            assert 0.0 <= h < 1.0
            assert h == pytest.approx(math.sqrt(1.0 - chernoff_coefficient(fam, sp, sq, 0.5)), rel=1e-14)

    @pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: f.name)
    def test_triangle_inequality(self, fam, rng):
        for _ in range(50):
            a, b, c = (random_source(fam, rng) for _ in range(3))
            assert hellinger(fam, a, c) <= hellinger(fam, a, b) + hellinger(fam, b, c) + 1e-12


class TestKL:
    def test_identical(self):
        assert kl_divergence(UnivariateGaussian(), (0.0, 1.0), (0.0, 1.0)) == 0.0

    def test_poisson_series(self):
        assert kl_divergence(Poisson(), 1.0, 4.0) == pytest.approx(oracles.poisson_kl(1.0, 4.0), abs=1e-6)

    def test_gaussian_quadrature(self):
        expected = oracles.normal_kl(0.0, 1.0, 1.0, 2.0)
        assert kl_divergence(UnivariateGaussian(), (0.0, 1.0), (1.0, 2.0)) == pytest.approx(expected, abs=1e-5)

    def test_mvn_textbook_form(self, rng):
        a, b = random_gaussian(rng, 3), random_gaussian(rng, 3)
        inv_b = np.linalg.inv(b.cov)
        dm = b.mean - a.mean
        expected = 0.5 * (np.trace(inv_b @ a.cov) + dm @ inv_b @ dm - 3 + math.log(np.linalg.det(b.cov) / np.linalg.det(a.cov)))
        assert kl_divergence(MultivariateGaussian(3), a, b) == pytest.approx(expected, rel=1e-10)

    def test_categorical(self, rng):
        p, q = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))
        assert kl_divergence(Multinomial(3), p, q) == pytest.approx(float(np.sum(p * np.log(p / q))), rel=1e-10)


class TestAlphaDivergences:
    def test_identical(self):
        for a in (-0.5, 0.0, 0.3):
            assert amari_alpha_divergence(Poisson(), 2.0, 2.0, a) == 0.0

    def test_alpha_zero(self):
        b = bhattacharyya(Poisson(), 1.0, 4.0)
        assert amari_alpha_divergence(Poisson(), 1.0, 4.0, 0.0) == pytest.approx(4 * (1 - math.exp(-b)), rel=1e-14)

    def test_endpoints_are_kl(self):
        fam = UnivariateGaussian()
        sp, sq = (0.0, 1.0), (1.0, 2.0)
        assert amari_alpha_divergence(fam, sp, sq, -1.0) == kl_divergence(fam, sp, sq)
        assert amari_alpha_divergence(fam, sp, sq, 1.0) == kl_divergence(fam, sq, sp)

    def test_continuity_at_endpoints(self):
        fam = UnivariateGaussian()
        sp, sq = (0.0, 1.0), (1.0, 2.0)
        near = amari_alpha_divergence(fam, sp, sq, -1.0 + 1e-5)
        assert near == pytest.approx(kl_divergence(fam, sp, sq), rel=1e-3)

    def test_duality(self, rng):
        fam = MultivariateGaussian(2)
        for _ in range(10):
            sp, sq, a = random_source(fam, rng), random_source(fam, rng), float(rng.uniform(-0.9, 0.9))
            assert amari_alpha_divergence(fam, sp, sq, a) == pytest.approx(amari_alpha_divergence(fam, sq, sp, -a), rel=1e-12)

    def test_integral_form(self, rng):
        for _ in range(10):
            sp, sq, a = random_source(Poisson(), rng), random_source(Poisson(), rng), float(rng.uniform(-0.9, 0.9))
            c = oracles.poisson_chernoff(sp, sq, (1 - a) / 2)
            assert amari_alpha_divergence(Poisson(), sp, sq, a) == pytest.approx(4 / (1 - a * a) * (1 - c), abs=1e-8)

    def test_chernoff_alpha_form(self):
        fam = Poisson()
        a = 0.3
        expected = (1 - chernoff_coefficient(fam, 1.0, 4.0, a)) / (a * (1 - a))
        assert chernoff_alpha_divergence(fam, 1.0, 4.0, a) == pytest.approx(expected, rel=1e-12)
        assert chernoff_alpha_divergence(fam, 1.0, 4.0, 1.0) == kl_divergence(fam, 1.0, 4.0)


class TestUnivariateGaussianGenerator:
    """The log-normalizer must be strictly convex on the box the tests sample."""

    def test_hessian_positive_definite_on_box(self):
        g = UnivariateGaussian().log_normalizer
        h = 1e-4
        for t1 in np.linspace(-15.0, 15.0, 13):
            for t2 in np.linspace(-2.5, -0.125, 13):
                def f(a, b):
                    return g(CompositeParam([t1 + a, t2 + b]))
                hxx = (f(h, 0) - 2 * f(0, 0) + f(-h, 0)) / h**2
                hyy = (f(0, h) - 2 * f(0, 0) + f(0, -h)) / h**2
                hxy = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h**2)
                assert hxx > 0 and hxx * hyy - hxy**2 > 0

    def test_gradient_is_moments(self):
        g = UnivariateGaussian().log_normalizer
        theta = UnivariateGaussian().to_natural(NormalParam(1.5, 0.7))
        assert_allclose(g.grad(theta).vec, [1.5, 1.5**2 + 0.7], rtol=1e-12)

    def test_positive_theta2_outside_domain(self):
        with pytest.raises(DomainError):
            UnivariateGaussian().log_normalizer(CompositeParam([0.0, 0.5]))
