import numpy as np
import pytest

from burbearao import (
    Multinomial,
    MultivariateGaussian,
    Poisson,
    QuadraticGenerator,
    RenyiGenerator,
    ShannonGenerator,
    UnivariateGaussian,
)
from burbearao.expfam import GaussianParam
from burbearao.params import CompositeParam


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def random_spd(rng, d, scale=0.5, floor=0.1):
    A = scale * rng.normal(size=(d, d))
    return A @ A.T + floor * np.eye(d)


def random_gaussian(rng, d, mean_scale=1.0):
    return GaussianParam(mean_scale * rng.normal(size=d), random_spd(rng, d))


def random_source(fam, rng):
    if isinstance(fam, Poisson):
        return float(rng.uniform(0.1, 20.0))
    if isinstance(fam, UnivariateGaussian):
        return (float(rng.uniform(-3, 3)), float(rng.uniform(0.2, 4.0)))
    if isinstance(fam, Multinomial):
        return rng.dirichlet(np.ones(fam.d))
    if isinstance(fam, MultivariateGaussian):
        return random_gaussian(rng, fam.d)
    raise TypeError(fam)


FAMILIES = [Poisson(), UnivariateGaussian(), Multinomial(3), MultivariateGaussian(2), MultivariateGaussian(3)]


def generator_cases():
    """(generator, sampler) pairs covering every shipped generator."""
    q2 = np.array([[2.0, 0.3], [0.3, 1.0]])
    cases = [
        (QuadraticGenerator(q2), lambda r: CompositeParam(r.normal(size=2))),
        (QuadraticGenerator.identity(3), lambda r: CompositeParam(r.normal(size=3))),
        (ShannonGenerator(), lambda r: CompositeParam(r.uniform(0.1, 5.0, size=3))),
        (ShannonGenerator(extended=True), lambda r: CompositeParam(r.uniform(0.1, 5.0, size=3))),
        (RenyiGenerator(0.5), lambda r: CompositeParam(r.uniform(0.1, 5.0, size=3))),
        (RenyiGenerator(0.3), lambda r: CompositeParam(r.uniform(0.1, 5.0, size=2))),
    ]
    for fam in FAMILIES:
        cases.append((fam.log_normalizer, lambda r, fam=fam: fam.to_natural(random_source(fam, r))))
    return cases


GENERATOR_CASES = generator_cases()
GENERATOR_IDS = [g.name for g, _ in GENERATOR_CASES]


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(acceptance_log.LINES):
            terminalreporter.write_line(acceptance_log.LINES[n])
