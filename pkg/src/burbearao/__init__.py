"""Burbea-Rao divergences, their centroids, and Bhattacharyya distances on exponential families."""

from .errors import (
    BurbeaRaoError,
    DegenerateClusterError,
    DomainError,
    EmptyClusterError,
    InternalConsistencyError,
    NonFiniteError,
    NotPDError,
    ScaleError,
    SingularSystemError,
    WeightError,
)
from .params import CompositeParam
from .generators import (
    Generator,
    QuadraticGenerator,
    RenyiGenerator,
    ShannonGenerator,
    bregman,
    burbea_rao,
    jeffreys_bregman,
    population_diversity,
    scaled_skew_burbea_rao,
    skew_burbea_rao,
)
from .expfam import (
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
from .solver import (
    SolverConfig,
    SolverReport,
    WeightedSet,
    bregman_left_centroid,
    bregman_right_centroid,
    cccp_step,
    energy,
    quasi_arithmetic_mean,
    skew_orbit,
    solve_centroid,
)
from .gaussian_tailored import bhattacharyya_energy, solve_tailored
from .clustering import (
    MixtureModel,
    compare_solvers,
    fit_mixture,
    hierarchical_simplify,
    kmeans_bhattacharyya,
)

__version__ = "0.1.0"
