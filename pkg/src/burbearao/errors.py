"""Exception hierarchy shared by every module of the package."""


class BurbeaRaoError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(BurbeaRaoError, ValueError):
    """A point lies outside the domain of a generator or a family."""


class ScaleError(BurbeaRaoError, ValueError):
    """Scaled skew divergence requested at a degenerate skew (0 or 1)."""


class WeightError(BurbeaRaoError, ValueError):
    """Weights are negative, all zero, or not normalized."""


class NonFiniteError(BurbeaRaoError, ArithmeticError):
    """A gradient, inverse gradient or update produced inf/nan."""


class InternalConsistencyError(BurbeaRaoError, ArithmeticError):
    """A divergence came out negative beyond round-off slack."""


class SingularSystemError(BurbeaRaoError, ArithmeticError):
    """A linear system is singular under the pivot threshold."""


class NotPDError(BurbeaRaoError, ArithmeticError):
    """A matrix iterate that must be positive-definite is not."""


class DegenerateClusterError(BurbeaRaoError, RuntimeError):
    """A cluster holds too few points to fit a full covariance."""


class EmptyClusterError(BurbeaRaoError, RuntimeError):
    """A cluster stayed empty after the reassignment fallback."""
