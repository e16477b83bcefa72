"""Exception hierarchy for the package.

Every error deliberately raised by this package derives from
:class:`RobustScatterError`, so callers can catch one base class.  The CLI
maps data-dependent failures and configuration failures to distinct exit
codes, which is why the two families are kept apart here.
"""


class RobustScatterError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(RobustScatterError, ValueError):
    """An argument is outside its documented domain.

    Raised for bad configuration (invalid alpha, h, rho, subset sizes,
    probabilities outside (0, 1)) rather than for properties of the data.
    """


class SingularMatrix(RobustScatterError):
    """A matrix required to be positive definite is numerically singular.

    Singularity is decided by the Cholesky pivot rule: a pivot below
    1e-12 times the largest diagonal entry.
    """


class SingularSubset(SingularMatrix):
    """A row subset has a singular covariance where a nonsingular one is required."""


class DegenerateData(RobustScatterError):
    """The data admits no valid estimate (e.g. all rows on a hyperplane)."""


class ZeroScale(RobustScatterError):
    """A scale estimate is exactly zero, typically from a constant column."""


class TooFewInliers(RobustScatterError):
    """Too few rows carry positive weight to form a covariance estimate."""


class InstanceTooLarge(RobustScatterError, ValueError):
    """A brute-force routine was asked to enumerate an infeasible instance."""
