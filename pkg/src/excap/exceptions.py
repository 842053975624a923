"""Exception hierarchy for excap."""


class ExcapError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ExcapError, ValueError):
    """Malformed input: bad parameters, unknown JSON fields, wrong shapes."""


class DomainError(ValidationError):
    """A point lies outside the domain of a kernel."""


class SingularDiagonal(DomainError):
    """A singular kernel was evaluated on its diagonal."""


class DegeneratePath(ValidationError):
    """A path whose endpoints coincide."""


class NonConvergence(ExcapError):
    """The solver hit its iteration budget.

    The best iterate is kept on ``report`` so callers can still inspect it.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class UncertifiedMeasure(ExcapError):
    """A measure failed the minimal-energy optimality check."""


class NotInRegime(ExcapError):
    """A closed-form regime does not describe the optimal measure."""


class NoSignChange(ExcapError):
    """A root bracket does not contain a sign change."""


class Divergent(ExcapError):
    """An integral that should be finite does not converge."""


class CholeskyFailure(ExcapError):
    """A covariance matrix could not be factorized even with jitter."""


class DegenerateCorrelation(ExcapError):
    """A bivariate normal pair is (numerically) perfectly correlated."""
