"""Exception taxonomy for the fermichart package.

Every error raised by the library derives from :class:`FermiChartError`, so
callers (and the CLI) can distinguish library failures from programming
errors.  Numerical failures carry the best value obtained and its a
posteriori error estimate so partial results are never silently discarded.
"""

from __future__ import annotations


class FermiChartError(Exception):
    """Base class for all fermichart errors."""


class InvalidArgumentError(FermiChartError, ValueError):
    """An argument is outside the documented domain of an operation."""


class SingularEvaluationError(FermiChartError):
    """A quantity was requested at a point where it has no finite value.

    Examples: a derivative of the scale factor at t=0 whose one-sided limit
    is infinite, or the partials of t0(tau, rho) on the big-bang boundary.
    """


class NumericalFailureError(FermiChartError):
    """An iterative numerical procedure failed to meet its tolerance.

    Attributes
    ----------
    value : float
        Best value obtained before giving up.
    error_estimate : float
        A posteriori estimate of the error in ``value``.
    """

    def __init__(self, message: str, value: float = float("nan"),
                 error_estimate: float = float("inf")) -> None:
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


class OutOfChartError(FermiChartError):
    """The requested (tau, rho) lies outside the extended chart domain."""


class HypothesisViolationError(FermiChartError):
    """The model does not satisfy the hypotheses the formula requires.

    Raised, for example, when a boundary derivative is requested for a model
    with infinite initial expansion rate, or when a k=-1 angular extension is
    requested at the boundary for a model that admits none.
    """


class DivergenceError(FermiChartError):
    """The requested integral provably diverges for this model."""


class DomainError(FermiChartError, ValueError):
    """A special-function evaluation was requested where it diverges."""


class ConfigError(FermiChartError):
    """The run configuration file or overrides could not be parsed/validated."""
