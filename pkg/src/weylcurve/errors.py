"""Exception hierarchy shared across the package."""


class WeylcurveError(Exception):
    """Base class for all package errors."""


class ValidationError(WeylcurveError):
    """Bad user input: dimensions, ranks, config schema, domains."""


class ChartError(WeylcurveError):
    """A subspace falls outside the requested coordinate chart."""


class DomainError(WeylcurveError):
    """Evaluation point outside a provider's analyticity domain."""


class NumericalError(WeylcurveError):
    """A numerical procedure failed to meet its contract."""


class DegenerateBCError(WeylcurveError):
    """Boundary condition whose characteristic function vanishes identically.

    Every complex number is an eigenvalue; searches refuse to run.
    """
