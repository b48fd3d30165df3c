# Exceptions defined by delaunaylab


class DelaunayLabError(Exception):
    """Base class for errors raised by the numerical laboratory.

    Attributes:
        message: Human-readable description of the failure.
    """

    def __init__(self, message: str):
        super(DelaunayLabError, self).__init__(message)
        self.message = message


class ParameterRangeError(DelaunayLabError, ValueError):
    """Raised when a parameter (n, eps, rho, ...) is outside its domain."""
    pass


class IntegrationError(DelaunayLabError, ArithmeticError):
    """Exception raised when the initial value integrator gives up.

    Attributes:
        t: Time at which the integrator failed.
    """

    def __init__(self, message: str, t: float):
        self.t = t
        super(IntegrationError, self).__init__(f'{message} (failed at t = {t:.12g})')


class EventNotFoundError(DelaunayLabError):
    """Raised when an event function does not change sign within the horizon."""
    pass


class QuadratureError(DelaunayLabError, ArithmeticError):
    """Raised when adaptive quadrature does not converge within its budget."""
    pass


class PeriodDetectionError(DelaunayLabError):
    """Raised when the return to the Poincare section cannot be located."""
    pass


class OrbitCorruptionError(DelaunayLabError):
    """Raised when an orbit fails a consistency check (energy drift, trace)."""
    pass


class ModeMismatchError(DelaunayLabError):
    """Raised when two fields from different modes or orbits are paired."""
    pass


class IllConditionedFitError(DelaunayLabError):
    """Raised when a linear least-squares fit is numerically singular."""
    pass


class FitConvergenceError(DelaunayLabError):
    """Exception raised when the nonlinear fit does not converge.

    Attributes:
        misfit: Norm of the residual at the last iterate.
    """

    def __init__(self, message: str, misfit: float):
        self.misfit = misfit
        super(FitConvergenceError, self).__init__(f'{message} (misfit {misfit:.3e})')


class DivergentSeriesError(DelaunayLabError, ArithmeticError):
    """Raised when the Fourier-Laplace series does not decay."""
    pass


class OrientationError(DelaunayLabError):
    """Raised when end sections are not consistently oriented."""
    pass


class DegenerateGramError(DelaunayLabError, ArithmeticError):
    """Raised when the Killing form Gram matrix cannot be inverted."""
    pass


class SpectralResolutionError(DelaunayLabError):
    """Raised when a band scan is too coarse to resolve the band pattern."""
    pass
