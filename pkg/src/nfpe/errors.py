"""Exception hierarchy shared by all solvers."""


class NfpeError(Exception):
    """Base class for every error raised by the package."""


class ParameterError(NfpeError, ValueError):
    """Invalid model parameters, grids or configuration values."""


class DomainError(NfpeError, ValueError):
    """Argument outside the domain of a formula (transform, kernel, time)."""


class NumericalError(NfpeError, RuntimeError):
    """A numerical method failed or lost its accuracy guarantee."""


class CFLError(NumericalError):
    """Explicit time step exceeds the diffusive stability bound."""


class TruncationError(NumericalError):
    """Too much probability mass falls outside the computational grid."""


class TrajectoryEscapeError(NumericalError):
    """The semiclassical trajectory left the admissible region."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class ResolutionError(NumericalError):
    """A stencil or grid is too coarse for the requested estimate."""
