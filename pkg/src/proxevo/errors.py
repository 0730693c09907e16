"""Exception types shared across the solver modules."""


class SolverError(Exception):
    """Base class for all proxevo errors."""


class NonConvergence(SolverError):
    """An inner iterative scheme exceeded its iteration cap."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ModulusUnavailable(SolverError):
    """A locally Lipschitz coupling was queried without a radius."""


class BallEscape(SolverError):
    """A Picard iterate left the trust ball around the initial state."""


class MaxIterations(SolverError):
    """The Picard loop hit its iteration cap before reaching tolerance."""


class DegenerateInput(SolverError):
    """Input data is unusable for the requested computation."""


class BoundaryMismatch(SolverError):
    """Initial data does not match the prescribed boundary values."""


class ConfigError(SolverError):
    """An experiment configuration is malformed or inconsistent."""


class UnknownSuite(SolverError):
    """The requested verification suite does not exist."""
