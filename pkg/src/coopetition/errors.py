"""Exception types raised across the solver."""


class CoopetitionError(Exception):
    """Base class for all solver errors."""


class ValidationError(CoopetitionError, ValueError):
    """Input violates a documented invariant."""


class DomainError(CoopetitionError, ValueError):
    """A location outside the unit interval was passed to a density or CDF."""


class ConvergenceError(CoopetitionError):
    """Best-response iteration did not settle within the iteration budget."""

    def __init__(self, message, trajectory=None, profile=None):
        super().__init__(message)
        self.trajectory = list(trajectory or [])
        self.profile = profile
