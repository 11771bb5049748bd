class QpcError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(QpcError, ValueError):
    """Input violates a documented invariant (shape, Hermiticity, PSD, schema...)."""


class SolverError(QpcError):
    """An optimisation did not reach its target accuracy."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution
