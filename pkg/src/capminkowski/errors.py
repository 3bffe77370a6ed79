"""Exception types shared across the package."""


class CapillaryError(Exception):
    """Base class for every error this package raises on purpose."""


class ParameterError(CapillaryError, ValueError):
    """An argument is outside its admissible range."""


class DomainMismatchError(CapillaryError, ValueError):
    """Two objects that must live on the same grid were built on different grids."""


class BodyInvariantError(CapillaryError, ValueError):
    """A candidate support function violates a convex-body invariant."""


class PositivityError(BodyInvariantError):
    """Support function (or prescription) is not strictly positive."""

    def __init__(self, message, min_value=None, node=None):
        super().__init__(message)
        self.min_value = min_value
        self.node = node


class RobinViolationError(BodyInvariantError):
    """Contact-angle boundary condition fails; carries the measured residual."""

    def __init__(self, message, residual=None, tolerance=None):
        super().__init__(message)
        self.residual = residual
        self.tolerance = tolerance


class ConvexityError(BodyInvariantError):
    """tau[s] is not positive definite; carries the worst node and eigenvalue."""

    def __init__(self, message, node=None, min_eigenvalue=None):
        super().__init__(message)
        self.node = node
        self.min_eigenvalue = min_eigenvalue


class PhiSpecError(CapillaryError, ValueError):
    """Prescription string or table is malformed or invalid."""

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class SolverError(CapillaryError, RuntimeError):
    """The prescribed-curvature solve failed to reach its residual target."""

    def __init__(self, message, last_residual=None):
        super().__init__(message)
        self.last_residual = last_residual


class CurvatureBlowupError(SolverError):
    """Curvature diagnostic left its allowed envelope during the iteration."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history
