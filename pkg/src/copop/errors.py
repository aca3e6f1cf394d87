"""Exception hierarchy shared by all copop modules."""


class CopopError(Exception):
    """Base class for computation failures (CLI exit code 1)."""


class DomainError(CopopError, ValueError):
    """Argument outside the domain of the requested quantity."""


class NotASelfMapError(CopopError, ValueError):
    """The map sends a boundary point outside the closed unit disk."""

    def __init__(self, message, point=None, modulus=None):
        super().__init__(message)
        self.point = point
        self.modulus = modulus


class ConstantMapError(CopopError, ValueError):
    """Counting-dependent operation requested for a constant map."""


class RootFindingError(CopopError, ArithmeticError):
    """Simultaneous iteration and its fallbacks failed to converge."""


class QuadratureError(CopopError, ArithmeticError):
    """Non-finite integrand samples or a refinement loop that did not converge."""

    def __init__(self, message, location=None, achieved=None):
        super().__init__(message)
        self.location = location
        self.achieved = achieved


class InsufficientMomentsError(CopopError, ValueError):
    """The moment table is too short to certify a kernel truncation."""

    def __init__(self, message, required_nmax=None):
        super().__init__(message)
        self.required_nmax = required_nmax


class GeometryError(CopopError, ValueError):
    """Region violates the geometric precondition of a check."""


class ConvergenceError(CopopError, ArithmeticError):
    """An iterative linear-algebra routine exceeded its sweep budget."""


class ConfigError(Exception):
    """Invalid run configuration (CLI exit code 2)."""

    def __init__(self, message, path=None):
        if path:
            message = f"{path}: {message}"
        super().__init__(message)
        self.path = path
