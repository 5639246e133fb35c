"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Tensor axes are incompatible with the requested operation."""


class NumericError(ArithmeticError):
    """Non-finite values or a numerically invalid intermediate."""


class DomainError(ValueError):
    """An argument lies outside the operation's domain."""


class ValidationError(ValueError):
    """A run configuration is inconsistent or unrealizable."""


class FitError(ValueError):
    """Too few usable points or a degenerate design matrix."""


class ConvergenceError(RuntimeError):
    """An iterative solver exhausted its budget.

    Carries the best eigenvalue and residual reached so far, so callers can
    decide whether the partial result is usable.
    """

    def __init__(self, message, best_value=None, best_residual=None):
        super().__init__(message)
        self.best_value = best_value
        self.best_residual = best_residual
