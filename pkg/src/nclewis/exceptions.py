"""Exception types raised by nclewis."""


class ShapeError(ValueError):
    """Block shapes do not match the owning algebra."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation (p < 1, non-Hermitian input, ...)."""


class BasisCollapseError(ArithmeticError):
    """The density Gram matrix became numerically singular during a Lewis iteration."""


class OracleCapError(ValueError):
    """The brute-force oracle refuses instances above its size cap."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap.

    The best iterate found so far is kept on ``self.best`` so callers can
    still inspect or report it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
