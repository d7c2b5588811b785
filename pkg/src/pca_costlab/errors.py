"""Exception types raised by pca_costlab."""


class InvalidInputError(ValueError):
    """Raised when an argument violates a documented precondition."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its sweep budget before converging.

    ``residual`` holds the off-diagonal (or superdiagonal) norm left at the
    point the solver gave up.
    """

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class NumericalDegeneracyError(ArithmeticError):
    """The EM noise variance collapsed to (numerically) zero."""


class ParseError(ValueError):
    """Malformed matrix or config file. ``line`` is 1-based."""

    def __init__(self, message, line=None, path=None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(where + message)
        self.line = line
        self.path = path
