"""Exception hierarchy shared by all modules."""


class HKTError(Exception):
    """Base class for every error raised by the package."""


class SingularEvaluation(HKTError, ArithmeticError):
    """Division by zero or a log/sqrt domain error at the base point."""


class MismatchedJets(HKTError, ValueError):
    """Jets with different base points, dimensions or orders were combined."""


class OrderExhausted(HKTError, ValueError):
    """A derivative was requested from a jet with no orders left."""


class ParseError(HKTError, ValueError):
    """Malformed field expression or configuration text.

    ``line`` and ``column`` are 1-based when known.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class NotPositiveDefinite(HKTError, ValueError):
    """The metric is not positive definite at a sampled point."""


class NotAntisymmetric(HKTError, ValueError):
    pass


class UnknownEntry(HKTError, KeyError):
    """A manifold name is not in the registry."""

    def __str__(self):
        return f"unknown manifold {self.args[0]!r}"


class ClassificationMismatch(HKTError):
    """The sampled geometry does not satisfy a check's precondition."""
