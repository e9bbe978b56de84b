"""Exception types raised across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class EmptyInputError(ValueError):
    pass


class InsufficientOptionsError(ValueError):
    pass


class CompletenessError(ValueError):
    """A comparator failed to relate some pair of alternatives."""

    def __init__(self, pairs):
        self.pairs = list(pairs)
        shown = ", ".join(f"({a}, {b})" for a, b in self.pairs[:5])
        super().__init__(f"comparator is incomplete on {len(self.pairs)} pair(s): {shown}")


class ShapeError(ValueError):
    pass


class ConfigurationError(ValueError):
    pass


class InsufficientHistoryError(ValueError):
    pass


class EmptyReportError(ValueError):
    pass


class DivergenceError(ArithmeticError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int):
        self.epoch = epoch
        super().__init__(f"training diverged at epoch {epoch}: loss is not finite")


class LoadError(ValueError):
    """A CSV row failed to parse or validate."""

    def __init__(self, row: int | None, field: str | None, message: str):
        self.row = row
        self.field = field
        prefix = f"row {row}: " if row is not None else ""
        super().__init__(prefix + message)
