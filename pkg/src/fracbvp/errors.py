"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class FracBVPError(Exception):
    """Base class for all errors raised by :mod:`fracbvp`."""


class DomainError(FracBVPError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ExprSyntaxError(FracBVPError, ValueError):
    """Malformed expression text.

    ``offset`` is the byte offset (UTF-8) of the offending token in the source.
    """

    def __init__(self, message: str, offset: int, source: str = "") -> None:
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset
        self.source = source


class UnknownIdentifier(FracBVPError, ValueError):
    def __init__(self, name: str, offset: int) -> None:
        super().__init__(f"unknown identifier '{name}' (at byte offset {offset})")
        self.name = name
        self.offset = offset


class MissingBinding(FracBVPError, KeyError):
    def __init__(self, name: str) -> None:
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"no value bound to variable '{self.name}'"


class ConvergenceError(FracBVPError, ArithmeticError):
    """An iterative or series evaluation failed to converge."""


class SingularLambda(FracBVPError, ArithmeticError):
    """The boundary determinant vanishes, so the integral equation is not defined."""


class InnerDivergence(ConvergenceError):
    """The pointwise implicit equation ``g = f(t, y, g)`` did not converge."""


class OuterDivergence(ConvergenceError):
    """The global fixed-point iteration diverged.

    ``update_norms`` holds the weighted update norm of every completed iteration.
    """

    def __init__(self, message: str, update_norms: list[float] | None = None) -> None:
        super().__init__(message)
        self.update_norms = list(update_norms or [])


class ConfigError(FracBVPError, ValueError):
    def __init__(self, message: str, line: int | None = None) -> None:
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.line = line
