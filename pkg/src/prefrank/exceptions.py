"""Exception hierarchy shared by all modules.

Each class carries an ``exit_code`` used by the command line interface.
"""

from __future__ import annotations


class PrefrankError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1
    module = "prefrank"

    def __str__(self) -> str:
        return f"[{self.module}] {super().__str__()}"


class ParseError(PrefrankError, ValueError):
    """Input file could not be parsed."""

    exit_code = 3
    module = "io"


class ValidationError(PrefrankError, ValueError):
    """Input parsed but violates a data contract."""

    exit_code = 4

    def __init__(self, message: str, *, module: str = "validate") -> None:
        super().__init__(message)
        self.module = module


class IsolatedObjectError(ValidationError):
    """An object without any comparison was passed to a method that needs one."""

    def __init__(self, objects: list[str]) -> None:
        super().__init__(
            "objects without comparisons (degree 0): " + ", ".join(map(str, objects)),
            module="scoring",
        )
        self.objects = list(objects)


class SolverError(PrefrankError, ArithmeticError):
    """The least-squares solver did not reach the residual tolerance."""

    exit_code = 5
    module = "scoring"

    def __init__(self, message: str, residual: float) -> None:
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual
