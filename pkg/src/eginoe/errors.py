"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class EginoeError(Exception):
    """Base class for library errors."""

    kind = "error"

    def to_dict(self) -> dict:
        return {"error": self.kind, "message": str(self)}


class ConfigurationError(EginoeError, ValueError):
    """Argument outside the supported domain or configured budget."""

    kind = "argument"


class NumericalError(EginoeError, ArithmeticError):
    """An iterative method failed to converge."""

    kind = "numerical"


class ConsistencyError(EginoeError):
    """Two independent evaluation routes disagree beyond tolerance."""

    kind = "consistency"

    def __init__(self, message: str, worst: tuple | None = None, discrepancy: float | None = None):
        super().__init__(message)
        self.worst = worst
        self.discrepancy = discrepancy

    def to_dict(self) -> dict:
        out = super().to_dict()
        out["worst"] = list(self.worst) if self.worst is not None else None
        out["discrepancy"] = self.discrepancy
        return out


class InvariantError(EginoeError):
    """A documented invariant of an input or result does not hold."""

    kind = "invariant"
