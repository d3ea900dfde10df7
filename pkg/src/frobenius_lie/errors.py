"""Exception hierarchy and the violation report shared by all validators."""
from __future__ import annotations

from dataclasses import dataclass, field


class FrobeniusLieError(Exception):
    """Base class for every error raised by this package."""


class StructuralError(FrobeniusLieError):
    """Malformed input data (bad indices, ragged tables, wrong shapes)."""


class ContractViolation(FrobeniusLieError):
    """A documented precondition of an operation does not hold."""


class ResourceLimitError(FrobeniusLieError):
    """A configured cap would be exceeded; carries the offending count."""

    def __init__(self, message: str, requested: int | None = None, cap: int | None = None):
        super().__init__(message)
        self.requested = requested
        self.cap = cap


class KMSInfeasible(FrobeniusLieError):
    """The target-form commutators do not span the input modulo I."""


class UnsupportedInstance(FrobeniusLieError):
    """Instance falls outside the supported class (e.g. mixed-exponent factors)."""


class InstanceFormatError(FrobeniusLieError):
    """Instance file could not be parsed; message carries the JSON path."""


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, detail: str) -> None:
        self.violations.append(Violation(kind, detail))

    def extend(self, other: "ValidationReport") -> None:
        self.violations.extend(other.violations)

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}
