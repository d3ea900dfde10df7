"""The bound V(t1, t2, c, q) and the derived parameters T, U, N."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ContractViolation


def bound_V(t1: int, t2: int, f: int) -> int:
    """sum_{i=1}^{t1} ((f+1)^2 t2)^i + 1 (depends on c, q only through f)."""
    if t1 < 0 or t2 < 0 or f < 0:
        raise ContractViolation("V takes non-negative arguments")
    base = (f + 1) ** 2 * t2
    return sum(base**i for i in range(1, t1 + 1)) + 1


@dataclass(frozen=True)
class BoundParams:
    c: int
    q: int
    n: int
    f: int
    U_used: int
    T_used: int

    def __post_init__(self):
        if self.f < 1 or self.c < 1:
            raise ContractViolation("f and c must be positive")
        if self.U_used < 1 or self.T_used < 0:
            raise ContractViolation("caps must be positive")

    @property
    def T(self) -> int:
        return self.f + 1

    @property
    def U(self) -> int:
        return bound_V(self.T, self.T - 1, self.f)

    @property
    def N(self) -> int:
        return bound_V(self.T, 2 * (self.T - 1), self.f)

    def as_dict(self) -> dict:
        return {"c": self.c, "q": self.q, "n": self.n, "f": self.f, "T": self.T,
                "U": self.U, "N": self.N, "U_used": self.U_used, "T_used": self.T_used}
