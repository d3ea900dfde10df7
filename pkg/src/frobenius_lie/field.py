"""Arithmetic in F_{p^e} on integer codes.

An element is stored as the integer sum(a_i * p**i) of its coordinates
a_0..a_{e-1} in the power basis 1, x, ..., x^{e-1}.  All operations are
vectorized over numpy int64 arrays of codes.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product

import numpy as np
import sympy

from .errors import ContractViolation

_FLOAT_EXACT = 2**53
MAX_EXT_ORDER = 1 << 20


def _is_irreducible(p: int, coeffs: tuple[int, ...]) -> bool:
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(reversed(coeffs)), x, modulus=p)
    return poly.is_irreducible


def smallest_irreducible(p: int, e: int) -> tuple[int, ...]:
    """Monic irreducible of degree e with the smallest code (low-to-high coefficients)."""
    for low in product(range(p), repeat=e):
        coeffs = tuple(reversed(low)) + (1,)
        if coeffs[0] == 0:
            continue
        if _is_irreducible(p, coeffs):
            return coeffs
    raise ContractViolation(f"no irreducible polynomial of degree {e} over F_{p}")


class GF:
    """The finite field F_{p^e}; instances are immutable and hashable."""

    def __init__(self, p: int, e: int = 1, modulus: tuple[int, ...] | None = None):
        if not sympy.isprime(p):
            raise ContractViolation(f"p = {p} is not prime")
        if p >= 2**31:
            raise ContractViolation("p must be below 2**31")
        if e < 1:
            raise ContractViolation("extension degree must be >= 1")
        self.p = int(p)
        self.e = int(e)
        self.q = self.p**self.e
        if e == 1:
            if modulus is not None and len(modulus) != 2:
                raise ContractViolation("modulus given for a prime field")
            self.modulus = None
        else:
            if self.q > MAX_EXT_ORDER:
                raise ContractViolation(f"extension field of order {self.q} exceeds table cap")
            if modulus is None:
                modulus = smallest_irreducible(p, e)
            modulus = tuple(int(c) % p for c in modulus)
            if len(modulus) != e + 1 or modulus[-1] != 1:
                raise ContractViolation("modulus must be monic of degree e (low-to-high)")
            if not _is_irreducible(p, modulus):
                raise ContractViolation(f"modulus {modulus} is reducible over F_{p}")
            self.modulus = modulus
            self._build_tables()

    # identity -------------------------------------------------------------
    def _key(self):
        return (self.p, self.e, self.modulus)

    def __eq__(self, other):
        return isinstance(other, GF) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        if self.e == 1:
            return f"GF({self.p})"
        return f"GF({self.p}^{self.e}, modulus={self.modulus})"

    # tables for e > 1 -----------------------------------------------------
    def _build_tables(self):
        p, e, q = self.p, self.e, self.q
        codes = np.arange(q, dtype=np.int64)
        digits = np.empty((q, e), dtype=np.int64)
        rest = codes.copy()
        for i in range(e):
            digits[:, i] = rest % p
            rest //= p
        self._digits = digits
        self._weights = p ** np.arange(e, dtype=np.int64)
        # x^d for d < 2e-1 in the power basis, used to fold polynomial products
        red = np.zeros((2 * e - 1, e), dtype=np.int64)
        cur = np.zeros(e, dtype=np.int64)
        cur[0] = 1
        for d in range(2 * e - 1):
            red[d] = cur
            top = cur[-1]
            cur = np.roll(cur, 1)
            cur[0] = 0
            cur = (cur - top * np.array(self.modulus[:e])) % p
        self._red = red
        gen = self._find_generator()
        exp = np.empty(2 * (q - 1), dtype=np.int64)
        log = np.full(q, -1, dtype=np.int64)
        x = 1
        for k in range(q - 1):
            exp[k] = x
            log[x] = k
            x = self._poly_mul_code(x, gen)
        exp[q - 1:] = exp[: q - 1]
        self._exp = exp
        self._log = log
        self.generator = gen

    def _poly_mul_code(self, a: int, b: int) -> int:
        da, db = self._digits[a], self._digits[b]
        prod = np.convolve(da, db) % self.p
        out = (prod @ self._red[: len(prod)]) % self.p
        return int(out @ self._weights)

    def _find_generator(self) -> int:
        q = self.q
        factors = list(sympy.primefactors(q - 1))
        for g in range(2, q):
            ok = True
            for f in factors:
                k, acc, base = (q - 1) // f, 1, g
                while k:
                    if k & 1:
                        acc = self._poly_mul_code(acc, base)
                    base = self._poly_mul_code(base, base)
                    k >>= 1
                if acc == 1:
                    ok = False
                    break
            if ok:
                return g
        return 1  # q == 2 is excluded by e > 1, so unreachable for valid fields

    # conversions ----------------------------------------------------------
    def digits(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if self.e == 1:
            return a[..., None]
        return self._digits[a]

    def from_digits(self, d) -> np.ndarray:
        d = np.asarray(d, dtype=np.int64) % self.p
        if self.e == 1:
            return d[..., 0]
        return d @ self._weights

    def to_coeffs(self, a: int) -> list[int]:
        return [int(v) for v in self.digits(np.int64(a))]

    def from_coeffs(self, coeffs) -> int:
        coeffs = list(coeffs)
        if len(coeffs) != self.e or any(not 0 <= int(c) < self.p for c in coeffs):
            raise ContractViolation(f"scalar {coeffs} is not a canonical element of {self}")
        return int(sum(int(c) * self.p**i for i, c in enumerate(coeffs)))

    def from_int(self, k) -> np.ndarray | int:
        """Image of an integer (or integer array) in the prime subfield."""
        if np.isscalar(k):
            return int(k) % self.p
        return np.asarray(k, dtype=np.int64) % self.p

    def asarray(self, a) -> np.ndarray:
        arr = np.asarray(a, dtype=np.int64)
        if arr.size and (arr.min() < 0 or arr.max() >= self.q):
            raise ContractViolation("array contains non-canonical field codes")
        return arr

    # elementwise arithmetic -------------------------------------------------
    def add(self, a, b):
        if self.e == 1:
            return (np.asarray(a, dtype=np.int64) + b) % self.p
        return self.from_digits(self.digits(a) + self.digits(b))

    def sub(self, a, b):
        if self.e == 1:
            return (np.asarray(a, dtype=np.int64) - b) % self.p
        return self.from_digits(self.digits(a) - self.digits(b))

    def neg(self, a):
        if self.e == 1:
            return (-np.asarray(a, dtype=np.int64)) % self.p
        return self.from_digits(-self.digits(a))

    def mul(self, a, b):
        if self.e == 1:
            return (np.asarray(a, dtype=np.int64) * b) % self.p
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        la, lb = self._log[a], self._log[b]
        out = self._exp[np.maximum(la, 0) + np.maximum(lb, 0)]
        return np.where((la < 0) | (lb < 0), 0, out)

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of zero in a finite field")
        if self.e == 1:
            if self.p <= MAX_EXT_ORDER:
                return self._inv_table[a]
            return np.vectorize(lambda v: pow(int(v), self.p - 2, self.p), otypes=[np.int64])(a)
        return self._exp[(self.q - 1 - self._log[a]) % (self.q - 1)]

    @cached_property
    def _inv_table(self) -> np.ndarray:
        t = np.zeros(self.p, dtype=np.int64)
        t[1:] = [pow(v, self.p - 2, self.p) for v in range(1, self.p)]
        return t

    def power(self, a: int, k: int) -> int:
        a = int(a)
        if k < 0:
            a = int(self.inv(a))
            k = -k
        if self.e == 1:
            return pow(a, k, self.p)
        if a == 0:
            return 1 if k == 0 else 0
        return int(self._exp[(int(self._log[a]) * k) % (self.q - 1)])

    def order(self, a: int) -> int:
        """Multiplicative order of a nonzero element."""
        a = int(a)
        if a == 0:
            raise ContractViolation("zero has no multiplicative order")
        n = self.q - 1
        for d in sorted(sympy.divisors(n)):
            if self.power(a, d) == 1:
                return d
        return n

    def sum(self, a, axis=0):
        if self.e == 1:
            return np.asarray(a, dtype=np.int64).sum(axis=axis) % self.p
        return self.from_digits(self.digits(a).sum(axis=axis))

    # matrices -------------------------------------------------------------
    def _matmul_prime(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        p = self.p
        k = A.shape[-1]
        if k == 0:
            return np.zeros(A.shape[:-1] + B.shape[-1:], dtype=np.int64)
        if k * (p - 1) ** 2 < _FLOAT_EXACT:
            out = A.astype(np.float64) @ B.astype(np.float64)
            return out.astype(np.int64) % p
        step = max(1, (_FLOAT_EXACT - 1) // ((p - 1) ** 2))
        out = np.zeros(A.shape[:-1] + B.shape[-1:], dtype=np.int64)
        for s in range(0, k, step):
            part = A[..., s:s + step].astype(np.float64) @ B[s:s + step].astype(np.float64)
            out = (out + part.astype(np.int64) % p) % p
        return out

    def matmul(self, A, B) -> np.ndarray:
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        if self.e == 1:
            return self._matmul_prime(A, B)
        e = self.e
        Ad, Bd = self.digits(A), self.digits(B)
        conv = [None] * (2 * e - 1)
        for t in range(e):
            for s in range(e):
                part = self._matmul_prime(Ad[..., t], Bd[..., s])
                conv[t + s] = part if conv[t + s] is None else conv[t + s] + part
        acc = np.zeros(conv[0].shape + (e,), dtype=np.int64)
        for d, c in enumerate(conv):
            acc += (c % self.p)[..., None] * self._red[d]
        return self.from_digits(acc)

    def eye(self, d: int) -> np.ndarray:
        return np.eye(d, dtype=np.int64)

    def matpow(self, M, k: int) -> np.ndarray:
        M = np.asarray(M, dtype=np.int64)
        out = self.eye(M.shape[0])
        base = M
        if k < 0:
            from .linalg import inverse
            base = inverse(self, M)
            k = -k
        while k:
            if k & 1:
                out = self.matmul(out, base)
            base = self.matmul(base, base)
            k >>= 1
        return out

    def random(self, rng: np.random.Generator, shape) -> np.ndarray:
        return rng.integers(0, self.q, size=shape, dtype=np.int64)

    def scatter_add(self, values: np.ndarray, index: np.ndarray, size: int) -> np.ndarray:
        """out[..., index[j]] += values[..., j] over the last axis."""
        values = np.asarray(values, dtype=np.int64)
        lead = values.shape[:-1]
        flat = values.reshape(-1, values.shape[-1])
        if self.e == 1:
            out = np.zeros((size, flat.shape[0]), dtype=np.int64)
            np.add.at(out, index, flat.T)
            return (out.T % self.p).reshape(lead + (size,))
        d = self.digits(flat)
        out = np.zeros((size, flat.shape[0], self.e), dtype=np.int64)
        np.add.at(out, index, d.transpose(1, 0, 2))
        return self.from_digits(out.transpose(1, 0, 2)).reshape(lead + (size,))


@dataclass(frozen=True)
class FieldParams:
    """A field together with its canonical primitive n-th root of unity."""

    gf: GF
    n: int
    omega: int

    @property
    def p(self) -> int:
        return self.gf.p

    @property
    def e(self) -> int:
        return self.gf.e

    @property
    def modulus(self):
        return self.gf.modulus

    def __post_init__(self):
        if (self.gf.q - 1) % self.n:
            raise ContractViolation(f"n = {self.n} does not divide |F*| = {self.gf.q - 1}")
        if self.gf.order(self.omega) != self.n:
            raise ContractViolation(f"omega = {self.omega} does not have exact order {self.n}")

    @classmethod
    def create(cls, p: int, n: int, e: int | None = None, modulus=None) -> "FieldParams":
        """Smallest admissible extension (unless e is given) with canonical omega."""
        if e is None:
            e = 1
            while (p**e - 1) % n:
                e += 1
                if p**e > MAX_EXT_ORDER:
                    raise ContractViolation(f"no F_{p}^e containing n-th roots within table cap")
        gf = GF(p, e, modulus)
        return cls(gf, n, canonical_omega(gf, n))


def canonical_omega(gf: GF, n: int) -> int:
    """Smallest code of an element of exact multiplicative order n."""
    if (gf.q - 1) % n:
        raise ContractViolation(f"n = {n} does not divide {gf.q - 1}")
    for a in range(1, gf.q):
        if gf.power(a, n) == 1 and gf.order(a) == n:
            return a
    raise ContractViolation("no element of order n")  # unreachable by cyclicity
