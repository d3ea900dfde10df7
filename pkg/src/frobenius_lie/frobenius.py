"""Metacyclic Frobenius data, FH-actions on Lie rings and the phi-grading."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import gcd

import numpy as np

from .errors import ContractViolation, ValidationReport
from .field import FieldParams
from .lie import LieRing, generated_subring, is_bracket_closed, nilpotency_class, subring_structure
from .linalg import Subspace, inverse, kernel_space


def validate_frobenius_shape(n: int, q: int, r: int) -> tuple[bool, list[str]]:
    """Check (n, q, r); diagnostics name the first violated condition."""
    if n < 2:
        return False, [f"n = {n} < 2"]
    if q < 2:
        return False, [f"q = {q} < 2"]
    if not 1 <= r < n:
        return False, [f"r = {r} not in [1, n-1]"]
    if pow(r, q, n) != 1:
        return False, [f"r^q = {pow(r, q, n)} != 1 mod {n}"]
    for j in range(1, q):
        g = gcd(pow(r, j, n) - 1, n)
        if g != 1:
            return False, [f"gcd({r}^{j} - 1, {n}) = {g}"]
    return True, []


@dataclass(frozen=True)
class FrobeniusShape:
    n: int
    q: int
    r: int

    def __post_init__(self):
        ok, diag = validate_frobenius_shape(self.n, self.q, self.r)
        if not ok:
            raise ContractViolation(f"invalid Frobenius shape {self.astuple()}: {diag[0]}")

    def astuple(self) -> tuple[int, int, int]:
        return (self.n, self.q, self.r)

    def h_index(self, i: int, k: int = 1) -> int:
        """Index of L_i moved by h^k."""
        return (i * pow(self.r, k, self.n)) % self.n

    def orbit(self, i: int) -> tuple[int, ...]:
        return tuple(self.h_index(i, k) for k in range(self.q))


@dataclass(frozen=True, eq=False)
class FrobeniusAction:
    """phi and h acting on the right of row vectors of ``ring``."""

    field: FieldParams
    ring: LieRing
    phi: np.ndarray
    h: np.ndarray
    shape: FrobeniusShape

    def __post_init__(self):
        d = self.ring.dim
        for name in ("phi", "h"):
            M = np.asarray(getattr(self, name), dtype=np.int64)
            if M.shape != (d, d):
                raise ContractViolation(f"{name} has shape {M.shape}, ring has dim {d}")
            M.setflags(write=False)
            object.__setattr__(self, name, M)
        if self.field.gf != self.ring.gf:
            raise ContractViolation("action field differs from the ring's field")
        if self.field.n != self.shape.n:
            raise ContractViolation("omega order differs from n")

    @property
    def gf(self):
        return self.ring.gf

    @cached_property
    def h_inverse(self) -> np.ndarray:
        return inverse(self.gf, self.h)

    def phi_power(self, s: int) -> np.ndarray:
        return self.gf.matpow(self.phi, s % self.shape.n)

    def h_power(self, k: int) -> np.ndarray:
        return self.gf.matpow(self.h, k % self.shape.q)


def _exact_order(gf, M, n) -> int | None:
    """Order of M if it divides n, else None."""
    d = M.shape[0]
    eye = np.eye(d, dtype=np.int64)
    for k in range(1, n + 1):
        if n % k == 0 and np.array_equal(gf.matpow(M, k), eye):
            return k
    return None


def validate_action(A: FrobeniusAction) -> ValidationReport:
    rep = ValidationReport()
    gf = A.gf
    n, q, r = A.shape.astuple()
    if (n * q) % gf.p == 0:
        rep.add("coprimality", f"p = {gf.p} divides n*q = {n * q}")
    ordphi = _exact_order(gf, A.phi, n)
    if ordphi != n:
        rep.add("phi_order", f"phi has order {ordphi if ordphi else 'not dividing n'} != {n}")
    ordh = _exact_order(gf, A.h, q)
    if ordh != q:
        rep.add("h_order", f"h has order {ordh if ordh else 'not dividing q'} != {q}")
    if ordh is not None:
        lhs = gf.matmul(gf.matmul(A.h, A.phi), A.h_inverse)
        if not np.array_equal(lhs, A.phi_power(r)):
            rep.add("relation", f"h phi h^-1 != phi^{r}")
    L = A.ring
    if L.dim > 1:
        a, b = np.triu_indices(L.dim, 1)
        E = np.eye(L.dim, dtype=np.int64)
        br = L.bracket(E[a], E[b])
        for name, M in (("phi", A.phi), ("h", A.h)):
            lhs = gf.matmul(br, M)
            rhs = L.bracket(M[a], M[b])
            bad = np.flatnonzero(np.any(lhs != rhs, axis=1))
            for t in bad[:20]:
                rep.add("automorphism", f"{name} fails on ({L.names[a[t]]},{L.names[b[t]]})")
    return rep


@dataclass(frozen=True, eq=False)
class GradedDecomposition:
    components: tuple[Subspace, ...]
    projections: tuple[np.ndarray, ...]
    n: int

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(c.dim for c in self.components)

    def project(self, x, k: int) -> np.ndarray:
        gf = self.components[0].gf
        return gf.matmul(np.asarray(x, dtype=np.int64), self.projections[k % self.n])

    def component_of(self, x) -> int | None:
        """Index k with x in L_k, or None if x is not homogeneous (0 maps to 0)."""
        x = np.asarray(x, dtype=np.int64)
        if not np.any(x):
            return 0
        for k, C in enumerate(self.components):
            if C.contains(x):
                return k
        return None


@dataclass(frozen=True)
class Homogeneous:
    """A vector tagged with the component index it lies in."""

    index: int
    vector: np.ndarray


def eigen_decompose(A: FrobeniusAction) -> GradedDecomposition:
    gf = A.gf
    n = A.shape.n
    d = A.ring.dim
    powers = [gf.eye(d)]
    for _ in range(1, n):
        powers.append(gf.matmul(powers[-1], A.phi))
    inv_n = int(gf.inv(gf.from_int(n)))
    omega = A.field.omega
    projs, comps = [], []
    for k in range(n):
        acc = np.zeros((d, d), dtype=np.int64)
        for s in range(n):
            coef = gf.mul(inv_n, gf.power(omega, -k * s))
            acc = gf.add(acc, gf.mul(coef, powers[s]))
        acc.setflags(write=False)
        projs.append(acc)
        comps.append(Subspace.span(gf, acc, d))
    return GradedDecomposition(tuple(comps), tuple(projs), n)


@dataclass(frozen=True)
class FixedSubring:
    space: Subspace
    nilpotency_class: int | None
    bracket_closed: bool


def fixed_subring(A: FrobeniusAction, which: str = "H") -> FixedSubring:
    gf = A.gf
    d = A.ring.dim
    eye = gf.eye(d)
    which = which.upper()
    mats = {"F": [A.phi], "H": [A.h], "FH": [A.phi, A.h]}[which]
    space = Subspace.full(gf, d)
    for M in mats:
        space = kernel_space(gf, gf.sub(M, eye), space)
    closed = is_bracket_closed(A.ring, space) and generated_subring(A.ring, space) == space
    cls = nilpotency_class(subring_structure(A.ring, space)) if closed else None
    return FixedSubring(space, cls, closed)


def check_grading_laws(D: GradedDecomposition, A: FrobeniusAction) -> ValidationReport:
    rep = ValidationReport()
    L = A.ring
    n = D.n
    for s in range(n):
        for t in range(s, n):
            Bs, Bt = D.components[s].basis, D.components[t].basis
            if Bs.shape[0] == 0 or Bt.shape[0] == 0:
                continue
            if not D.components[(s + t) % n].contains(L.bracket_all(Bs, Bt)):
                rep.add("grading", f"[L_{s}, L_{t}] not inside L_{(s + t) % n}")
    for i in range(n):
        img = D.components[i].image(A.h)
        target = D.components[A.shape.h_index(i)]
        if img != target:
            rep.add("h_permutation", f"L_{i} h != L_{A.shape.h_index(i)}")
    return rep


def induced_action(A: FrobeniusAction, quotient) -> FrobeniusAction:
    """Action on a quotient by an FH-invariant ideal."""
    Q = quotient.ring
    return FrobeniusAction(A.field, Q, quotient.induced_map(A.phi), quotient.induced_map(A.h), A.shape)
