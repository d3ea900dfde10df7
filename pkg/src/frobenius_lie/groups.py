"""Finite groups given by Cayley tables, their automorphisms and subgroup machinery.

Elements are ids 0..N-1; subgroups are boolean masks of length N.  Automorphisms
are permutations p with p[x] the image of x, acting on the right: x^(ab) = b[a[x]].
Commutators are [a, b] = a^-1 b^-1 a b, left-normed.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import gcd

import numpy as np
import sympy

from .errors import ContractViolation, ResourceLimitError, StructuralError, ValidationReport
from .frobenius import FrobeniusShape

MAX_ORDER = 2000
EXHAUSTIVE_LIMIT = 500


class FiniteGroup:
    def __init__(self, table, cap: int = MAX_ORDER, name: str = ""):
        try:
            T = np.asarray(table, dtype=np.int64)
        except ValueError:
            raise StructuralError("Cayley table is ragged") from None
        if T.ndim != 2 or T.shape[0] != T.shape[1]:
            raise StructuralError(f"Cayley table must be square, got shape {T.shape}")
        N = T.shape[0]
        if N == 0:
            raise StructuralError("empty group")
        if N > cap:
            raise ResourceLimitError(f"group order {N} exceeds the cap {cap}", N, cap)
        if T.min() < 0 or T.max() >= N:
            raise StructuralError("Cayley table entries out of range")
        T.setflags(write=False)
        self.table = T
        self.order = N
        self.name = name

    @cached_property
    def identity(self) -> int:
        T = self.table
        idx = np.arange(self.order)
        for e in range(self.order):
            if np.array_equal(T[e], idx) and np.array_equal(T[:, e], idx):
                return e
        raise StructuralError("table has no identity element")

    @cached_property
    def inverse(self) -> np.ndarray:
        e = self.identity
        inv = np.full(self.order, -1, dtype=np.int64)
        rows, cols = np.nonzero(self.table == e)
        inv[rows] = cols
        if np.any(inv < 0):
            raise StructuralError("some element has no inverse")
        inv.setflags(write=False)
        return inv

    def mul(self, a, b):
        return self.table[a, b]

    def comm(self, a, b):
        T, inv = self.table, self.inverse
        return T[T[T[inv[a], inv[b]], a], b]

    def comm_seq(self, u, xs):
        out = u
        for x in xs:
            out = self.comm(out, x)
        return out

    def power(self, a, k: int):
        out = np.full(np.shape(a), self.identity, dtype=np.int64) if np.ndim(a) else self.identity
        for _ in range(k):
            out = self.table[out, a]
        return out

    def element_orders(self) -> np.ndarray:
        e = self.identity
        cur = np.arange(self.order)
        orders = np.zeros(self.order, dtype=np.int64)
        for k in range(1, self.order + 1):
            hit = (cur == e) & (orders == 0)
            orders[hit] = k
            if np.all(orders):
                break
            cur = self.table[cur, np.arange(self.order)]
        return orders

    # subgroups -------------------------------------------------------------
    def mask(self, elements) -> np.ndarray:
        m = np.zeros(self.order, dtype=bool)
        m[np.asarray(list(elements), dtype=np.int64)] = True
        return m

    def full(self) -> np.ndarray:
        return np.ones(self.order, dtype=bool)

    def trivial(self) -> np.ndarray:
        return self.mask([self.identity])

    def generate(self, gens) -> np.ndarray:
        gens = np.unique(np.asarray(list(gens), dtype=np.int64))
        m = self.trivial()
        if gens.size == 0:
            return m
        frontier = np.array([self.identity])
        while frontier.size:
            new = np.unique(self.table[np.ix_(frontier, gens)].ravel())
            new = new[~m[new]]
            m[new] = True
            frontier = new
        return m

    def is_subgroup(self, m: np.ndarray) -> bool:
        el = np.flatnonzero(m)
        if el.size == 0 or not m[self.identity]:
            return False
        return bool(np.all(m[self.table[np.ix_(el, el)]]))

    def commutator_subgroup(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        a, b = np.flatnonzero(A), np.flatnonzero(B)
        C = self.comm(a[:, None], b[None, :])
        return self.generate(np.unique(C))

    def lower_central_series(self, B: np.ndarray | None = None) -> list[np.ndarray]:
        """gamma_1(B) >= gamma_2(B) >= ... ending at 1 or at the first repeated term."""
        B = self.full() if B is None else B
        terms = [B]
        while True:
            nxt = self.commutator_subgroup(terms[-1], B)
            if nxt.sum() == terms[-1].sum():
                return terms
            terms.append(nxt)
            if nxt.sum() == 1:
                return terms

    def nilpotency_class(self, B: np.ndarray | None = None) -> int | None:
        terms = self.lower_central_series(B)
        if terms[-1].sum() != 1:
            return None
        return len(terms) - 1

    def is_normal(self, B: np.ndarray, within: np.ndarray | None = None) -> bool:
        g = np.flatnonzero(self.full() if within is None else within)
        b = np.flatnonzero(B)
        conj = self.table[self.table[self.inverse[g][:, None], b[None, :]], g[:, None]]
        return bool(np.all(B[conj]))

    def normal_closure(self, S, within: np.ndarray | None = None) -> np.ndarray:
        g = np.flatnonzero(self.full() if within is None else within)
        cur = self.generate(S)
        while True:
            b = np.flatnonzero(cur)
            conj = np.unique(self.table[self.table[self.inverse[g][:, None], b[None, :]], g[:, None]])
            if np.all(cur[conj]):
                return cur
            cur = self.generate(np.concatenate([b, conj]))

    def normalizer(self, B: np.ndarray) -> np.ndarray:
        b = np.flatnonzero(B)
        g = np.arange(self.order)
        conj = self.table[self.table[self.inverse[g][:, None], b[None, :]], g[:, None]]
        return np.all(B[conj], axis=1)

    def conjugate(self, B: np.ndarray, g: int) -> np.ndarray:
        b = np.flatnonzero(B)
        return self.mask(self.table[self.table[self.inverse[g], b], g])

    def product(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        return self.generate(np.concatenate([np.flatnonzero(A), np.flatnonzero(B)]))

    def centralizer_of_automorphisms(self, perms) -> np.ndarray:
        m = self.full()
        for p in perms:
            m &= np.asarray(p) == np.arange(self.order)
        return m

    def sylow(self, p: int) -> np.ndarray:
        """One Sylow p-subgroup, grown inside normalizers."""
        N = self.order
        target = p ** sympy.multiplicity(p, N)
        P = self.trivial()
        orders = self.element_orders()
        while P.sum() < target:
            NP = self.normalizer(P)
            grown = False
            for x in np.flatnonzero(NP & ~P):
                if orders[x] % p:
                    continue
                Q = self.generate(np.append(np.flatnonzero(P), x))
                s = int(Q.sum())
                if _is_power(s, p):
                    P = Q
                    grown = True
                    break
            if not grown:
                raise ContractViolation(f"failed to grow a Sylow {p}-subgroup")
        return P

    def p_core(self, p: int) -> np.ndarray:
        """O_p(G): intersection of all Sylow p-subgroups (the conjugates of one)."""
        if self.order % p:
            return self.trivial()
        P = self.sylow(p)
        core = P.copy()
        for g in range(self.order):
            core &= self.conjugate(P, g)
        return core


def _is_power(s: int, p: int) -> bool:
    while s % p == 0:
        s //= p
    return s == 1


def fitting_subgroup(G: FiniteGroup) -> tuple[np.ndarray, int]:
    """F(G) as the product of the p-cores, with its index."""
    F = G.trivial()
    for p in sympy.primefactors(G.order):
        F = G.product(F, G.p_core(p))
    return F, G.order // int(F.sum())


def check_fitting(G: FiniteGroup, F: np.ndarray) -> ValidationReport:
    """F is nilpotent and normal and contains every nilpotent normal subgroup
    among the normal closures of elements and their pairwise products."""
    rep = ValidationReport()
    if G.nilpotency_class(F) is None:
        rep.add("fitting_nilpotent", "F(G) is not nilpotent")
    if not G.is_normal(F):
        rep.add("fitting_normal", "F(G) is not normal")
    closures = {}
    for x in range(G.order):
        if F[x]:
            continue
        C = G.normal_closure([x])
        closures[C.tobytes()] = C
    lattice = list(closures.values())
    for a in range(len(lattice)):
        for b in range(a, len(lattice)):
            C = lattice[a] if a == b else G.product(lattice[a], lattice[b])
            if G.nilpotency_class(C) is not None and not np.all(F[C]):
                rep.add("fitting_maximal", "a nilpotent normal subgroup is not inside F(G)")
                return rep
    return rep


# automorphisms -------------------------------------------------------------
def _compose(p, q) -> np.ndarray:
    """x^(pq): apply p, then q."""
    return np.asarray(q)[np.asarray(p)]


def _perm_power(p, k: int) -> np.ndarray:
    out = np.arange(len(p))
    for _ in range(k):
        out = _compose(out, p)
    return out


def _perm_inverse(p) -> np.ndarray:
    p = np.asarray(p)
    inv = np.empty_like(p)
    inv[p] = np.arange(len(p))
    return inv


@dataclass(frozen=True, eq=False)
class GroupAutomorphismPair:
    phi: np.ndarray
    h: np.ndarray
    shape: FrobeniusShape

    def __post_init__(self):
        for name in ("phi", "h"):
            a = np.asarray(getattr(self, name), dtype=np.int64)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def phi_power(self, k: int) -> np.ndarray:
        return _perm_power(self.phi, k % self.shape.n)

    def h_power(self, k: int) -> np.ndarray:
        return _perm_power(self.h, k % self.shape.q)


def _check_hom(G: FiniteGroup, p: np.ndarray, rng: np.random.Generator, samples: int = 20_000) -> bool:
    T = G.table
    N = G.order
    if N <= EXHAUSTIVE_LIMIT:
        return bool(np.array_equal(p[T], T[np.ix_(p, p)]))
    a = rng.integers(0, N, samples)
    b = rng.integers(0, N, samples)
    return bool(np.array_equal(p[T[a, b]], T[p[a], p[b]]))


def validate_group(G: FiniteGroup, autos: GroupAutomorphismPair | None = None,
                   seed: int = 0) -> ValidationReport:
    rep = ValidationReport()
    T = G.table
    N = G.order
    try:
        G.identity
        G.inverse
    except StructuralError as exc:
        rep.add("group_axioms", str(exc))
        return rep
    if N <= EXHAUSTIVE_LIMIT:
        left = T[T, :]  # left[a, b, c] = (ab)c
        right = T[:, T]  # right[a, b, c] = a(bc)
        bad = np.argwhere(left != right)
        if bad.size:
            a, b, c = (int(v) for v in bad[0])
            rep.add("associativity", f"({a}*{b})*{c} != {a}*({b}*{c})")
    else:
        rng = np.random.default_rng(seed)
        a, b, c = (rng.integers(0, N, 50_000) for _ in range(3))
        bad = np.flatnonzero(T[T[a, b], c] != T[a, T[b, c]])
        if bad.size:
            k = bad[0]
            rep.add("associativity", f"({a[k]}*{b[k]})*{c[k]} != {a[k]}*({b[k]}*{c[k]})")
    if autos is None:
        return rep
    sh = autos.shape
    if gcd(N, sh.n * sh.q) != 1:
        rep.add("coprimality", f"gcd({N}, {sh.n * sh.q}) = {gcd(N, sh.n * sh.q)}")
    rng = np.random.default_rng(seed)
    ident = np.arange(N)
    for name, p, order in (("phi", autos.phi, sh.n), ("h", autos.h, sh.q)):
        if p.shape != (N,) or not np.array_equal(np.sort(p), ident):
            rep.add("automorphism", f"{name} is not a permutation of the elements")
            continue
        if not _check_hom(G, p, rng):
            rep.add("automorphism", f"{name} is not a homomorphism")
        if not np.array_equal(_perm_power(p, order), ident):
            rep.add(f"{name}_order", f"{name}^{order} != 1")
        elif any(np.array_equal(_perm_power(p, d), ident) for d in sympy.divisors(order)[:-1]):
            rep.add(f"{name}_order", f"{name} has order smaller than {order}")
    if not rep.kinds() & {"automorphism"}:
        lhs = _compose(_compose(autos.h, autos.phi), _perm_inverse(autos.h))
        if not np.array_equal(lhs, autos.phi_power(sh.r)):
            rep.add("relation", f"h phi h^-1 != phi^{sh.r}")
    return rep


def coprime_covering(G: FiniteGroup, autos: GroupAutomorphismPair, Nsub: np.ndarray) -> bool:
    """C_{G/N}(phi) = C_G(phi)N/N for a phi-invariant normal N."""
    phi = autos.phi
    label = np.min(G.table[:, np.flatnonzero(Nsub)], axis=1)  # smallest element of gN
    fixed = {int(v) for v in label[label[phi] == label]}
    image = {int(v) for v in label[phi == np.arange(G.order)]}
    return fixed == image


# instances -----------------------------------------------------------------
def unitriangular3(p: int) -> FiniteGroup:
    """UT(3, p): id a + p b + p^2 c for (a, b, c), (a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')."""
    N = p**3
    ids = np.arange(N)
    a, b, c = ids % p, (ids // p) % p, ids // (p * p)
    A = (a[:, None] + a[None, :]) % p
    B = (b[:, None] + b[None, :]) % p
    C = (c[:, None] + c[None, :] + a[:, None] * b[None, :]) % p
    return FiniteGroup(A + p * B + p * p * C, name=f"UT(3,{p})")


def ut37_autos() -> GroupAutomorphismPair:
    """phi: (a,b,c) -> (2a, 4b, c); h: (a,b,c) -> (-b, -a, ab - c); shape (3, 2, 2)."""
    p = 7
    ids = np.arange(p**3)
    a, b, c = ids % p, (ids // p) % p, ids // (p * p)
    phi = (2 * a) % p + p * ((4 * b) % p) + p * p * c
    h = (-b) % p + p * ((-a) % p) + p * p * ((a * b - c) % p)
    return GroupAutomorphismPair(phi, h, FrobeniusShape(3, 2, 2))


def elementary_abelian(p: int, k: int) -> FiniteGroup:
    N = p**k
    ids = np.arange(N)
    digits = [(ids // p**i) % p for i in range(k)]
    out = np.zeros((N, N), dtype=np.int64)
    for i, d in enumerate(digits):
        out += ((d[:, None] + d[None, :]) % p) * p**i
    return FiniteGroup(out, name=f"C{p}^{k}")


def c7_squared_autos() -> GroupAutomorphismPair:
    """On C7 x C7 = {(a, b)}: phi (a, b) -> (2a, 4b), h swaps the coordinates."""
    ids = np.arange(49)
    a, b = ids % 7, ids // 7
    return GroupAutomorphismPair((2 * a) % 7 + 7 * ((4 * b) % 7), b + 7 * a, FrobeniusShape(3, 2, 2))


def c2_cubed_autos() -> GroupAutomorphismPair:
    """(C2)^3 as the additive group of GF(8): phi multiplies by a primitive
    element, h is a field automorphism; together they realise shape (7, 3, 2)."""
    from .field import GF
    gf = GF(2, 3)
    x = np.arange(8)
    g = gf.generator
    phi = gf.mul(x, g)
    for k in (1, 2):
        h = x.copy()
        for _ in range(k):
            h = gf.mul(h, h)
        autos = GroupAutomorphismPair(phi, h, FrobeniusShape(7, 3, 2))
        lhs = _compose(_compose(autos.h, autos.phi), _perm_inverse(autos.h))
        if np.array_equal(lhs, autos.phi_power(2)):
            return autos
    raise ContractViolation("no field automorphism realises r = 2")  # unreachable for GF(8)


def symmetric_group3() -> FiniteGroup:
    import itertools
    perms = list(itertools.permutations(range(3)))
    index = {p: i for i, p in enumerate(perms)}
    table = [[index[tuple(q[p[k]] for k in range(3))] for q in perms] for p in perms]
    return FiniteGroup(table, name="S3")


def cyclic(N: int) -> FiniteGroup:
    ids = np.arange(N)
    return FiniteGroup((ids[:, None] + ids[None, :]) % N, name=f"C{N}")


def direct_product(G1: FiniteGroup, G2: FiniteGroup) -> FiniteGroup:
    n1, n2 = G1.order, G2.order
    ids = np.arange(n1 * n2)
    a, b = ids % n1, ids // n1
    T = G1.table[np.ix_(a, a)] + n1 * G2.table[np.ix_(b, b)]
    return FiniteGroup(T, name=f"{G1.name}x{G2.name}")


def dihedral(k: int) -> FiniteGroup:
    """Dihedral group of order 2k: r^i s^e with id i + k e."""
    N = 2 * k
    ids = np.arange(N)
    i, e = ids % k, ids // k
    # (r^i s^e)(r^j s^f) = r^(i + (-1)^e j) s^(e+f)
    sign = np.where(e == 1, -1, 1)
    I = (i[:, None] + sign[:, None] * i[None, :]) % k
    E = (e[:, None] + e[None, :]) % 2
    return FiniteGroup(I + k * E, name=f"D{N}")


def quaternion8() -> FiniteGroup:
    # elements +-1, +-i, +-j, +-k as (sign, unit) with units 1, i, j, k = 0..3
    mult = {(0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
            (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
            (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
            (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0)}
    table = np.zeros((8, 8), dtype=np.int64)
    for x in range(8):
        for y in range(8):
            s1, u1 = (1 if x < 4 else -1), x % 4
            s2, u2 = (1 if y < 4 else -1), y % 4
            s, u = mult[(u1, u2)]
            sign = s1 * s2 * s
            table[x, y] = u + (0 if sign == 1 else 4)
    return FiniteGroup(table, name="Q8")
