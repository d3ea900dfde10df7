"""From a finite group with an FH-action to its associated Lie ring, and the
group-side generalized centralizers A(t) with the induction parameter."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import total_ordering

import numpy as np
import sympy

from .centralizers import LevelLog, _centralizer_level, _realize, enumerate_patterns
from .errors import ContractViolation, ResourceLimitError, UnsupportedInstance
from .field import FieldParams
from .frobenius import FrobeniusAction, eigen_decompose, fixed_subring
from .groups import FiniteGroup, GroupAutomorphismPair, coprime_covering
from .lie import LieRing, nilpotency_class
from .linalg import Subspace, kernel_space


@dataclass(frozen=True, eq=False)
class Factor:
    weight: int
    basis: tuple[int, ...]  # element ids whose images form a basis of gamma_i / gamma_{i+1}
    coords: np.ndarray  # N x d_i prime-field coordinates, -1 off gamma_i


@dataclass(eq=False)
class AssociatedLieRing:
    group: FiniteGroup
    autos: GroupAutomorphismPair
    subgroup: np.ndarray
    p: int
    lcs: list
    factors: list
    ring: LieRing
    action: FrobeniusAction
    checks: dict = field(default_factory=dict)

    @property
    def field(self) -> FieldParams:
        return self.action.field

    @property
    def offsets(self) -> list[int]:
        out, o = [], 0
        for f in self.factors:
            out.append(o)
            o += len(f.basis)
        return out

    @property
    def weight_one_dim(self) -> int:
        return len(self.factors[0].basis) if self.factors else 0

    def image(self, x) -> np.ndarray:
        """Image of x in gamma_1 / gamma_2, as a vector of L(G)."""
        v = np.zeros(self.ring.dim, dtype=np.int64)
        if self.factors:
            d1 = self.weight_one_dim
            c = self.factors[0].coords[int(x)]
            if c[0] < 0:
                raise ContractViolation(f"element {x} is outside the subgroup")
            v[:d1] = c
        return v

    def images(self) -> np.ndarray:
        """Weight-one coordinates of every element of the subgroup (rows; -1 elsewhere)."""
        return self.factors[0].coords if self.factors else np.zeros((self.group.order, 0), dtype=np.int64)

    @property
    def weight_one(self) -> Subspace:
        gf = self.ring.gf
        d1 = self.weight_one_dim
        return Subspace.span(gf, np.eye(self.ring.dim, dtype=np.int64)[:d1], self.ring.dim)


def _factor(G: FiniteGroup, upper: np.ndarray, lower: np.ndarray, p: int, weight: int) -> Factor:
    T = G.table
    el = np.flatnonzero(upper)
    if np.any(~lower[G.power(el, p)]):
        raise UnsupportedInstance(f"gamma_{weight}/gamma_{weight + 1} is not elementary abelian of exponent {p}")
    span = lower.copy()
    basis = []
    for x in el:
        if not span[x]:
            basis.append(int(x))
            span = G.generate(np.append(np.flatnonzero(span), x))
    d = len(basis)
    coords = np.full((G.order, d), -1, dtype=np.int64)
    low = np.flatnonzero(lower)
    for c in itertools.product(range(p), repeat=d):
        rep = G.identity
        for g, k in zip(basis, c):
            rep = T[rep, G.power(g, k)]
        coords[T[rep, low]] = c
    if np.any(coords[el, 0] < 0) if d else False:
        raise UnsupportedInstance(f"gamma_{weight} is not covered by its echelon basis")
    return Factor(weight, tuple(basis), coords)


def lcs_and_associated_lie_ring(G: FiniteGroup, autos: GroupAutomorphismPair,
                                subgroup: np.ndarray | None = None,
                                fp: FieldParams | None = None, samples: int = 200,
                                seed: int = 0) -> AssociatedLieRing:
    """L(B) = sum of gamma_i(B)/gamma_{i+1}(B) over F_p, extended to contain omega."""
    B = G.full() if subgroup is None else np.asarray(subgroup, dtype=bool)
    n = autos.shape.n
    if not np.all(B[autos.phi[B]]) or not np.all(B[autos.h[B]]):
        raise ContractViolation("subgroup is not FH-invariant")
    order = int(B.sum())
    primes = sympy.primefactors(order)
    if len(primes) > 1:
        raise UnsupportedInstance(f"|B| = {order} is not a prime power; L(B) would mix characteristics")
    if primes:
        p = primes[0]
    elif fp is not None:
        p = fp.p
    else:
        raise UnsupportedInstance("trivial group without a field")
    if fp is None:
        fp = FieldParams.create(p, n)
    elif fp.p != p:
        raise ContractViolation("field characteristic differs from the group's prime")
    terms = G.lower_central_series(B)
    if terms[-1].sum() != 1:
        raise UnsupportedInstance("the subgroup is not nilpotent")
    factors = [_factor(G, terms[i], terms[i + 1], p, i + 1) for i in range(len(terms) - 1)]
    offs, o = [], 0
    for f in factors:
        offs.append(o)
        o += len(f.basis)
    d = o
    table = []
    c = len(factors)
    for a, fa in enumerate(factors):
        for b in range(a, c):
            if a + b + 2 > c:
                break
            fb = factors[b]
            tgt = factors[a + b + 1]
            for s, x in enumerate(fa.basis):
                for t, y in enumerate(fb.basis):
                    gi, gj = offs[a] + s, offs[b] + t
                    if gi >= gj:
                        continue
                    coords = tgt.coords[G.comm(x, y)]
                    for k, v in enumerate(coords):
                        if v:
                            table.append((gi, gj, offs[a + b + 1] + k, int(v)))
    names = [f"g{f.weight}_{s}" for f in factors for s in range(len(f.basis))]
    gens = np.eye(d, dtype=np.int64)[: len(factors[0].basis)] if factors else None
    ring = LieRing(fp.gf, d, table, names, gens)

    def induced(perm):
        M = np.zeros((d, d), dtype=np.int64)
        for a, f in enumerate(factors):
            for s, x in enumerate(f.basis):
                M[offs[a] + s, offs[a]:offs[a] + len(f.basis)] = f.coords[perm[x]]
        return M

    action = FrobeniusAction(fp, ring, induced(autos.phi), induced(autos.h), autos.shape)
    R = AssociatedLieRing(G, autos, B, p, terms, factors, ring, action)
    R.checks["bracket_well_defined"] = _check_well_defined(R, samples, seed)
    return R


def _check_well_defined(R: AssociatedLieRing, samples: int, seed: int) -> bool:
    """[x z, y] and [x, y] agree modulo the next term for sampled z in gamma_{i+1}."""
    G = R.group
    rng = np.random.default_rng(seed)
    c = len(R.factors)
    for a in range(c):
        for b in range(c):
            if a + b + 2 > c:
                continue
            lower = np.flatnonzero(R.lcs[a + 1])
            tgt = R.factors[a + b + 1]
            for x in R.factors[a].basis:
                for y in R.factors[b].basis:
                    base = tgt.coords[G.comm(x, y)]
                    zs = rng.choice(lower, size=min(samples, lower.size), replace=False)
                    vals = tgt.coords[G.comm(G.table[x, zs], y)]
                    if not np.all(vals == base):
                        return False
    return True


def phi_terms(R: AssociatedLieRing, x) -> list[np.ndarray]:
    """x_k = (1/n) sum_s omega^(-ks) xbar^(phi^s); the x_k sum to xbar."""
    D = _decomposition(R)
    xb = R.image(x)
    return [D.project(xb, k) for k in range(R.action.shape.n)]


def _decomposition(R: AssociatedLieRing):
    D = getattr(R, "_D", None)
    if D is None:
        D = eigen_decompose(R.action)
        R._D = D
    return D


def fixed_point_count(R: AssociatedLieRing, which: str = "F") -> int:
    """|C_{L}(phi)| (or H, FH) counted over the prime field: p^dim."""
    return R.p ** fixed_subring(R.action, which).space.dim


# group-side theta maps ----------------------------------------------------
@dataclass(frozen=True, eq=False)
class KResult:
    v: tuple[int, ...]
    mask: np.ndarray
    index: int
    n_tuples: int
    checks: dict


def _gamma(G: FiniteGroup, lcs: list, i: int) -> np.ndarray:
    return lcs[i - 1] if i - 1 < len(lcs) else G.trivial()


def _kernel_mask(G: FiniteGroup, autos: GroupAutomorphismPair, lcs: list, v, a) -> np.ndarray:
    n = autos.shape.n
    u = np.arange(G.order)
    xs = [autos.phi_power(ai)[x] for x, ai in zip(v, a)]
    c = G.comm_seq(u, xs)
    prod = np.full(G.order, G.identity, dtype=np.int64)
    for t in range(n):
        prod = G.table[prod, autos.phi_power(t)[c]]
    return _gamma(G, lcs, len(v) + 2)[prod]


def group_theta_and_K(G: FiniteGroup, autos: GroupAutomorphismPair, v, cap: int = 4,
                      R: AssociatedLieRing | None = None, samples: int = 64, seed: int = 0) -> KResult:
    """K(v) = intersection over a in (Z/n)^k of Ker theta_{v,a}, by direct products in G."""
    v = tuple(int(x) for x in v)
    k = len(v)
    if k < 1 or k > cap:
        raise ResourceLimitError(f"tuple length {k} outside 1..{cap}", k, cap)
    n = autos.shape.n
    lcs = G.lower_central_series()
    K = G.full()
    for a in itertools.product(range(n), repeat=k):
        K &= _kernel_mask(G, autos, lcs, v, a)
    m = int(G.centralizer_of_automorphisms([autos.phi]).sum())
    n_tuples = n**k
    index = G.order // int(K.sum())
    checks = {
        "subgroup": G.is_subgroup(K),
        "phi_invariant": bool(np.all(K[autos.phi[K]])),
        "index_bound": index <= m**n_tuples,
    }
    vh = tuple(int(autos.h[x]) for x in v)
    Kh = G.full()
    for a in itertools.product(range(n), repeat=k):
        Kh &= _kernel_mask(G, autos, lcs, vh, a)
    img = np.zeros(G.order, dtype=bool)
    img[autos.h[K]] = True
    checks["h_equivariant"] = bool(np.array_equal(img, Kh))
    if R is not None:
        checks["lie_consequence"] = _lie_consequence(R, K, v, samples, seed)
    return KResult(v, K, index, n_tuples, checks)


def _lie_consequence(R: AssociatedLieRing, K: np.ndarray, v, samples: int, seed: int) -> bool:
    """[u_j, x_i1, ..., z_ik] = 0 for members u and index tuples with zero sum."""
    rng = np.random.default_rng(seed)
    n = R.action.shape.n
    ring = R.ring
    members = np.flatnonzero(K)
    us = rng.choice(members, size=min(samples, members.size), replace=False)
    vterms = [phi_terms(R, x) for x in v]
    k = len(v)
    idx = list(itertools.product(range(n), repeat=k))
    if len(idx) > samples:
        idx = [idx[i] for i in rng.choice(len(idx), size=samples, replace=False)]
    for u in us:
        uterms = phi_terms(R, u)
        for tup in idx:
            j = -sum(tup) % n
            w = uterms[j]
            for x, i in zip(vterms, tup):
                w = ring.bracket(w, x[i])
            if np.any(w):
                return False
    return True


# induction parameter -------------------------------------------------------
@total_ordering
@dataclass(frozen=True)
class InductionParameter:
    m: int
    mbar: tuple[int, ...]
    t: int

    def key(self):
        # mbar is compared inverse-lexicographically: a larger first difference is smaller
        return (self.m, tuple(-x for x in self.mbar), self.t)

    def __lt__(self, other: "InductionParameter") -> bool:
        if len(self.mbar) != len(other.mbar):
            raise ContractViolation("induction parameters with different cap lengths")
        return self.key() < other.key()

    def __eq__(self, other) -> bool:
        return isinstance(other, InductionParameter) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def as_list(self) -> list:
        return [self.m, list(self.mbar), self.t]


def _phi_term_spaces(R: AssociatedLieRing, S: Subspace | None = None) -> dict[int, Subspace]:
    """pi_j of the weight-one part (or of a phi-invariant subspace S of it)."""
    D = _decomposition(R)
    gf = R.ring.gf
    W = R.weight_one if S is None else S
    if gf.e > 1 and W.dim and D.components[0].dim:
        raise UnsupportedInstance("phi-terms over a proper field extension with non-trivial C(phi)")
    out = {}
    for j in range(1, D.n):
        out[j] = W.image(D.projections[j]) if W.dim else Subspace.zero(gf, R.ring.dim)
    return out


def realizable_pairs(R: AssociatedLieRing, cap: int, S: Subspace | None = None, *,
                     max_values: int = 4096, max_tuples: int = 50_000):
    """The set P of (pattern, value) pairs of weight <= cap on phi-terms, as a table."""
    D = _decomposition(R)
    n = D.n
    L0 = D.components[0]
    spaces = _phi_term_spaces(R, S)
    table = {}
    log = LevelLog(0)
    for P in enumerate_patterns(n, cap):
        if L0.dim == 0:
            zero = np.zeros(R.ring.dim, dtype=np.int64)
            found = {np.zeros(0, dtype=np.int64).tobytes(): tuple(zero for _ in P.indices)}
        else:
            found = _realize(R.ring, L0, P, [spaces[i] for i in P.indices],
                             max_values=max_values, max_tuples=max_tuples, log=log)
        for k, vecs in found.items():
            table[(P.indices, k)] = vecs
    return table


def induction_parameter(G: FiniteGroup, autos: GroupAutomorphismPair, cap: int,
                        subgroup: np.ndarray | None = None, fp: FieldParams | None = None,
                        **kw) -> InductionParameter:
    B = G.full() if subgroup is None else subgroup
    R = lcs_and_associated_lie_ring(G, autos, B, fp)
    m = int((G.centralizer_of_automorphisms([autos.phi]) & B).sum())
    mbar = []
    gf = R.ring.gf
    offs = R.offsets
    for j in range(cap):
        if j < len(R.factors):
            o, dj = offs[j], len(R.factors[j].basis)
            blk = R.action.phi[o:o + dj, o:o + dj]
            k = kernel_space(gf, gf.sub(blk, gf.eye(dj))).dim if dj else 0
            mbar.append(R.p**k)
        else:
            mbar.append(1)
    t = len(realizable_pairs(R, cap, **kw))
    return InductionParameter(m, tuple(mbar), t)


# the A-tower ---------------------------------------------------------------
@dataclass(eq=False)
class GroupTower:
    R: AssociatedLieRing
    cap: int
    A: list  # masks A(0) >= A(1) >= ...
    group_reps: list  # per level, sorted element ids (H-closed)
    tables: list  # per level, (pattern indices, value key) -> (ring vectors, group elements)
    params: list  # InductionParameter of A(t)
    param_G: InductionParameter
    checks: dict = field(default_factory=dict)


def _element_for(R: AssociatedLieRing, images: np.ndarray, A: np.ndarray, v: np.ndarray) -> int:
    """Least element of A whose weight-one image is v."""
    d1 = R.weight_one_dim
    if not np.any(v):
        return R.group.identity
    target = v[:d1]
    hit = np.flatnonzero(A & np.all(images == target, axis=1))
    if hit.size == 0:
        raise ContractViolation("no element of the subgroup has the requested image")
    return int(hit[0])


def build_A_tower_and_parameter(G: FiniteGroup, autos: GroupAutomorphismPair, cap: int = 2,
                                levels: int = 1, *, cross_checks: int = 8, seed: int = 0,
                                max_values: int = 4096, max_tuples: int = 50_000) -> GroupTower:
    """Levels A(0) = G >= A(1) >= ... >= A(levels); weight cap ``cap`` stands in for N."""
    R = lcs_and_associated_lie_ring(G, autos)
    D = _decomposition(R)
    ring, gf = R.ring, R.ring.gf
    n, q = autos.shape.n, autos.shape.q
    d = ring.dim
    d1 = R.weight_one_dim
    images = R.images()
    W1 = R.weight_one
    kw = dict(max_values=max_values, max_tuples=max_tuples)
    param_G = induction_parameter(G, autos, cap, fp=R.field, **kw)
    A_masks = [G.full()]
    reps, tables, params = [], [], []
    checks = {"nesting": True, "phi_invariant": True, "h_invariant": True, "subgroup": True,
              "parameter_decrease": True, "K_contains_A": True, "coprime_covering": True}
    for N in R.lcs:
        checks["coprime_covering"] &= coprime_covering(G, autos, N)
    rng = np.random.default_rng(seed)
    for t in range(levels + 1):
        A = A_masks[t]
        S = Subspace.span(gf, np.pad(images[A], ((0, 0), (0, d - d1))), d) if d1 else Subspace.zero(gf, d)
        spaces = _phi_term_spaces(R, S)
        table = {}
        group_set = set()
        L0 = D.components[0]
        for P in enumerate_patterns(n, cap):
            if L0.dim == 0:
                found = {b"": tuple(np.zeros(d, dtype=np.int64) for _ in P.indices)}
            else:
                found = _realize(ring, L0, P, [spaces[i] for i in P.indices], log=LevelLog(t), **kw)
            for k, vecs in found.items():
                els = tuple(_element_for(R, images, A, v) for v in vecs)
                table[(P.indices, k)] = (vecs, els)
                for x in els:
                    for s in range(q):
                        group_set.add(int(autos.h_power(s)[x]))
        group_set.discard(G.identity)
        reps.append(sorted(group_set))
        tables.append(table)
        params.append(induction_parameter(G, autos, cap, A, fp=R.field, **kw))
        if not params[-1] <= param_G:
            checks["parameter_decrease"] = False
        if t == levels:
            break
        # A(t+1): preimage of the common kernel of the ring conditions
        all_reps = sorted(set().union(*map(set, reps)))
        spans = {}
        for i in range(1, n):
            V = np.array([D.project(R.image(x), i) for x in all_reps], dtype=np.int64).reshape(-1, d)
            spans[i] = Subspace.span(gf, V, d)
        if any(S.dim for S in spans.values()):
            V = _centralizer_level(ring, D, spans, cap)
            if gf.e > 1:
                raise UnsupportedInstance("A(t) over a proper field extension with non-trivial C(phi)")
            keep = Subspace.zero(gf, d)
            for j in range(1, n):
                keep = keep + V[j].intersect(W1)
            keep = keep + D.components[0].intersect(W1)
            vecs = np.pad(images, ((0, 0), (0, d - d1)))
            red = keep.reduce(vecs) if d1 else np.zeros((G.order, d), dtype=np.int64)
            A_next = ~np.any(red, axis=1)
        else:
            A_next = G.full()
        A_next &= A
        A_masks.append(A_next)
        checks["subgroup"] &= G.is_subgroup(A_next)
        checks["nesting"] &= bool(np.all(A[A_next]))
        checks["phi_invariant"] &= bool(np.all(A_next[autos.phi[A_next]]))
        checks["h_invariant"] &= bool(np.all(A_next[autos.h[A_next]]))
        # cross-check against the direct group computation on a few tuples
        if all_reps:
            for _ in range(cross_checks):
                k = int(rng.integers(1, min(cap, 2) + 1))
                v = tuple(int(x) for x in rng.choice(all_reps, size=k))
                K = group_theta_and_K(G, autos, v, cap=cap).mask
                if not np.all(K[A_next]):
                    checks["K_contains_A"] = False
    return GroupTower(R, cap, A_masks, reps, tables, params, param_G, checks)


def lie_vs_group_summary(G: FiniteGroup, autos: GroupAutomorphismPair) -> dict:
    """The numbers compared on the Lie and group side of one instance."""
    R = lcs_and_associated_lie_ring(G, autos)
    CG_phi = int(G.centralizer_of_automorphisms([autos.phi]).sum())
    CH = G.centralizer_of_automorphisms([autos.h])
    return {
        "C_L_phi": fixed_point_count(R, "F"),
        "C_G_phi": CG_phi,
        "class_L": nilpotency_class(R.ring),
        "class_G": G.nilpotency_class(),
        "class_C_L_H": fixed_subring(R.action, "H").nilpotency_class,
        "class_C_G_H": G.nilpotency_class(CH),
        "bracket_well_defined": R.checks["bracket_well_defined"],
    }
