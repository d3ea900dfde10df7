"""KMS-transformations as certified linear algebra modulo the ideal I."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np
from sympy.utilities.iterables import multiset_permutations

from .errors import ContractViolation, KMSInfeasible, ResourceLimitError
from .field import GF
from .freelie import GradedFreeLie, IndexedGeneratorSet
from .frobenius import FrobeniusAction, eigen_decompose
from .lie import bracket_eval
from .linalg import solve_left
from .universal import IdealWorkspace


def zero_prefixes(indices, n: int) -> list[int]:
    """Lengths l >= 2 of initial segments with index sum 0 mod n."""
    out, s = [], 0
    for l, i in enumerate(indices, start=1):
        s = (s + i) % n
        if l >= 2 and s == 0:
            out.append(l)
    return out


@dataclass(frozen=True)
class Term:
    coef: int
    word: tuple[int, ...]


@dataclass
class KMSResult:
    word: tuple[int, ...]
    degree: tuple[int, ...]
    terms: list[Term]
    unchanged: bool
    checks: dict = field(default_factory=dict)


class KMSSolver:
    """KMS-transformations on one generator set for a fixed centralizer class c."""

    def __init__(self, gens: IndexedGeneratorSet, c: int, gf: GF, budget: int = 20_000,
                 target_budget: int = 50_000):
        if (gens.shape.n * gens.q) % gf.p == 0:
            raise ContractViolation("characteristic divides n*q")
        self.gens = gens
        self.c = c
        self.gf = gf
        self.F = GradedFreeLie(gens, gf, budget=budget)
        self.ws = IdealWorkspace(self.F, c)
        self.target_budget = target_budget

    def indices(self, word) -> list[int]:
        return [self.gens.index(g) for g in word]

    def degree(self, word) -> tuple[int, ...]:
        D = [0] * self.gens.orbits
        for g in word:
            D[self.gens.orbit_of(g)] += 1
        return tuple(D)

    def targets(self, D, cap: int):
        """Words of orbit degree D with a zero-sum initial segment of length <= cap."""
        q, n = self.gens.q, self.gens.shape.n
        orbit_letters = [s for s, d in enumerate(D) for _ in range(d)]
        count = 0
        out = []
        for arrangement in multiset_permutations(orbit_letters):
            for powers in product(range(q), repeat=len(arrangement)):
                word = tuple(s * q + k for s, k in zip(arrangement, powers))
                zp = zero_prefixes(self.indices(word), n)
                if zp and zp[0] <= cap:
                    out.append(word)
                count += 1
                if count > self.target_budget:
                    raise ResourceLimitError(f"target enumeration for {D} exceeds "
                                             f"{self.target_budget}", count, self.target_budget)
        return out

    def transform(self, word, segment_cap: int | None = None, min_weight: int = 2) -> KMSResult:
        word = tuple(int(g) for g in word)
        if len(word) < max(2, min_weight):
            raise ContractViolation(f"input weight {len(word)} is below {max(2, min_weight)}")
        if any(not 0 <= g < self.gens.count for g in word):
            raise ContractViolation("input letter outside the generator set")
        n = self.gens.shape.n
        cap = len(word) if segment_cap is None else segment_cap
        D = self.degree(word)
        zp = zero_prefixes(self.indices(word), n)
        if zp and zp[0] <= cap:
            res = KMSResult(word, D, [Term(1, word)], True)
            res.checks = self.certify(res, cap)
            return res
        gf = self.gf
        I = self.ws.I(D)
        _, b = self.F.word_vector(word)
        rb = I.reduce(b)
        terms: list[Term] = []
        if np.any(rb):
            tw = self.targets(D, cap)
            if not tw:
                raise KMSInfeasible(f"component {D}: no target-form commutators")
            Tm = np.vstack([self.F.word_vector(w)[1] for w in tw])
            keep = I.complement_coords()
            Rt = I.reduce(Tm)[:, keep]
            X = solve_left(gf, Rt, rb[:, keep])
            if X is None:
                raise KMSInfeasible(f"component {D} (weight {sum(D)}): input is not in the span "
                                    f"of target-form commutators modulo I")
            for t in np.flatnonzero(X[0]):
                terms.append(Term(int(X[0, t]), tw[t]))
        res = KMSResult(word, D, terms, False)
        res.checks = self.certify(res, cap)
        if not all(res.checks.values()):
            raise KMSInfeasible(f"component {D}: certification failed {res.checks}")
        return res

    def combination_vector(self, D, terms) -> np.ndarray:
        gf = self.gf
        acc = np.zeros(self.F.space(D).dim, dtype=np.int64)
        for t in terms:
            _, v = self.F.word_vector(t.word)
            acc = gf.add(acc, gf.mul(t.coef, v))
        return acc

    def certify(self, res: KMSResult, cap: int) -> dict:
        """Soundness modulo I, target shape, and per-orbit multiplicities."""
        n = self.gens.shape.n
        _, b = self.F.word_vector(res.word)
        diff = self.gf.sub(b, self.combination_vector(res.degree, res.terms))
        shape_ok = all(bool(zero_prefixes(self.indices(t.word), n))
                       and zero_prefixes(self.indices(t.word), n)[0] <= cap for t in res.terms)
        mult_ok = all(self.degree(t.word) == res.degree and len(t.word) == len(res.word)
                      for t in res.terms)
        return {"sound_mod_I": self.ws.I(res.degree).contains(diff),
                "zero_sum_segment": shape_ok, "multiplicities": mult_ok}


def kms_transform(gens: IndexedGeneratorSet, c: int, word, gf: GF,
                  segment_cap: int | None = None) -> KMSResult:
    return KMSSolver(gens, c, gf).transform(word, segment_cap)


# specialization --------------------------------------------------------------------
def specialize(A: FrobeniusAction, gens: IndexedGeneratorSet, assignment, word) -> np.ndarray:
    """Value of delta([y..]) where delta(y_{i_s}^{h^k}) = x_s h^k."""
    gf = A.gf
    images = {}
    for g in set(word):
        s, k = divmod(g, gens.q)
        images[g] = gf.matmul(np.asarray(assignment[s], dtype=np.int64), A.h_power(k))
    return bracket_eval(A.ring, [images[g] for g in word])


def check_assignment(A: FrobeniusAction, gens: IndexedGeneratorSet, assignment) -> bool:
    D = eigen_decompose(A)
    return all(D.components[i].contains(np.asarray(x)) for i, x in zip(gens.base_indices, assignment))


def specialization_matches(A: FrobeniusAction, gens: IndexedGeneratorSet, assignment,
                           res: KMSResult) -> bool:
    gf = A.gf
    lhs = specialize(A, gens, assignment, res.word)
    rhs = np.zeros_like(lhs)
    for t in res.terms:
        rhs = gf.add(rhs, gf.mul(t.coef, specialize(A, gens, assignment, t.word)))
    return bool(np.array_equal(lhs, rhs))


# iterated transformation ---------------------------------------------------------
# Element trees: an int is a generator; a pair (a, b) is the bracket [a, b].

def tree_index(tree, gens: IndexedGeneratorSet) -> int:
    if isinstance(tree, tuple):
        return (tree_index(tree[0], gens) + tree_index(tree[1], gens)) % gens.shape.n
    return gens.index(tree)


def tree_h(tree, gens: IndexedGeneratorSet, k: int = 1):
    if k % gens.q == 0:
        return tree
    if isinstance(tree, tuple):
        return (tree_h(tree[0], gens, k), tree_h(tree[1], gens, k))
    return gens.generator(gens.orbit_of(tree), gens.power_of(tree) + k)


def fold(elements):
    acc = elements[0]
    for e in elements[1:]:
        acc = (acc, e)
    return acc


def tree_leaves(tree) -> list[int]:
    if isinstance(tree, tuple):
        return tree_leaves(tree[0]) + tree_leaves(tree[1])
    return [tree]


def as_simple(tree):
    """(sign, leaves) if tree equals +-[l1, ..., ls] by antisymmetry at leaf nodes."""
    if not isinstance(tree, tuple):
        return 1, [tree]
    a, b = tree
    if not isinstance(b, tuple):
        left = as_simple(a)
        if left is not None:
            return left[0], left[1] + [b]
    if not isinstance(a, tuple):
        right = as_simple(b)
        if right is not None and len(right[1]) >= 1:
            return -right[0], right[1] + [a]
    return None


def _subtrees(tree):
    yield tree
    if isinstance(tree, tuple):
        yield from _subtrees(tree[0])
        yield from _subtrees(tree[1])


def _chain(tree):
    """Left spine: (head, [args]) with tree = [head, args...]."""
    args = []
    while isinstance(tree, tuple):
        args.append(tree[1])
        tree = tree[0]
    return tree, args[::-1]


def scan_witness(tree, gens: IndexedGeneratorSet, t1: int, t2: int) -> str | None:
    """'f1', 'f2', 'degenerate' (a zero-sum proper subcommutator) or None."""
    n = gens.shape.n
    degenerate = False
    for sub in _subtrees(tree):
        simp = as_simple(sub)
        if simp is not None and len(simp[1]) >= 2:
            zp = zero_prefixes([gens.index(g) for g in simp[1]], n)
            if len(zp) >= t1:
                return "f1"
        head, args = _chain(sub)
        if not isinstance(head, tuple) and args:
            cnt = 0
            for a in args:
                s = as_simple(a)
                if s is not None and len(s[1]) >= 2 and \
                        sum(gens.index(g) for g in s[1]) % n == 0:
                    cnt += 1
                else:
                    break
            if cnt >= t2:
                return "f2"
        if sub is not tree and isinstance(sub, tuple) and tree_index(sub, gens) == 0:
            degenerate = True
    return "degenerate" if degenerate else None


@dataclass
class IteratedKMSResult:
    word: tuple[int, ...]
    terms: list[tuple[int, tuple]]  # (coef, tuple of element trees)
    witnesses: list[str]
    unresolved: list[tuple[int, tuple]]
    steps: int
    step_certificates: int
    checks: dict = field(default_factory=dict)


def iterated_kms(gens: IndexedGeneratorSet, c: int, t1: int, t2: int, word, gf: GF, T: int,
                 max_steps: int = 10_000, verify_budget: int = 2_000) -> IteratedKMSResult:
    """Repeated KMS on initial segments of length T with re-denoting.

    A term [c0, a, rest] whose initial segment c0 has zero index sum is
    rewritten as -[z, rest] with the new element z = [a, c0].
    """
    word = tuple(int(g) for g in word)
    n = gens.shape.n
    if len(word) < T:
        raise ContractViolation(f"weight {len(word)} is below T = {T}")
    gf_p = GF(gf.p)
    solvers: dict = {}
    cache: dict = {}
    certs = 0

    def kms_for(idx: tuple):
        nonlocal certs
        if idx not in cache:
            sub = IndexedGeneratorSet(gens.shape, idx)
            solver = solvers.setdefault(idx, KMSSolver(sub, c, gf_p))
            res = solver.transform(tuple(sub.generator(s, 0) for s in range(len(idx))))
            if all(res.checks.values()):
                certs += 1
            cache[idx] = (sub, res)
        return cache[idx]

    pending = {tuple(word): 1}
    done: dict = {}
    stuck: dict = {}
    steps = 0

    def push(bucket, key, coef):
        v = (bucket.get(key, 0) + coef) % gf.p
        if v:
            bucket[key] = v
        else:
            bucket.pop(key, None)

    while pending:
        steps += 1
        if steps > max_steps:
            raise ResourceLimitError("iterated KMS step budget exhausted", steps, max_steps)
        elems, coef = pending.popitem()
        tree = fold(list(elems))
        if len(elems) > 1 and scan_witness(tree, gens, t1, t2) in ("f1", "f2"):
            push(done, elems, coef)
            continue
        idx = [tree_index(e, gens) for e in elems]
        zp = zero_prefixes(idx, n)
        if zp:
            l = zp[0]
            if l >= len(elems):
                push(stuck, elems, coef)
                continue
            z = (elems[l], fold(list(elems[:l])))
            push(pending, (z,) + tuple(elems[l + 1:]), (-coef) % gf.p)
            continue
        if len(elems) < T:
            push(stuck, elems, coef)
            continue
        sub, res = kms_for(tuple(idx[:T]))
        for t in res.terms:
            new = []
            for g in t.word:
                s, k = divmod(g, sub.q)
                new.append(tree_h(elems[s], gens, k))
            push(pending, tuple(new) + tuple(elems[T:]), (coef * t.coef) % gf.p)
    witnesses = [scan_witness(fold(list(e)), gens, t1, t2) for e in done]
    stuck_w = [scan_witness(fold(list(e)), gens, t1, t2) for e in stuck]
    terms = [(v, k) for k, v in done.items()]
    unresolved = [(v, k) for k, v in stuck.items()]
    out = IteratedKMSResult(word, terms, witnesses + stuck_w, unresolved, steps, certs)
    out.checks = _verify_iterated(gens, c, gf_p, out, verify_budget)
    return out


def tree_vector(F: GradedFreeLie, tree):
    """(degree, coordinates) of an element tree in the graded free Lie ring."""
    if not isinstance(tree, tuple):
        return F.generator_vector(tree)
    D1, u = tree_vector(F, tree[0])
    D2, v = tree_vector(F, tree[1])
    return F.bracket_all(D1, u, D2, v)[0], F.bracket_all(D1, u, D2, v)[1][0]


def _verify_iterated(gens, c, gf, res: IteratedKMSResult, budget: int) -> dict:
    D = [0] * gens.orbits
    for g in res.word:
        D[gens.orbit_of(g)] += 1
    D = tuple(D)
    mult = all(_tree_degree(fold(list(e)), gens) == D for _, e in res.terms + res.unresolved)
    out = {"multiplicities": mult, "all_witnessed": not res.unresolved or
           all(w is not None for w in res.witnesses)}
    try:
        F = GradedFreeLie(gens, gf, budget=budget)
        F.space(D)
    except ResourceLimitError:
        out["sound_mod_I"] = "inconclusive"
        return out
    ws = IdealWorkspace(F, c)
    _, b = F.word_vector(res.word)
    acc = np.zeros_like(b)
    for coef, e in res.terms + res.unresolved:
        _, v = tree_vector(F, fold(list(e)))
        acc = gf.add(acc, gf.mul(coef, v))
    out["sound_mod_I"] = ws.I(D).contains(gf.sub(b, acc))
    return out


def _tree_degree(tree, gens) -> tuple[int, ...]:
    D = [0] * gens.orbits
    for g in tree_leaves(tree):
        D[gens.orbit_of(g)] += 1
    return tuple(D)
