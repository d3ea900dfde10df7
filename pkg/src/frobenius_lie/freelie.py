"""Free Lie rings on indexed generators, in the Lyndon-Hall basis.

Computations are organised in blocks: a block is the span of the basis
elements with a fixed generator content (how often each generator occurs).
A block is homogeneous for phi (its index is determined by the content) and
h maps blocks to blocks.  Block coordinates are obtained from word
expansions, which are unitriangular on the Lyndon words.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import product
from math import factorial

import numpy as np
import sympy
from sympy.utilities.iterables import multiset_permutations

from .errors import ContractViolation, ResourceLimitError
from .field import GF
from .frobenius import FrobeniusShape
from .linalg import inverse

DEFAULT_MAX_GENERATORS = 6
DEFAULT_MAX_WEIGHT = 12
DEFAULT_HALL_BUDGET = 250_000


# counting ---------------------------------------------------------------------
def witt_dimension(g: int, w: int) -> int:
    """Dimension of the weight-w part of the free Lie algebra on g generators."""
    return sum(sympy.mobius(d) * g ** (w // d) for d in sympy.divisors(w)) // w


def content_dimension(content) -> int:
    """Number of Lyndon words with the given letter multiplicities."""
    w = sum(content)
    if w == 0:
        return 0
    g = 0
    for c in content:
        g = sympy.gcd(g, c)
    tot = 0
    for d in sympy.divisors(int(g)):
        m = factorial(w // d)
        for c in content:
            m //= factorial(c // d)
        tot += sympy.mobius(d) * m
    return int(tot) // w


# Lyndon words ---------------------------------------------------------------
def is_lyndon(word) -> bool:
    word = tuple(word)
    return len(word) > 0 and all(word < word[i:] for i in range(1, len(word)))


def standard_factorization(word) -> tuple[tuple, tuple]:
    word = tuple(word)
    if len(word) < 2 or not is_lyndon(word):
        raise ContractViolation(f"{word} is not a Lyndon word of length >= 2")
    for i in range(1, len(word)):
        if is_lyndon(word[i:]):
            return word[:i], word[i:]
    raise ContractViolation(f"{word} has no standard factorization")


def lyndon_words(g: int, max_len: int):
    """Duval's generator: Lyndon words over range(g) of length <= max_len, lex order."""
    if g <= 0 or max_len <= 0:
        return
    w = [-1]
    while w:
        w[-1] += 1
        yield tuple(w)
        m = len(w)
        while len(w) < max_len:
            w.append(w[len(w) - m])
        while w and w[-1] == g - 1:
            w.pop()


@lru_cache(maxsize=None)
def lyndon_tree(word: tuple):
    """Bracketing of a Lyndon word: a letter, or a pair (left, right)."""
    if len(word) == 1:
        return word[0]
    u, v = standard_factorization(word)
    return (lyndon_tree(u), lyndon_tree(v))


@lru_cache(maxsize=200_000)
def lyndon_expansion(word: tuple) -> dict:
    """Integer word expansion of the Lyndon bracket of ``word``."""
    if len(word) == 1:
        return {word: 1}
    u, v = standard_factorization(word)
    return bracket_expansions(lyndon_expansion(u), lyndon_expansion(v))


def bracket_expansions(a: dict, b: dict) -> dict:
    out: dict = {}
    for x, cx in a.items():
        for y, cy in b.items():
            out[x + y] = out.get(x + y, 0) + cx * cy
            out[y + x] = out.get(y + x, 0) - cx * cy
    return {k: v for k, v in out.items() if v}


def left_normed_expansion(word) -> dict:
    """Expansion of [w1, w2, ..., ws] (left-normed over letters)."""
    word = tuple(word)
    acc = {word[:1]: 1}
    for a in word[1:]:
        nxt: dict = {}
        for x, c in acc.items():
            nxt[x + (a,)] = nxt.get(x + (a,), 0) + c
            nxt[(a,) + x] = nxt.get((a,) + x, 0) - c
        acc = nxt
    return {k: v for k, v in acc.items() if v}


def tree_str(tree, names) -> str:
    if isinstance(tree, tuple):
        return f"[{tree_str(tree[0], names)},{tree_str(tree[1], names)}]"
    return names[tree]


# generators -----------------------------------------------------------------
@dataclass(frozen=True)
class IndexedGeneratorSet:
    """Orbits of formal generators; generator s*q + k stands for y_{i_s}^{h^k}."""

    shape: FrobeniusShape
    base_indices: tuple[int, ...]

    def __post_init__(self):
        n = self.shape.n
        object.__setattr__(self, "base_indices", tuple(int(i) % n for i in self.base_indices))
        if not self.base_indices:
            raise ContractViolation("at least one orbit is required")
        if any(i == 0 for i in self.base_indices):
            raise ContractViolation("orbit base indices must be nonzero mod n")

    @property
    def q(self) -> int:
        return self.shape.q

    @property
    def orbits(self) -> int:
        return len(self.base_indices)

    @property
    def count(self) -> int:
        return self.orbits * self.q

    def orbit_of(self, g: int) -> int:
        return g // self.q

    def power_of(self, g: int) -> int:
        return g % self.q

    def generator(self, orbit: int, k: int = 0) -> int:
        return orbit * self.q + (k % self.q)

    def index(self, g: int) -> int:
        s, k = divmod(g, self.q)
        return self.shape.h_index(self.base_indices[s], k)

    @cached_property
    def indices(self) -> tuple[int, ...]:
        return tuple(self.index(g) for g in range(self.count))

    @cached_property
    def h_perm(self) -> tuple[int, ...]:
        return tuple(self.generator(g // self.q, g % self.q + 1) for g in range(self.count))

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(f"y{g // self.q}^{g % self.q}" for g in range(self.count))

    def content_index(self, content) -> int:
        return sum(c * i for c, i in zip(content, self.indices)) % self.shape.n

    def orbit_degree(self, content) -> tuple[int, ...]:
        q = self.q
        return tuple(sum(content[s * q:(s + 1) * q]) for s in range(self.orbits))


# Hall basis ---------------------------------------------------------------------
@dataclass(frozen=True)
class HallElement:
    word: tuple[int, ...]
    tree: object
    weight: int
    content: tuple[int, ...]
    index: int


@dataclass(frozen=True)
class FreeLieTruncation:
    gens: IndexedGeneratorSet
    W: int
    hall: tuple[HallElement, ...]
    gf: GF

    @cached_property
    def dims_by_weight(self) -> tuple[int, ...]:
        dims = [0] * self.W
        for h in self.hall:
            dims[h.weight - 1] += 1
        return tuple(dims)

    def by_weight(self, w: int) -> list[HallElement]:
        return [h for h in self.hall if h.weight == w]


def default_prime(n: int, q: int = 1, floor: int = 0) -> int:
    """Smallest prime p = 1 mod n with p > max(floor, n, q)."""
    p = max(floor, n, q) + 1
    while not (sympy.isprime(p) and p % n == 1):
        p += 1
    return p


def build_hall_basis(gens: IndexedGeneratorSet, W: int, gf: GF | None = None, *,
                     max_generators: int = DEFAULT_MAX_GENERATORS,
                     max_weight: int = DEFAULT_MAX_WEIGHT,
                     budget: int = DEFAULT_HALL_BUDGET) -> FreeLieTruncation:
    if W < 1:
        raise ContractViolation("truncation weight must be >= 1")
    g = gens.count
    would_be = sum(witt_dimension(g, w) for w in range(1, W + 1))
    if g > max_generators:
        raise ResourceLimitError(f"{g} generators exceed the cap {max_generators} "
                                 f"(would-be dimension {would_be})", would_be, max_generators)
    if W > max_weight:
        raise ResourceLimitError(f"weight {W} exceeds the cap {max_weight} "
                                 f"(would-be dimension {would_be})", would_be, max_weight)
    if would_be > budget:
        raise ResourceLimitError(f"would-be dimension {would_be} exceeds budget {budget}",
                                 would_be, budget)
    if gf is None:
        gf = GF(default_prime(gens.shape.n, gens.q, W))
    elems = []
    for word in lyndon_words(g, W):
        content = tuple(word.count(a) for a in range(g))
        elems.append(HallElement(word, lyndon_tree(word), len(word), content,
                                 gens.content_index(content)))
    elems.sort(key=lambda h: (h.weight, h.word))
    return FreeLieTruncation(gens, W, tuple(elems), gf)


# blocks -----------------------------------------------------------------------
class Block:
    """Lyndon basis of one generator content, with its word expansions."""

    def __init__(self, gf: GF, content: tuple[int, ...]):
        self.content = content
        letters = [a for a, c in enumerate(content) for _ in range(c)]
        self.words = [tuple(w) for w in multiset_permutations(letters)]
        self.word_index = {w: i for i, w in enumerate(self.words)}
        self.lyndon = [w for w in self.words if is_lyndon(w)]
        self.dim = len(self.lyndon)
        self.cols = [self.word_index[w] for w in self.lyndon]
        P = np.zeros((self.dim, len(self.words)), dtype=np.int64)
        for a, w in enumerate(self.lyndon):
            for x, c in lyndon_expansion(w).items():
                P[a, self.word_index[x]] = c
        self.P = P % gf.p
        self.Pinv = inverse(gf, self.P[:, self.cols]) if self.dim else np.zeros((0, 0), dtype=np.int64)
        self.gf = gf

    def coords(self, wordvecs) -> np.ndarray:
        W = np.atleast_2d(np.asarray(wordvecs, dtype=np.int64))
        if self.dim == 0:
            return np.zeros((W.shape[0], 0), dtype=np.int64)
        return self.gf.matmul(W[:, self.cols], self.Pinv)

    def expansion_vector(self, expansion: dict) -> np.ndarray:
        v = np.zeros(len(self.words), dtype=np.int64)
        for x, c in expansion.items():
            v[self.word_index[x]] = c
        return v % self.gf.p


class FreeLieEngine:
    """Caches blocks and bilinear bracket tensors between blocks."""

    def __init__(self, gf: GF, ngens: int):
        self.gf = gf
        self.ngens = ngens
        self._blocks: dict = {}
        self._tensors: dict = {}

    def block(self, content) -> Block:
        content = tuple(int(c) for c in content)
        b = self._blocks.get(content)
        if b is None:
            b = Block(self.gf, content)
            self._blocks[content] = b
        return b

    def tensor(self, a: tuple, b: tuple) -> np.ndarray:
        """T[i, j, :] = coordinates of [basis_i(a), basis_j(b)] in block a+b."""
        key = (a, b)
        T = self._tensors.get(key)
        if T is not None:
            return T
        A, B = self.block(a), self.block(b)
        cont = tuple(x + y for x, y in zip(a, b))
        C = self.block(cont)
        gf = self.gf
        if A.dim == 0 or B.dim == 0 or C.dim == 0:
            T = np.zeros((A.dim, B.dim, C.dim), dtype=np.int64)
        else:
            na, nb = len(A.words), len(B.words)
            lyn_pos = {C.word_index[w]: t for t, w in enumerate(C.lyndon)}
            S = np.zeros((na * nb, C.dim), dtype=np.int64)
            for i, x in enumerate(A.words):
                for j, y in enumerate(B.words):
                    t = lyn_pos.get(C.word_index[x + y])
                    if t is not None:
                        S[i * nb + j, t] += 1
                    t = lyn_pos.get(C.word_index[y + x])
                    if t is not None:
                        S[i * nb + j, t] -= 1
            S = gf.matmul(S % gf.p, C.Pinv)
            O = np.einsum("ai,bj->abij", A.P, B.P).reshape(A.dim * B.dim, na * nb) % gf.p
            T = gf.matmul(O, S).reshape(A.dim, B.dim, C.dim)
        T.setflags(write=False)
        self._tensors[key] = T
        return T


# spaces of fixed orbit degree ---------------------------------------------------
class Space:
    """Direct sum of the blocks whose orbit degree is D."""

    def __init__(self, D: tuple[int, ...], blocks: list[Block], gens: IndexedGeneratorSet):
        self.D = D
        self.blocks = [b for b in blocks if b.dim]
        self.offsets = {}
        off = 0
        for b in self.blocks:
            self.offsets[b.content] = off
            off += b.dim
        self.dim = off
        idx = np.zeros(self.dim, dtype=np.int64)
        for b in self.blocks:
            o = self.offsets[b.content]
            idx[o:o + b.dim] = gens.content_index(b.content)
        self.index = idx

    def slice(self, content) -> slice:
        o = self.offsets[content]
        return slice(o, o + self._dims[content])

    @cached_property
    def _dims(self):
        return {b.content: b.dim for b in self.blocks}


def _distributions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _distributions(total - first, parts - 1):
            yield (first,) + rest


class GradedFreeLie:
    """The free Lie ring on an IndexedGeneratorSet, organised by orbit degree."""

    def __init__(self, gens: IndexedGeneratorSet, gf: GF, budget: int = 20_000):
        self.gens = gens
        self.gf = gf
        self.engine = FreeLieEngine(gf, gens.count)
        self.budget = budget
        self._spaces: dict = {}
        self._hmats: dict = {}
        self._genmats: dict = {}

    def space(self, D) -> Space:
        D = tuple(int(x) for x in D)
        sp = self._spaces.get(D)
        if sp is not None:
            return sp
        q = self.gens.q
        contents = []
        for parts in product(*[list(_distributions(d, q)) for d in D]):
            contents.append(tuple(x for part in parts for x in part))
        contents.sort(reverse=True)
        dims = sum(content_dimension(c) for c in contents)
        if dims > self.budget:
            raise ResourceLimitError(f"orbit degree {D} has dimension {dims} beyond budget "
                                     f"{self.budget}", dims, self.budget)
        blocks = [self.engine.block(c) for c in contents if content_dimension(c)]
        sp = Space(D, blocks, self.gens)
        self._spaces[D] = sp
        return sp

    def generator_vector(self, g: int) -> tuple[tuple, np.ndarray]:
        D = tuple(1 if s == self.gens.orbit_of(g) else 0 for s in range(self.gens.orbits))
        sp = self.space(D)
        content = tuple(1 if a == g else 0 for a in range(self.gens.count))
        v = np.zeros(sp.dim, dtype=np.int64)
        v[sp.offsets[content]] = 1
        return D, v

    def h_matrix(self, D) -> np.ndarray:
        """Matrix of h on the space of orbit degree D (rows are images)."""
        D = tuple(D)
        M = self._hmats.get(D)
        if M is not None:
            return M
        sp = self.space(D)
        perm = self.gens.h_perm
        M = np.zeros((sp.dim, sp.dim), dtype=np.int64)
        for b in sp.blocks:
            tgt_content = [0] * len(b.content)
            for a, c in enumerate(b.content):
                tgt_content[perm[a]] = c
            tgt = self.engine.block(tuple(tgt_content))
            moved = np.zeros((b.dim, len(tgt.words)), dtype=np.int64)
            for i, w in enumerate(b.words):
                moved[:, tgt.word_index[tuple(perm[a] for a in w)]] = b.P[:, i]
            M[sp.slice(b.content), sp.slice(tgt.content)] = tgt.coords(moved)
        M.setflags(write=False)
        self._hmats[D] = M
        return M

    def bracket_all(self, D1, U, D2, V) -> tuple[tuple, np.ndarray]:
        """All [u, v] (rows of U in degree D1, rows of V in degree D2), row-major in U."""
        gf = self.gf
        D = tuple(a + b for a, b in zip(D1, D2))
        s1, s2, s = self.space(D1), self.space(D2), self.space(D)
        U = np.atleast_2d(np.asarray(U, dtype=np.int64))
        V = np.atleast_2d(np.asarray(V, dtype=np.int64))
        m1, m2 = U.shape[0], V.shape[0]
        out = np.zeros((m1, m2, s.dim), dtype=np.int64)
        if m1 == 0 or m2 == 0 or s.dim == 0:
            return D, out.reshape(m1 * m2, s.dim)
        for a in s1.blocks:
            X = U[:, s1.slice(a.content)]
            if not X.any():
                continue
            for b in s2.blocks:
                Y = V[:, s2.slice(b.content)]
                if not Y.any():
                    continue
                cont = tuple(x + y for x, y in zip(a.content, b.content))
                if cont not in s.offsets:
                    continue
                T = self.engine.tensor(a.content, b.content)
                dc = T.shape[2]
                Z = gf.matmul(X, T.reshape(a.dim, b.dim * dc)).reshape(m1, b.dim, dc)
                R = gf.matmul(Y, Z.transpose(1, 0, 2).reshape(b.dim, m1 * dc))
                R = R.reshape(m2, m1, dc).transpose(1, 0, 2)
                sl = s.slice(cont)
                out[:, :, sl] = gf.add(out[:, :, sl], R)
        return D, out.reshape(m1 * m2, s.dim)

    def generator_matrix(self, D, g: int) -> tuple[tuple, np.ndarray]:
        """R with u @ R = [u, y_g] for u of orbit degree D."""
        key = (tuple(D), g)
        hit = self._genmats.get(key)
        if hit is not None:
            return hit
        Dg, vg = self.generator_vector(g)
        sp = self.space(D)
        Dn, R = self.bracket_all(D, np.eye(sp.dim, dtype=np.int64), Dg, vg)
        R.setflags(write=False)
        self._genmats[key] = (Dn, R)
        return Dn, R

    def word_vector(self, word, expansion: dict | None = None) -> tuple[tuple, np.ndarray]:
        """Coordinates of the left-normed commutator of generator letters."""
        word = tuple(word)
        content = tuple(word.count(a) for a in range(self.gens.count))
        D = self.gens.orbit_degree(content)
        sp = self.space(D)
        v = np.zeros(sp.dim, dtype=np.int64)
        if content in sp.offsets:
            b = self.engine.block(content)
            exp = left_normed_expansion(word) if expansion is None else expansion
            v[sp.slice(content)] = b.coords(b.expansion_vector(exp))[0]
        return D, v

    def index_mask(self, D, k: int) -> np.ndarray:
        return self.space(D).index == (k % self.gens.shape.n)


def orbit_degrees(orbits: int, weight: int):
    """All orbit degrees of the given total weight, in a fixed order."""
    return list(_distributions(weight, orbits))


def sub_degrees(D) -> list[tuple[int, ...]]:
    """Nonzero degrees below D, by increasing weight."""
    out = [t for t in product(*[range(d + 1) for d in D]) if sum(t)]
    out.sort(key=lambda t: (sum(t), t))
    return out


# action tables ------------------------------------------------------------------
@dataclass(frozen=True)
class FHActionTables:
    """phi acts on a Hall element of index i by omega^i; h by a matrix per weight."""

    phi_indices: tuple[tuple[int, ...], ...]
    h_matrices: tuple[np.ndarray, ...]
    gf: GF

    def phi_scalars(self, field) -> tuple[np.ndarray, ...]:
        return tuple(np.array([field.gf.power(field.omega, i) for i in idx], dtype=np.int64)
                     for idx in self.phi_indices)


def apply_fh_action(T: FreeLieTruncation, shape: FrobeniusShape | None = None) -> FHActionTables:
    gens = T.gens
    if shape is not None and shape != gens.shape:
        raise ContractViolation("shape differs from the generator set's shape")
    engine = FreeLieEngine(T.gf, gens.count)
    perm = gens.h_perm
    phis, hs = [], []
    for w in range(1, T.W + 1):
        elems = T.by_weight(w)
        pos = {h.word: t for t, h in enumerate(elems)}
        phis.append(tuple(h.index for h in elems))
        M = np.zeros((len(elems), len(elems)), dtype=np.int64)
        contents = sorted({h.content for h in elems})
        for c in contents:
            b = engine.block(c)
            tgt_c = [0] * len(c)
            for a, x in enumerate(c):
                tgt_c[perm[a]] = x
            tgt = engine.block(tuple(tgt_c))
            moved = np.zeros((b.dim, len(tgt.words)), dtype=np.int64)
            for i, word in enumerate(b.words):
                moved[:, tgt.word_index[tuple(perm[a] for a in word)]] = b.P[:, i]
            coords = tgt.coords(moved)
            rows = [pos[x] for x in b.lyndon]
            cols = [pos[x] for x in tgt.lyndon]
            M[np.ix_(rows, cols)] = coords
        hs.append(M)
    return FHActionTables(tuple(phis), tuple(hs), T.gf)
