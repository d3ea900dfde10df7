"""Finite-dimensional Lie rings given by sparse structure constants."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractViolation, StructuralError, ValidationReport
from .field import GF
from .linalg import Subspace

_BATCH = 4_000_000


class LieRing:
    """Basis b_0..b_{d-1} with [b_i, b_j] = sum_k c_ij^k b_k.

    ``table`` holds raw entries (i, j, k, c) as supplied; only i < j entries
    are needed, an entry (j, i) without its partner is read as the negated
    (i, j) entry.  Inconsistent or diagonal entries are kept so that
    ``validate_lie_ring`` can report them; the bracket uses the i < j entry.
    """

    def __init__(self, gf: GF, dim: int, table: Iterable[tuple[int, int, int, int]] = (),
                 names: Sequence[str] | None = None, generators=None):
        self.gf = gf
        self.dim = int(dim)
        if self.dim < 0:
            raise StructuralError("negative dimension")
        seen = set()
        raw = []
        for entry in table:
            if len(entry) != 4:
                raise StructuralError(f"structure entry {entry!r} is not (i, j, k, c)")
            i, j, k, c = (int(v) for v in entry)
            for name, v in (("i", i), ("j", j), ("k", k)):
                if not 0 <= v < self.dim:
                    raise StructuralError(f"index {name}={v} out of range in entry {entry!r}")
            if not 0 <= c < gf.q:
                raise StructuralError(f"coefficient {c} is not a canonical field code")
            if (i, j, k) in seen:
                raise StructuralError(f"duplicate structure entry ({i}, {j}, {k})")
            seen.add((i, j, k))
            if c:
                raw.append((i, j, k, c))
        self.table = tuple(sorted(raw))
        if names is None:
            names = [f"b{i}" for i in range(self.dim)]
        if len(names) != self.dim:
            raise StructuralError("basis_names length differs from dim")
        self.names = tuple(str(n) for n in names)
        if generators is not None:
            generators = np.asarray(generators, dtype=np.int64)
            generators = generators.reshape(-1, self.dim) if self.dim else generators.reshape(0, 0)
            generators.setflags(write=False)
        self.generators = generators

    # construction helpers ------------------------------------------------
    @classmethod
    def from_brackets(cls, gf: GF, dim: int, brackets: dict, names=None, generators=None):
        """brackets maps (i, j) to {k: c} (c any integer, reduced into the prime field)."""
        table = []
        for (i, j), row in brackets.items():
            for k, c in row.items():
                if isinstance(c, (int, np.integer)):
                    c = int(c) % gf.p
                table.append((i, j, k, c))
        return cls(gf, dim, table, names, generators)

    @classmethod
    def from_dense(cls, gf: GF, C: np.ndarray, names=None, generators=None):
        """From a dense tensor C[i, j, k] (only i < j is read)."""
        d = C.shape[0]
        idx = np.argwhere(np.triu(np.ones((d, d), dtype=bool), 1)[:, :, None] & (C != 0))
        table = [(int(i), int(j), int(k), int(C[i, j, k])) for i, j, k in idx]
        return cls(gf, d, table, names, generators)

    @classmethod
    def abelian(cls, gf: GF, dim: int, names=None):
        return cls(gf, dim, (), names)

    # effective structure ---------------------------------------------------
    @cached_property
    def structure(self) -> dict[tuple[int, int], dict[int, int]]:
        """Effective constants for i < j."""
        eff: dict[tuple[int, int], dict[int, int]] = {}
        lower: dict[tuple[int, int], dict[int, int]] = {}
        for i, j, k, c in self.table:
            if i < j:
                eff.setdefault((i, j), {})[k] = c
            elif i > j:
                lower.setdefault((j, i), {})[k] = c
        for key, row in lower.items():
            if key not in eff:
                eff[key] = {k: int(self.gf.neg(c)) for k, c in row.items()}
        return eff

    @cached_property
    def _arrays(self):
        I, J, K, C = [], [], [], []
        neg = self.gf.neg
        for (i, j), row in self.structure.items():
            for k, c in row.items():
                I += [i, j]
                J += [j, i]
                K += [k, k]
                C += [c, int(neg(c))]
        arrs = tuple(np.array(a, dtype=np.int64) for a in (I, J, K, C))
        return arrs

    @property
    def is_abelian(self) -> bool:
        return not self.structure

    def basis_vector(self, i: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=np.int64)
        v[i] = 1
        return v

    def generator_vectors(self) -> np.ndarray:
        if self.generators is not None:
            return np.asarray(self.generators)
        return np.eye(self.dim, dtype=np.int64)

    def dense(self) -> np.ndarray:
        C = np.zeros((self.dim,) * 3, dtype=np.int64)
        I, J, K, V = self._arrays
        C[I, J, K] = V
        return C

    # brackets -------------------------------------------------------------
    def bracket(self, u, v) -> np.ndarray:
        """Rowwise [u, v]; accepts single vectors or equal-length batches."""
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        single = u.ndim == 1 and v.ndim == 1
        u2 = np.atleast_2d(u)
        v2 = np.atleast_2d(v)
        if u2.shape[1] != self.dim or v2.shape[1] != self.dim:
            raise ContractViolation("vector dimension does not match the ring")
        u2, v2 = np.broadcast_arrays(u2, v2)
        m = u2.shape[0]
        I, J, K, C = self._arrays
        out = np.zeros((m, self.dim), dtype=np.int64)
        if I.size and m:
            gf = self.gf
            step = max(1, _BATCH // I.size)
            for s in range(0, m, step):
                prod = gf.mul(gf.mul(u2[s:s + step, I], v2[s:s + step, J]), C)
                out[s:s + step] = gf.scatter_add(prod, K, self.dim)
        return out[0] if single else out

    def bracket_all(self, U, V) -> np.ndarray:
        """[u, v] for every pair (rows of U) x (rows of V), row-major in U."""
        U = np.atleast_2d(np.asarray(U, dtype=np.int64))
        V = np.atleast_2d(np.asarray(V, dtype=np.int64))
        if U.shape[0] == 0 or V.shape[0] == 0:
            return np.zeros((0, self.dim), dtype=np.int64)
        return self.bracket(np.repeat(U, V.shape[0], axis=0), np.tile(V, (U.shape[0], 1)))

    def ad_right(self, u) -> np.ndarray:
        """Matrix A with x @ A = [x, u]."""
        u = np.asarray(u, dtype=np.int64)
        I, J, K, C = self._arrays
        d = self.dim
        if I.size == 0:
            return np.zeros((d, d), dtype=np.int64)
        vals = self.gf.mul(C, u[J])
        return self.gf.scatter_add(vals[None, :], I * d + K, d * d).reshape(d, d)

    def __repr__(self):
        return f"LieRing(dim={self.dim}, field={self.gf!r}, entries={len(self.table)})"


def direct_sum(*rings: LieRing) -> LieRing:
    if not rings:
        raise ContractViolation("direct sum of no rings")
    gf = rings[0].gf
    table, names, gens = [], [], []
    off = 0
    any_gens = any(R.generators is not None for R in rings)
    total = sum(R.dim for R in rings)
    for t, R in enumerate(rings):
        if R.gf != gf:
            raise ContractViolation("direct summands over different fields")
        for (i, j), row in R.structure.items():
            for k, c in row.items():
                table.append((i + off, j + off, k + off, c))
        names += [f"{n}.{t}" for n in R.names] if len(rings) > 1 else list(R.names)
        if any_gens:
            G = R.generator_vectors()
            block = np.zeros((G.shape[0], total), dtype=np.int64)
            block[:, off:off + R.dim] = G
            gens.append(block)
        off += R.dim
    generators = np.vstack(gens) if any_gens else None
    return LieRing(gf, total, table, names, generators)


# validation ---------------------------------------------------------------
def validate_lie_ring(L: LieRing) -> ValidationReport:
    """All antisymmetry and Jacobi violations of the raw table."""
    rep = ValidationReport()
    gf = L.gf
    nm = L.names
    raw: dict[tuple[int, int], dict[int, int]] = {}
    for i, j, k, c in L.table:
        raw.setdefault((i, j), {})[k] = c
    for (i, j), row in sorted(raw.items()):
        if i == j:
            for k in sorted(row):
                rep.add("antisymmetry", f"[{nm[i]},{nm[i]}] has {nm[k]}-coefficient {row[k]}")
        elif i < j and (j, i) in raw:
            other = raw[(j, i)]
            for k in sorted(set(row) | set(other)):
                if int(gf.add(row.get(k, 0), other.get(k, 0))) != 0:
                    rep.add("antisymmetry", f"({nm[i]},{nm[j]},{nm[k]})")
    for i, j, k in _jacobi_failures(L):
        rep.add("jacobi", f"({nm[i]},{nm[j]},{nm[k]})")
    return rep


def _jacobi_failures(L: LieRing) -> list[tuple[int, int, int]]:
    gf = L.gf
    br: dict[tuple[int, int], dict[int, int]] = {}
    partners: dict[int, set[int]] = {}
    for (i, j), row in L.structure.items():
        br[(i, j)] = row
        br[(j, i)] = {k: int(gf.neg(c)) for k, c in row.items()}
        partners.setdefault(i, set()).add(j)
        partners.setdefault(j, set()).add(i)
    if gf.e == 1:
        p = gf.p

        def mul(a, b):
            return a * b % p

        def add(a, b):
            return (a + b) % p
    else:
        def mul(a, b):
            return int(gf.mul(a, b))

        def add(a, b):
            return int(gf.add(a, b))

    def double(a, b, c):
        out: dict[int, int] = {}
        for l, x in br.get((a, b), {}).items():
            for m, y in br.get((l, c), {}).items():
                out[m] = add(out.get(m, 0), mul(x, y))
        return out

    cands = set()
    for (a, b), row in br.items():
        if a > b:
            continue
        for l in row:
            for c in partners.get(l, ()):
                if c != a and c != b:
                    cands.add(tuple(sorted((a, b, c))))
    bad = []
    for i, j, k in sorted(cands):
        tot: dict[int, int] = {}
        for part in (double(i, j, k), double(j, k, i), double(k, i, j)):
            for m, v in part.items():
                tot[m] = add(tot.get(m, 0), v)
        if any(tot.values()):
            bad.append((i, j, k))
    return bad


def is_lie_ring(L: LieRing) -> bool:
    return validate_lie_ring(L).ok


# evaluation ----------------------------------------------------------------
def bracket_eval(L: LieRing, expr) -> np.ndarray:
    """Evaluate a bracketed word.

    A numpy vector is a leaf; a list or tuple [a1, a2, ..., as] is the
    left-normed commutator [...[[a1, a2], a3], ..., as] of its evaluated items.
    """
    if isinstance(expr, np.ndarray):
        if expr.shape != (L.dim,):
            raise ContractViolation(f"leaf of shape {expr.shape}, expected ({L.dim},)")
        return expr.astype(np.int64)
    if isinstance(expr, (list, tuple)):
        if not expr:
            raise ContractViolation("empty commutator")
        acc = bracket_eval(L, expr[0])
        for item in expr[1:]:
            acc = L.bracket(acc, bracket_eval(L, item))
        return acc
    raise ContractViolation(f"cannot evaluate {type(expr).__name__}")


# series and closures ----------------------------------------------------------
@dataclass(frozen=True)
class LowerCentralSeries:
    terms: tuple[Subspace, ...]
    nilpotent: bool
    nilpotency_class: int | None

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(t.dim for t in self.terms)


def lower_central_series(L: LieRing) -> LowerCentralSeries:
    gf = L.gf
    X = L.generator_vectors()
    cur = Subspace.full(gf, L.dim)
    terms = [cur]
    if cur.dim == 0:
        return LowerCentralSeries(tuple(terms), True, 0)
    while True:
        nxt = Subspace.span(gf, L.bracket_all(cur.basis, X), L.dim)
        if nxt == cur:
            return LowerCentralSeries(tuple(terms + [nxt]), False, None)
        terms.append(nxt)
        if nxt.dim == 0:
            return LowerCentralSeries(tuple(terms), True, len(terms) - 1)
        cur = nxt


def nilpotency_class(L: LieRing) -> int | None:
    return lower_central_series(L).nilpotency_class


def _as_space(L: LieRing, S) -> Subspace:
    if isinstance(S, Subspace):
        return S
    S = np.asarray(list(S) if not isinstance(S, np.ndarray) else S, dtype=np.int64)
    return Subspace.span(L.gf, S.reshape(-1, L.dim), L.dim)


def generated_subring(L: LieRing, S) -> Subspace:
    """Least bracket-closed subspace containing S."""
    span = _as_space(L, S)
    frontier = span.basis
    while frontier.shape[0]:
        new = L.bracket_all(frontier, span.basis)
        grown = span.add_vectors(new)
        if grown.dim == span.dim:
            break
        frontier = _new_directions(span, grown)
        span = grown
    return span


def _new_directions(old: Subspace, new: Subspace) -> np.ndarray:
    rem = old.reduce(new.basis)
    return rem[np.any(rem != 0, axis=1)]


def generated_ideal(L: LieRing, S) -> Subspace:
    """Least ideal containing S."""
    span = _as_space(L, S)
    X = L.generator_vectors()
    frontier = span.basis
    while frontier.shape[0]:
        grown = span.add_vectors(L.bracket_all(frontier, X))
        if grown.dim == span.dim:
            break
        frontier = _new_directions(span, grown)
        span = grown
    return span


@dataclass(frozen=True)
class Quotient:
    ring: LieRing
    ideal: Subspace
    coords: tuple[int, ...]  # ambient coordinates kept as the quotient basis

    def project(self, V) -> np.ndarray:
        R = self.ideal.reduce(V)
        return R[:, list(self.coords)]

    def lift(self, V) -> np.ndarray:
        V = np.atleast_2d(np.asarray(V, dtype=np.int64))
        out = np.zeros((V.shape[0], self.ideal.ambient), dtype=np.int64)
        out[:, list(self.coords)] = V
        return out

    def induced_map(self, M) -> np.ndarray:
        """Matrix on the quotient of an endomorphism preserving the ideal."""
        M = np.asarray(M, dtype=np.int64)
        gf = self.ring.gf
        return self.project(gf.matmul(self.lift(np.eye(len(self.coords), dtype=np.int64)), M))


def quotient(L: LieRing, ideal: Subspace) -> Quotient:
    keep = ideal.complement_coords()
    e = len(keep)
    lifts = np.zeros((e, L.dim), dtype=np.int64)
    lifts[np.arange(e), keep] = 1
    table = []
    if e > 1:
        a, b = np.triu_indices(e, 1)
        vals = ideal.reduce(L.bracket(lifts[a], lifts[b]))[:, keep]
        for t, k in zip(*np.nonzero(vals)):
            table.append((int(a[t]), int(b[t]), int(k), int(vals[t, k])))
    gens = None
    if L.generators is not None:
        G = ideal.reduce(L.generators)[:, keep]
        gens = G[np.any(G != 0, axis=1)]
    Q = LieRing(L.gf, e, table, [L.names[k] for k in keep], gens)
    return Quotient(Q, ideal, tuple(keep))


def generated_ideal_and_quotient(L: LieRing, S) -> tuple[Subspace, LieRing]:
    I = generated_ideal(L, S)
    return I, quotient(L, I).ring


def subring_structure(L: LieRing, S: Subspace) -> LieRing:
    """The Lie ring induced on a bracket-closed subspace, in its echelon basis."""
    k = S.dim
    table = []
    if k > 1:
        a, b = np.triu_indices(k, 1)
        vals = L.bracket(S.basis[a], S.basis[b])
        coords = S.coords(vals)
        for t, c in zip(*np.nonzero(coords)):
            table.append((int(a[t]), int(b[t]), int(c), int(coords[t, c])))
    return LieRing(L.gf, k, table)


def is_bracket_closed(L: LieRing, S: Subspace) -> bool:
    return S.contains(L.bracket_all(S.basis, S.basis))
