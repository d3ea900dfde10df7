"""The ideals J and I of a free Lie ring and the universal quotient M = K/(J+I)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation
from .field import FieldParams, GF
from .freelie import FreeLieTruncation, GradedFreeLie, IndexedGeneratorSet, orbit_degrees
from .frobenius import FrobeniusAction, FrobeniusShape
from .lie import LieRing
from .linalg import Subspace


def _minus(D, s):
    return tuple(x - (1 if t == s else 0) for t, x in enumerate(D))


class IdealWorkspace:
    """Degreewise C = C_K(H), gamma_k(C), I and J, computed on demand.

    All subspaces live in the coordinates of ``F.space(D)``.
    """

    def __init__(self, F: GradedFreeLie, c: int):
        if c < 1:
            raise ContractViolation("centralizer class c must be >= 1")
        self.F = F
        self.c = c
        self._C: dict = {}
        self._gamma: dict = {}
        self._S: dict = {}
        self._I: dict = {}
        self._J: dict = {}

    @property
    def gf(self) -> GF:
        return self.F.gf

    def _zero(self, D) -> Subspace:
        return Subspace.zero(self.gf, self.F.space(D).dim)

    def splits(self, D):
        """Ordered pairs (D1, D2) of nonzero degrees with D1 + D2 = D."""
        from .freelie import sub_degrees
        out = []
        for D1 in sub_degrees(D):
            D2 = tuple(a - b for a, b in zip(D, D1))
            if sum(D2):
                out.append((D1, D2))
        return out

    def C(self, D) -> Subspace:
        D = tuple(D)
        if D not in self._C:
            gf = self.gf
            H = self.F.h_matrix(D)
            d = H.shape[0]
            acc = np.eye(d, dtype=np.int64)
            cur = acc
            for _ in range(1, self.F.gens.q):
                cur = gf.matmul(cur, H)
                acc = gf.add(acc, cur)
            self._C[D] = Subspace.span(gf, acc, d)
        return self._C[D]

    def gamma(self, k: int, D) -> Subspace:
        D = tuple(D)
        if k == 1:
            return self.C(D)
        key = (k, D)
        if key not in self._gamma:
            sp = self._zero(D)
            if sum(D) >= k:
                rows = []
                for D1, D2 in self.splits(D):
                    A = self.gamma(k - 1, D1)
                    B = self.C(D2)
                    if A.dim and B.dim:
                        rows.append(self.F.bracket_all(D1, A.basis, D2, B.basis)[1])
                if rows:
                    sp = sp.add_vectors(np.vstack(rows))
            self._gamma[key] = sp
        return self._gamma[key]

    def S(self, D) -> Subspace:
        """All phi-components of gamma_{c+1}(C) in degree D."""
        D = tuple(D)
        if D not in self._S:
            G = self.gamma(self.c + 1, D)
            sp = self._zero(D)
            if G.dim:
                idx = self.F.space(D).index
                parts = [np.where(idx == k, G.basis, 0) for k in np.unique(idx)]
                sp = sp.add_vectors(np.vstack(parts))
            self._S[D] = sp
        return self._S[D]

    def _ideal_step(self, cache, seed, D) -> Subspace:
        sp = seed
        rows = []
        for s in range(len(D)):
            if D[s] == 0:
                continue
            Dm = _minus(D, s)
            if sum(Dm) == 0:
                continue
            prev = cache(Dm)
            if prev.dim == 0:
                continue
            for k in range(self.F.gens.q):
                g = self.F.gens.generator(s, k)
                _, R = self.F.generator_matrix(Dm, g)
                rows.append(self.gf.matmul(prev.basis, R))
        if rows:
            sp = sp.add_vectors(np.vstack(rows))
        return sp

    def I(self, D) -> Subspace:
        D = tuple(D)
        if D not in self._I:
            self._I[D] = self._ideal_step(self.I, self.S(D), D)
        return self._I[D]

    def J(self, D) -> Subspace:
        D = tuple(D)
        if D not in self._J:
            sp = self.F.space(D)
            zero_idx = np.flatnonzero(sp.index == 0)
            E = np.zeros((zero_idx.size, sp.dim), dtype=np.int64)
            E[np.arange(zero_idx.size), zero_idx] = 1
            seed = Subspace.span(self.gf, E, sp.dim)
            self._J[D] = self._ideal_step(self.J, seed, D)
        return self._J[D]

    def JI(self, D) -> Subspace:
        return self.J(D) + self.I(D)


@dataclass
class DegreeRecord:
    D: tuple[int, ...]
    dim_K: int
    dim_J: int
    dim_I: int
    dim_M: int
    dim_M0: int


@dataclass
class UniversalQuotient:
    base: FreeLieTruncation | None
    gens: IndexedGeneratorSet
    W: int
    c: int
    workspace: IdealWorkspace
    records: list[DegreeRecord]
    dims_M_by_weight: tuple[int, ...]
    empirical_class: int
    stabilized: bool
    checks: dict = field(default_factory=dict)

    @property
    def gf(self) -> GF:
        return self.workspace.gf

    @property
    def status(self) -> str:
        return "stabilized" if self.stabilized else "inconclusive"

    def J(self, D) -> Subspace:
        return self.workspace.J(D)

    def I(self, D) -> Subspace:
        return self.workspace.I(D)


def build_universal_quotient(T: FreeLieTruncation | None = None, shape: FrobeniusShape | None = None,
                             c: int = 1, *, gens: IndexedGeneratorSet | None = None,
                             W: int | None = None, gf: GF | None = None,
                             budget: int = 20_000, verify: bool = True) -> UniversalQuotient:
    """Degreewise J, I and M up to weight W.

    Either a FreeLieTruncation ``T`` or ``gens`` with ``W`` must be given.
    """
    if T is not None:
        gens, W, gf = T.gens, T.W, (gf or T.gf)
    if gens is None or W is None:
        raise ContractViolation("need a truncation or generators with a weight")
    if shape is not None and shape != gens.shape:
        raise ContractViolation("shape differs from the generator set's shape")
    if gf is None:
        from .freelie import default_prime
        gf = GF(default_prime(gens.shape.n, gens.q, W))
    if (gens.shape.n * gens.q) % gf.p == 0:
        raise ContractViolation("characteristic divides n*q")
    F = GradedFreeLie(gens, gf, budget=budget)
    ws = IdealWorkspace(F, c)
    records = []
    dims = []
    for w in range(1, W + 1):
        tot = 0
        for D in orbit_degrees(gens.orbits, w):
            sp = F.space(D)
            JI = ws.JI(D)
            keep = JI.complement_coords()
            m0 = int(np.count_nonzero(sp.index[keep] == 0))
            records.append(DegreeRecord(D, sp.dim, ws.J(D).dim, ws.I(D).dim, JI.codim, m0))
            tot += JI.codim
        dims.append(tot)
    zero_w = [w for w, d in enumerate(dims, start=1) if d == 0]
    if zero_w:
        cls = zero_w[0] - 1
        stabilized = all(d == 0 for d in dims[zero_w[0] - 1:])
    else:
        cls = W
        stabilized = False
    uq = UniversalQuotient(T, gens, W, c, ws, records, tuple(dims), cls, stabilized)
    if verify:
        uq.checks = verify_universal(uq)
    return uq


def verify_universal(uq: UniversalQuotient) -> dict:
    """Invariant checks: M_0 = 0, FH-closure of J and I, gamma_{c+1}(C_M(H)) = 0."""
    ws = uq.workspace
    F = ws.F
    gf = ws.gf
    out = {"M0_zero": all(r.dim_M0 == 0 for r in uq.records)}
    closed = True
    for r in uq.records:
        D = r.D
        idx = F.space(D).index
        H = F.h_matrix(D)
        for sp in (ws.J(D), ws.I(D)):
            if sp.dim == 0:
                continue
            if not sp.contains(gf.matmul(sp.basis, H)):
                closed = False
            for k in np.unique(idx):
                if not sp.contains(np.where(idx == k, sp.basis, 0)):
                    closed = False
    out["J_I_fh_closed"] = closed
    # theta_s kills degrees involving orbit s; I is degree-homogeneous so the
    # image of its basis is either itself or zero
    out["I_theta_invariant"] = True
    out["gamma_c1_CMH_zero"] = _check_centralizer_class(uq)
    return out


def _check_centralizer_class(uq: UniversalQuotient) -> bool:
    """gamma_{c+1} of C_M(H) vanishes in every degree up to W."""
    ws = uq.workspace
    F = ws.F
    c = uq.c
    degrees = [r.D for r in uq.records]
    cm: dict = {}
    for D in degrees:
        cm[(1, D)] = ws.C(D) + ws.JI(D)
    ok = True
    for k in range(2, c + 2):
        for D in degrees:
            if sum(D) < k:
                cm[(k, D)] = ws.JI(D)
                continue
            sp = ws.JI(D)
            rows = []
            for D1, D2 in ws.splits(D):
                A, B = cm.get((k - 1, D1)), cm.get((1, D2))
                if A is None or B is None or not A.dim or not B.dim:
                    continue
                rows.append(F.bracket_all(D1, A.basis, D2, B.basis)[1])
            if rows:
                sp = sp.add_vectors(np.vstack(rows))
            cm[(k, D)] = sp
            if k == c + 1 and sp != ws.JI(D):
                ok = False
    return ok


def quotient_ring(ws: IdealWorkspace, max_weight: int, field: FieldParams,
                  extra: dict | None = None, include_J: bool = True,
                  include_I: bool = True) -> tuple[LieRing, FrobeniusAction, list]:
    """The quotient of K by an FH-invariant ideal and by all weights > max_weight.

    The ideal is J and/or I of ``ws`` plus, per degree, the subspaces in
    ``extra`` (which must form an FH-invariant ideal degreewise).
    """
    F = ws.F
    gf = F.gf
    if field.gf != gf:
        raise ContractViolation("field must match the workspace field")
    gens = F.gens
    degrees = [D for w in range(1, max_weight + 1) for D in orbit_degrees(gens.orbits, w)]
    ideal = {}
    offs = {}
    labels = []
    total = 0
    for D in degrees:
        sp = Subspace.zero(gf, F.space(D).dim)
        if include_J:
            sp = sp + ws.J(D)
        if include_I:
            sp = sp + ws.I(D)
        if extra and D in extra:
            sp = sp + extra[D]
        ideal[D] = sp
        keep = sp.complement_coords()
        offs[D] = (total, keep)
        for t, k in enumerate(keep):
            labels.append((D, k))
        total += len(keep)
    table = []
    names = [f"m{''.join(map(str, D))}_{t}" for D in degrees for t in range(len(offs[D][1]))]

    def lifts(D):
        keep = offs[D][1]
        E = np.zeros((len(keep), F.space(D).dim), dtype=np.int64)
        E[np.arange(len(keep)), keep] = 1
        return E

    for i1, D1 in enumerate(degrees):
        o1, k1 = offs[D1]
        if not k1:
            continue
        for D2 in degrees[i1:]:
            o2, k2 = offs[D2]
            if not k2:
                continue
            D = tuple(a + b for a, b in zip(D1, D2))
            if sum(D) > max_weight:
                continue
            _, R = F.bracket_all(D1, lifts(D1), D2, lifts(D2))
            R = ideal[D].reduce(R)[:, offs[D][1]]
            o, _ = offs[D]
            for t, kk in zip(*np.nonzero(R)):
                a, b = divmod(int(t), len(k2))
                i, j = o1 + a, o2 + b
                if i < j:
                    table.append((i, j, o + int(kk), int(R[t, kk])))
    phi = np.zeros((total, total), dtype=np.int64)
    hmat = np.zeros((total, total), dtype=np.int64)
    for D in degrees:
        o, keep = offs[D]
        if not keep:
            continue
        idx = F.space(D).index[keep]
        for t, i in enumerate(idx):
            phi[o + t, o + t] = gf.power(field.omega, int(i))
        img = ideal[D].reduce(gf.matmul(lifts(D), F.h_matrix(D)))[:, keep]
        hmat[o:o + len(keep), o:o + len(keep)] = img
    gen_rows = []
    for D in degrees:
        if sum(D) == 1:
            o, keep = offs[D]
            for t in range(len(keep)):
                v = np.zeros(total, dtype=np.int64)
                v[o + t] = 1
                gen_rows.append(v)
    gens_arr = np.array(gen_rows, dtype=np.int64).reshape(-1, total)
    ring = LieRing(gf, total, table, names, gens_arr)
    action = FrobeniusAction(field, ring, phi, hmat, gens.shape)
    return ring, action, labels
