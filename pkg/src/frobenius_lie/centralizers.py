"""Graded centralizers of increasing level, fixed representatives and the subring Z."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .bounds import BoundParams
from .errors import ContractViolation, ResourceLimitError, ValidationReport
from .frobenius import FrobeniusAction, GradedDecomposition, Homogeneous
from .lie import generated_subring, nilpotency_class, subring_structure
from .linalg import Subspace, left_kernel, row_space, solve_left


@dataclass(frozen=True)
class Pattern:
    """Index arrangement of a left-normed commutator [*_{i1}, ..., *_{iw}]."""

    indices: tuple[int, ...]
    n: int
    shape: str = "left-normed"

    def __post_init__(self):
        idx = tuple(int(i) % self.n for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if len(idx) < 2:
            raise ContractViolation("a pattern has weight at least 2")
        if any(i == 0 for i in idx):
            raise ContractViolation(f"pattern {idx} has a zero index")
        if sum(idx) % self.n:
            raise ContractViolation(f"pattern {idx} has non-zero index sum")

    @property
    def weight(self) -> int:
        return len(self.indices)

    def h_image(self, r: int, k: int = 1) -> "Pattern":
        m = pow(r, k, self.n)
        return Pattern(tuple(i * m % self.n for i in self.indices), self.n)

    def __str__(self):
        return "[" + ", ".join(f"*{i}" for i in self.indices) + "]"


def enumerate_patterns(n: int, max_weight: int) -> list[Pattern]:
    out = []
    for w in range(2, max_weight + 1):
        for head in itertools.product(range(1, n), repeat=w - 1):
            last = -sum(head) % n
            if last:
                out.append(Pattern(head + (last,), n))
    return out


def _as_homogeneous(D: GradedDecomposition, x) -> Homogeneous:
    if isinstance(x, Homogeneous):
        if not D.components[x.index % D.n].contains(x.vector):
            raise ContractViolation(f"vector is not in L_{x.index % D.n}")
        return Homogeneous(x.index % D.n, np.asarray(x.vector, dtype=np.int64))
    v = np.asarray(x, dtype=np.int64)
    k = D.component_of(v)
    if k is None:
        raise ContractViolation("entry is not phi-homogeneous")
    return Homogeneous(k, v)


@dataclass(frozen=True, eq=False)
class ThetaMap:
    j: int
    indices: tuple[int, ...]
    matrix: np.ndarray  # echelon coordinates of L_j -> echelon coordinates of L_0
    kernel: Subspace

    @property
    def codim(self) -> int:
        return self.matrix.shape[0] - self.kernel.dim


def theta_map(ring, D: GradedDecomposition, xs, j: int | None = None) -> ThetaMap:
    """y -> [y, x_1, ..., x_k] restricted to L_j, with j = -(i_1 + ... + i_k)."""
    xs = [_as_homogeneous(D, x) for x in xs]
    n = D.n
    if not xs:
        raise ContractViolation("theta needs at least one entry")
    for x in xs:
        if x.index == 0:
            raise ContractViolation("theta entries must have non-zero index")
    s = sum(x.index for x in xs) % n
    if s == 0:
        raise ContractViolation("theta entries must have non-zero index sum")
    if j is None:
        j = -s % n
    elif (j + s) % n:
        raise ContractViolation(f"index mismatch: {j} + {s} is not 0 mod {n}")
    gf = ring.gf
    Lj, L0 = D.components[j], D.components[0]
    V = Lj.basis
    for x in xs:
        if V.shape[0] == 0:
            break
        V = ring.bracket(V, x.vector[None, :])
    M = L0.coords(V) if V.shape[0] else np.zeros((0, L0.dim), dtype=np.int64)
    if Lj.dim and L0.dim:
        K = left_kernel(gf, M)
        kern = Subspace.span(gf, gf.matmul(K, Lj.basis), ring.dim) if K.shape[0] else Subspace.zero(gf, ring.dim)
    else:
        kern = Lj
    out = ThetaMap(j, tuple(x.index for x in xs), M, kern)
    assert out.codim <= L0.dim
    return out


def _left_normed(ring, vectors) -> np.ndarray:
    v = np.asarray(vectors[0], dtype=np.int64)
    for x in vectors[1:]:
        v = ring.bracket(v, x)
    return v


def _key(v: np.ndarray) -> bytes:
    return np.ascontiguousarray(v, dtype=np.int64).tobytes()


def _projective_points(d: int, q: int):
    """Coordinate vectors of length d with leading nonzero entry 1, in lex order."""
    for lead in range(d):
        for tail in itertools.product(range(q), repeat=d - lead - 1):
            yield (0,) * lead + (1,) + tail


def _projective_tuples(dims: list[int], q: int):
    if not dims:
        yield ()
        return
    for head in _projective_points(dims[0], q):
        for rest in _projective_tuples(dims[1:], q):
            yield (head,) + rest


def _normalize(gf, v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(v)
    if nz.size == 0:
        return v
    return gf.mul(v, int(gf.inv(int(v[nz[0]]))))


@dataclass(frozen=True, eq=False)
class RepEntry:
    """Fixed representation of one realizable (pattern, value) pair."""

    pattern: Pattern
    value: np.ndarray
    vectors: tuple[np.ndarray, ...]
    orbits: tuple[tuple[np.ndarray, ...], ...]  # H-orbit of each entry, h^0 first


@dataclass
class LevelLog:
    level: int
    patterns: int = 0
    realizable_pairs: int = 0
    tuples_visited: int = 0
    codims: dict = field(default_factory=dict)
    tuple_counts: dict = field(default_factory=dict)


@dataclass(eq=False)
class CentralizerTower:
    action: FrobeniusAction
    decomposition: GradedDecomposition
    params: BoundParams
    levels: list  # levels[t][j] -> Subspace L_j(t), j = 1..n-1
    reps: list  # reps[t][j] -> array of distinct representative vectors of level t
    tables: list  # tables[t][(indices, value key)] -> RepEntry
    logs: list

    @property
    def n(self) -> int:
        return self.decomposition.n

    @property
    def U_used(self) -> int:
        return self.params.U_used

    @property
    def T_used(self) -> int:
        return len(self.levels) - 1

    def level(self, t: int, j: int) -> Subspace:
        return self.levels[t][j % self.n]

    def reps_below(self, t: int, j: int) -> np.ndarray:
        d = self.action.ring.dim
        rows = [self.reps[s][j] for s in range(t) if self.reps[s][j].shape[0]]
        if not rows:
            return np.zeros((0, d), dtype=np.int64)
        return _dedupe(np.vstack(rows))

    def codims(self, t: int) -> dict[int, int]:
        return {j: self.decomposition.components[j].dim - self.levels[t][j].dim for j in range(1, self.n)}


def _dedupe(V: np.ndarray) -> np.ndarray:
    seen, keep = set(), []
    for a, v in enumerate(V):
        k = _key(v)
        if k not in seen and np.any(v):
            seen.add(k)
            keep.append(a)
    return V[keep]


def _value_span(ring, L0: Subspace, spaces: list[Subspace]) -> Subspace:
    gf = ring.gf
    V = spaces[0].basis
    for S in spaces[1:]:
        if V.shape[0] == 0:
            break
        V = ring.bracket_all(V, S.basis)
        if V.shape[0]:
            V, _ = row_space(gf, V, ring.dim)
    if V.shape[0] == 0:
        return Subspace.zero(gf, L0.dim)
    return Subspace.span(gf, L0.coords(V), L0.dim)


def _realize(ring, L0: Subspace, pattern: Pattern, spaces: list[Subspace], *,
             max_values: int, max_tuples: int, log: LevelLog):
    """Canonical representation for every realizable value of ``pattern``.

    The commutator is linear in each slot; the slot of largest dimension (the
    first such) is kept free and the other slots run over projective points in
    lex order of echelon coordinates.  The first tuple whose image contains c
    wins, and the free entry is the solution reduced modulo the kernel, which
    is the lex-least one.
    """
    gf = ring.gf
    d = ring.dim
    zero_rep = tuple(np.zeros(d, dtype=np.int64) for _ in spaces)
    found = {_key(np.zeros(L0.dim, dtype=np.int64)): zero_rep}
    span = _value_span(ring, L0, spaces)
    if span.dim == 0:
        return found
    total = gf.q ** span.dim
    if total > max_values:
        raise ResourceLimitError(f"pattern {pattern}: {total} candidate values exceed the value cap",
                                 total, max_values)
    dims_all = [S.dim for S in spaces]
    free = dims_all.index(max(dims_all))
    Sf = spaces[free]
    others = [a for a in range(len(spaces)) if a != free]
    dims = [dims_all[a] for a in others]
    n_tuples = 1
    for k in dims:
        n_tuples *= (gf.q**k - 1) // (gf.q - 1)
    visited = 0
    for coords in _projective_tuples(dims, gf.q):
        visited += 1
        if visited > max_tuples:
            raise ResourceLimitError(
                f"pattern {pattern}: projective tuple enumeration exceeds the cap", n_tuples, max_tuples)
        fixed = {a: gf.matmul(np.array([c], dtype=np.int64), spaces[a].basis)[0] for a, c in zip(others, coords)}
        V = Sf.basis if free == 0 else fixed[0][None, :]
        for a in range(1, len(spaces)):
            V = ring.bracket(V, Sf.basis if a == free else fixed[a][None, :])
        A = L0.coords(V)
        W, _ = row_space(gf, A, L0.dim)
        if W.shape[0] == 0:
            continue
        X0 = solve_left(gf, A, W)
        K = left_kernel(gf, A)
        if K.shape[0]:
            X0 = Subspace.span(gf, K, Sf.dim).reduce(X0)
        m = W.shape[0]
        lams = np.array(list(itertools.product(range(gf.q), repeat=m)), dtype=np.int64)
        values = gf.matmul(lams, W)
        frees = gf.matmul(gf.matmul(lams, X0), Sf.basis)
        for c, xf in zip(values, frees):
            k = _key(c)
            if k not in found:
                found[k] = tuple(xf if a == free else fixed[a] for a in range(len(spaces)))
        if len(found) == total:
            break
    log.tuples_visited += visited
    return found


def _h_powers(gf, h: np.ndarray, q: int) -> list[np.ndarray]:
    out = [gf.eye(h.shape[0])]
    for _ in range(1, q):
        out.append(gf.matmul(out[-1], h))
    return out


def _fix_level(A: FrobeniusAction, D: GradedDecomposition, spaces: dict, patterns, *,
               max_values: int, max_tuples: int, log: LevelLog):
    """Representative table of one level and the H-closed representative sets."""
    ring, gf, shape = A.ring, A.gf, A.shape
    L0 = D.components[0]
    n = D.n
    hpows = _h_powers(gf, A.h, shape.q)
    table = {}
    collected = {j: [] for j in range(1, n)}
    for P in patterns:
        found = _realize(ring, L0, P, [spaces[i] for i in P.indices],
                         max_values=max_values, max_tuples=max_tuples, log=log)
        log.patterns += 1
        for k, vecs in found.items():
            c = np.frombuffer(k, dtype=np.int64)
            value = gf.matmul(c[None, :], L0.basis)[0] if L0.dim else np.zeros(ring.dim, dtype=np.int64)
            orbits = tuple(tuple(gf.matmul(v[None, :], M)[0] for M in hpows) for v in vecs)
            table[(P.indices, k)] = RepEntry(P, value, tuple(vecs), orbits)
            for i, orb in zip(P.indices, orbits):
                for s, w in enumerate(orb):
                    collected[shape.h_index(i, s)].append(w)
            log.realizable_pairs += 1
    d = ring.dim
    reps = {j: _dedupe(np.array(v, dtype=np.int64).reshape(-1, d)) for j, v in collected.items()}
    return table, reps


def _count_tuples(counts: dict[int, int], n: int, j: int, max_len: int) -> int:
    """Ordered tuples of length 1..max_len from the representative sets with j + sum = 0."""
    ways = {0: 1}
    total = 0
    for _ in range(max_len):
        nxt = {}
        for s, w in ways.items():
            for i, c in counts.items():
                if c:
                    t = (s + i) % n
                    nxt[t] = nxt.get(t, 0) + w * c
        ways = nxt
        total += ways.get(-j % n, 0)
    return total


def _centralizer_level(ring, D: GradedDecomposition, rep_spans: dict, U: int) -> dict:
    """L_j(t): common kernel on L_j of y -> [y, a_1, ..., a_k], a_s in the span of
    representatives, k <= U.  Multilinearity lets spans replace the finite sets."""
    gf = ring.gf
    n, d = D.n, ring.dim
    ads = {i: [ring.ad_right(x) for x in S.basis] for i, S in rep_spans.items() if S.dim}
    out = {}
    for j in range(1, n):
        Lj = D.components[j]
        dj = Lj.dim
        if dj == 0 or not ads:
            out[j] = Lj
            continue
        stage = {0: Lj.basis.reshape(1, dj * d)}
        constraints = []
        for _ in range(U):
            new = {}
            for s, maps in stage.items():
                P = maps.reshape(-1, d)
                for i, mats in ads.items():
                    t = (s + i) % n
                    for M in mats:
                        new.setdefault(t, []).append(gf.matmul(P, M).reshape(-1, dj * d))
            stage = {}
            for t, parts in new.items():
                B, _ = row_space(gf, np.vstack(parts), dj * d)
                if B.shape[0]:
                    stage[t] = B
            if (-j) % n in stage:
                constraints.append(stage[(-j) % n])
            if not stage:
                break
        if not constraints:
            out[j] = Lj
            continue
        # a map P is stored as dj x d; y = c Lj.basis is killed iff c P = 0
        M = np.hstack([C.reshape(-1, dj, d).transpose(1, 0, 2).reshape(dj, -1) for C in constraints])
        K = left_kernel(gf, M)
        out[j] = Subspace.span(gf, gf.matmul(K, Lj.basis), d) if K.shape[0] else Subspace.zero(gf, d)
    return out


def build_tower(A: FrobeniusAction, D: GradedDecomposition, params: BoundParams, *,
                max_values: int = 4096, max_tuples: int = 50_000) -> CentralizerTower:
    """Levels 0..T_used with representatives for patterns of weight <= U_used."""
    ring = A.ring
    n = D.n
    if params.n != n or params.q != A.shape.q:
        raise ContractViolation("bound parameters do not match the action")
    U = params.U_used
    patterns = enumerate_patterns(n, U)
    levels, reps, tables, logs = [], [], [], []
    for t in range(params.T_used + 1):
        log = LevelLog(t)
        if t == 0:
            spaces = {j: D.components[j] for j in range(1, n)}
        else:
            spans = {}
            counts = {}
            for j in range(1, n):
                rows = [reps[s][j] for s in range(t) if reps[s][j].shape[0]]
                V = _dedupe(np.vstack(rows)) if rows else np.zeros((0, ring.dim), dtype=np.int64)
                spans[j] = Subspace.span(ring.gf, V, ring.dim)
                counts[j] = V.shape[0]
            spaces = _centralizer_level(ring, D, spans, U)
            log.tuple_counts = {j: _count_tuples(counts, n, j, U) for j in range(1, n)}
        log.codims = {j: D.components[j].dim - spaces[j].dim for j in range(1, n)}
        table, level_reps = _fix_level(A, D, spaces, patterns,
                                       max_values=max_values, max_tuples=max_tuples, log=log)
        levels.append(spaces)
        reps.append(level_reps)
        tables.append(table)
        logs.append(log)
    return CentralizerTower(A, D, params, levels, reps, tables, logs)


@dataclass(frozen=True, eq=False)
class Frozen:
    pattern: Pattern
    value: np.ndarray
    level: int
    vectors: tuple[np.ndarray, ...]


def freeze(tower: CentralizerTower, vectors, levels, s: int) -> Frozen:
    """Replace [y_1(k_1), ..., y_w(k_w)] by the fixed level-s representation of
    the same pattern and value."""
    D = tower.decomposition
    ring = tower.action.ring
    ys = [_as_homogeneous(D, v) for v in vectors]
    levels = list(levels)
    if len(levels) != len(ys):
        raise ContractViolation("one level per entry is required")
    if len(ys) > tower.U_used:
        raise ContractViolation(f"weight {len(ys)} exceeds the tower's pattern cap {tower.U_used}")
    if not 0 <= s <= min(levels) or max(levels) > tower.T_used:
        raise ContractViolation(f"target level {s} is not in [0, min(levels)]")
    for y, k in zip(ys, levels):
        if y.index == 0:
            raise ContractViolation("entries must lie in non-zero components")
        if not tower.level(k, y.index).contains(y.vector):
            raise ContractViolation(f"entry is not a centralizer of level {k} in L_{y.index}")
    P = Pattern(tuple(y.index for y in ys), D.n)
    value = _left_normed(ring, [y.vector for y in ys])
    c = D.components[0].coords(value)[0]
    entry = tower.tables[s].get((P.indices, _key(c)))
    if entry is None:
        raise ContractViolation(f"pair ({P}, value) has no fixed representation at level {s}")
    got = _left_normed(ring, list(entry.vectors))
    if not np.array_equal(got, value):
        raise ContractViolation("fixed representation does not reproduce the value")
    return Frozen(P, value, s, entry.vectors)


def check_tower_invariants(tower: CentralizerTower) -> ValidationReport:
    """Nesting, H-stability of levels and representative sets, codimension bound,
    membership of representatives and correctness of table values."""
    rep = ValidationReport()
    A, D = tower.action, tower.decomposition
    ring, gf, shape = A.ring, A.gf, A.shape
    n = D.n
    dim0 = D.components[0].dim
    for t, spaces in enumerate(tower.levels):
        for j in range(1, n):
            S = spaces[j]
            if not S.issubspace(D.components[j]):
                rep.add("nesting", f"L_{j}({t}) not inside L_{j}")
            if t and not S.issubspace(tower.levels[t - 1][j]):
                rep.add("nesting", f"L_{j}({t}) not inside L_{j}({t - 1})")
            if S.image(A.h) != spaces[shape.h_index(j)]:
                rep.add("h_stability", f"L_{j}({t}) h != L_{shape.h_index(j)}({t})")
            if t:
                bound = tower.logs[t].tuple_counts.get(j, 0) * dim0
                if D.components[j].dim - S.dim > bound:
                    rep.add("codim_bound", f"codim L_{j}({t}) exceeds {bound}")
            R = tower.reps[t][j]
            if R.shape[0] and not S.contains(R):
                rep.add("representative_membership", f"a level-{t} representative lies outside L_{j}({t})")
            if R.shape[0]:
                keys = {_key(v) for v in tower.reps[t][shape.h_index(j)]}
                for v in gf.matmul(R, A.h):
                    if _key(v) not in keys:
                        rep.add("orbit_closure", f"h-image of a level-{t} representative of index {j} is missing")
                        break
        for (idx, _), entry in tower.tables[t].items():
            if not np.array_equal(_left_normed(ring, list(entry.vectors)), entry.value):
                rep.add("table_value", f"level {t} pattern {entry.pattern} representation has the wrong value")
    return rep


def _projective_set(gf, V: np.ndarray) -> np.ndarray:
    if V.shape[0] == 0:
        return V
    return _dedupe(np.array([_normalize(gf, v) for v in V]).reshape(V.shape))


def verify_centralizer_property(tower: CentralizerTower, cap: int | None = None, *,
                                budget: int = 2_000_000, quasi_weight: int = 3) -> ValidationReport:
    """Exhaustive [y_j(t), x_{i1}, ..., x_{ik}] = 0 over basis vectors of L_j(t)
    and stored representatives of lower levels (k <= cap, zero index sum), plus
    the quasirepresentative extension on generated quasirepresentatives."""
    rep = ValidationReport()
    A, D = tower.action, tower.decomposition
    ring, gf = A.ring, A.gf
    n = D.n
    U = tower.U_used
    cap = U if cap is None else min(cap, U)
    nodes = [0]

    def tick():
        nodes[0] += 1
        if nodes[0] > budget:
            raise ResourceLimitError("centralizer check exceeds the node budget", nodes[0], budget)

    for t in range(1, tower.T_used + 1):
        lower = {i: _projective_set(gf, tower.reps_below(t, i)) for i in range(1, n)}

        def dfs(V, s, depth, j, trail):
            for i in range(1, n):
                for a, x in enumerate(lower[i]):
                    tick()
                    W = ring.bracket(V, x[None, :])
                    if not np.any(W):
                        continue
                    s2 = (s + i) % n
                    if (j + s2) % n == 0:
                        rep.add("centralizer_property",
                                f"level {t}, L_{j}: nonzero bracket against representative indices {trail + (i,)}")
                        continue
                    if depth + 1 < cap:
                        dfs(W, s2, depth + 1, j, trail + (i,))

        for j in range(1, n):
            B = tower.levels[t][j].basis
            if B.shape[0]:
                dfs(B, 0, 0, j, ())
        _check_quasi(tower, t, lower, min(U + 1, quasi_weight + 1), rep, tick)
    return rep


def _closure_weights(ring, gf, D, base: list, others: list, max_w: int, tick) -> list:
    """Commutators of weight <= max_w containing exactly one element of ``base``
    (given as (vector, weight) pairs) and otherwise elements of ``others``."""
    out = {}
    for v, w in base:
        out.setdefault(_key(_normalize(gf, v)), (v, w))
    frontier = list(out.values())
    while frontier:
        nxt = []
        for v, w in frontier:
            for u, wu in others:
                if w + wu > max_w:
                    continue
                tick()
                z = ring.bracket(v, u)
                if not np.any(z):
                    continue
                k = _key(_normalize(gf, z))
                if k not in out or out[k][1] > w + wu:
                    out[k] = (z, w + wu)
                    nxt.append((z, w + wu))
        frontier = nxt
    return list(out.values())


def _check_quasi(tower, t, lower, max_w, rep, tick):
    A, D = tower.action, tower.decomposition
    ring, gf = A.ring, A.gf
    n = D.n
    low_reps = [(v, 1) for i in range(1, n) for v in lower[i]]
    # commutators of lower representatives only (quasirepresentatives of lower levels)
    low = _closure_weights(ring, gf, D, low_reps, low_reps, max_w - 1, tick)
    heads = [(v, 1) for j in range(1, n) for v in tower.levels[t][j].basis]
    heads += [(v, 1) for j in range(1, n) for v in _projective_set(gf, tower.reps[t][j])]
    quasi = _closure_weights(ring, gf, D, heads, low_reps, max_w - 1, tick)
    tagged = [(v, w, D.component_of(v)) for v, w in low]
    for v, w in quasi:
        j = D.component_of(v)
        stack = [(v, w, j, 0)]
        while stack:
            x, wx, s, depth = stack.pop()
            for u, wu, iu in tagged:
                if wx + wu > max_w:
                    continue
                tick()
                z = ring.bracket(x, u)
                if not np.any(z):
                    continue
                if (s + iu) % n == 0:
                    rep.add("quasirepresentative", f"level {t}: nonzero zero-sum commutator of weight {wx + wu}")
                    continue
                stack.append((z, wx + wu, (s + iu) % n, depth + 1))


@dataclass(frozen=True, eq=False)
class ZReport:
    space: Subspace
    codim: int
    nilpotency_class: int | None
    phi_invariant: bool
    h_invariant: bool
    ring_class: int | None
    level_codims: dict


def build_Z_and_report(tower: CentralizerTower) -> ZReport:
    A = tower.action
    ring, gf = A.ring, A.gf
    T = tower.T_used
    gens = [tower.levels[T][j].basis for j in range(1, tower.n)]
    V = np.vstack(gens) if gens else np.zeros((0, ring.dim), dtype=np.int64)
    Z = generated_subring(ring, Subspace.span(gf, V, ring.dim))
    cls = nilpotency_class(subring_structure(ring, Z))
    return ZReport(Z, Z.codim, cls, Z.image(A.phi) == Z, Z.image(A.h) == Z,
                   nilpotency_class(ring), tower.codims(T))
