"""Instance generators and the JSON interchange format for Lie and group instances."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, InstanceFormatError, StructuralError
from .field import GF, FieldParams
from .frobenius import FrobeniusAction, FrobeniusShape, eigen_decompose, induced_action
from .lie import LieRing, direct_sum, generated_ideal, quotient


@dataclass(eq=False)
class Instance:
    ring: LieRing
    action: FrobeniusAction
    family: dict = field(default_factory=dict)

    @property
    def field(self) -> FieldParams:
        return self.action.field

    @property
    def shape(self) -> FrobeniusShape:
        return self.action.shape


def _shape(shape) -> FrobeniusShape:
    return shape if isinstance(shape, FrobeniusShape) else FrobeniusShape(*shape)


def _field_for(shape: FrobeniusShape, p: int | None, fp: FieldParams | None) -> FieldParams:
    if fp is not None:
        if fp.n != shape.n:
            raise ContractViolation("field omega order differs from n")
        return fp
    if p is None:
        raise ContractViolation("either p or a field is required")
    return FieldParams.create(p, shape.n)


# families ------------------------------------------------------------------
def heisenberg(p: int = 7, shape=(3, 2, 2), shift: int = 1, fp: FieldParams | None = None) -> Instance:
    """x in L_shift, y in L_-shift, z = [x, y] in L_0; h swaps x, y and negates z.

    Needs q = 2 and r = -1 mod n so that h maps L_shift onto L_-shift.
    """
    sh = _shape(shape)
    n = sh.n
    if sh.q != 2 or sh.r != n - 1:
        raise ContractViolation(f"the Heisenberg family needs q = 2 and r = n - 1, got {sh.astuple()}")
    if shift % n == 0:
        raise ContractViolation("shift must be non-zero mod n")
    fp = _field_for(sh, p, fp)
    gf = fp.gf
    ring = LieRing.from_brackets(gf, 3, {(0, 1): {2: 1}}, names=["x", "y", "z"],
                                 generators=np.eye(3, dtype=np.int64)[:2])
    w = fp.omega
    phi = np.diag([gf.power(w, shift), gf.power(w, -shift), 1]).astype(np.int64)
    h = np.array([[0, 1, 0], [1, 0, 0], [0, 0, int(gf.neg(1))]], dtype=np.int64)
    act = FrobeniusAction(fp, ring, phi, h, sh)
    return Instance(ring, act, {"family": "heisenberg", "p": fp.p, "e": fp.e, "shape": list(sh.astuple()),
                                "shift": shift % n})


def abelian_orbit(p: int | None = 7, shape=(3, 2, 2), index: int = 1, fp: FieldParams | None = None) -> Instance:
    """Abelian ring on one H-orbit e_k in L_{index r^k}, with e_k h = e_{k+1}."""
    sh = _shape(shape)
    fp = _field_for(sh, p, fp)
    gf = fp.gf
    q = sh.q
    if index % sh.n == 0:
        raise ContractViolation("index must be non-zero mod n")
    ring = LieRing.abelian(gf, q, names=[f"e{k}" for k in range(q)])
    phi = np.diag([gf.power(fp.omega, sh.h_index(index, k)) for k in range(q)]).astype(np.int64)
    h = np.roll(np.eye(q, dtype=np.int64), 1, axis=1)
    return Instance(ring, FrobeniusAction(fp, ring, phi, h, sh),
                    {"family": "abelian-orbit", "p": fp.p, "shape": list(sh.astuple()), "index": index % sh.n})


def _block_diag(mats: list[np.ndarray]) -> np.ndarray:
    d = sum(M.shape[0] for M in mats)
    out = np.zeros((d, d), dtype=np.int64)
    o = 0
    for M in mats:
        k = M.shape[0]
        out[o:o + k, o:o + k] = M
        o += k
    return out


def direct_sum_instances(*parts: Instance) -> Instance:
    if not parts:
        raise ContractViolation("direct sum of no instances")
    fp, sh = parts[0].field, parts[0].shape
    for P in parts[1:]:
        if P.field != fp or P.shape != sh:
            raise ContractViolation("summands must share field and shape")
    ring = direct_sum(*(P.ring for P in parts))
    act = FrobeniusAction(fp, ring, _block_diag([P.action.phi for P in parts]),
                          _block_diag([P.action.h for P in parts]), sh)
    return Instance(ring, act, {"family": "direct-sum", "parts": [P.family for P in parts]})


def heisenberg_family(k: int, p: int = 7) -> Instance:
    """Heisenberg plus k abelian orbit blocks: dim L_0 = 1 for every k."""
    parts = [heisenberg(p)] + [abelian_orbit(p, index=1) for _ in range(k)]
    inst = direct_sum_instances(*parts)
    inst.family = {"family": "heisenberg-plus-abelian", "p": p, "k": k}
    return inst


def free_nilpotent(shape=(3, 2, 2), base_indices=(1,), class_cap: int = 3, p: int | None = None,
                   relations: str = "none", c: int = 1, budget: int = 20_000) -> Instance:
    """Free Lie ring on the H-orbits of y_{i_s}, truncated above ``class_cap``.

    ``relations`` picks extra FH-invariant relations: "none", "J" (kill the
    ideal generated by the zero component), "I" (the ideal I for ``c``) or "JI".
    """
    from .freelie import GradedFreeLie, IndexedGeneratorSet, default_prime
    from .universal import IdealWorkspace, quotient_ring

    sh = _shape(shape)
    if relations not in ("none", "J", "I", "JI"):
        raise ContractViolation(f"unknown relation set {relations!r}")
    if p is None:
        p = default_prime(sh.n, sh.q, class_cap)
    if (p - 1) % sh.n:
        raise ContractViolation(f"free-nilpotent instances need p = 1 mod n, got p = {p}")
    fp = FieldParams.create(p, sh.n)
    gens = IndexedGeneratorSet(sh, tuple(base_indices))
    F = GradedFreeLie(gens, fp.gf, budget=budget)
    ws = IdealWorkspace(F, c)
    ring, act, _ = quotient_ring(ws, class_cap, fp, include_J="J" in relations, include_I="I" in relations)
    return Instance(ring, act, {"family": "free-nilpotent", "p": p, "shape": list(sh.astuple()),
                                "base_indices": list(base_indices), "class_cap": class_cap,
                                "relations": relations, "c": c})


def add_random_relations(inst: Instance, count: int, seed: int, min_weight_part: bool = True) -> Instance:
    """Quotient by the ideal generated by the H-orbits of ``count`` random
    phi-homogeneous elements (taken in the derived subring when possible)."""
    rng = np.random.default_rng(seed)
    A = inst.action
    ring, gf = A.ring, A.gf
    D = eigen_decompose(A)
    n = A.shape.n
    rels = []
    derived = None
    if min_weight_part:
        from .lie import lower_central_series
        terms = lower_central_series(ring).terms
        derived = terms[1] if len(terms) > 1 else None
    for _ in range(count):
        k = int(rng.integers(0, n))
        v = gf.random(rng, (1, ring.dim))
        if derived is not None and derived.dim:
            v = gf.matmul(gf.random(rng, (1, derived.dim)), derived.basis)
        v = D.project(v, k)
        for _ in range(A.shape.q):
            rels.append(v[0])
            v = gf.matmul(v, A.h)
    I = generated_ideal(ring, np.array(rels, dtype=np.int64).reshape(-1, ring.dim))
    Q = quotient(ring, I)
    fam = dict(inst.family)
    fam["random_relations"] = {"count": count, "seed": seed}
    return Instance(Q.ring, induced_action(A, Q), fam)


FAMILIES = ("heisenberg", "abelian-orbit", "heisenberg-plus-abelian", "free-nilpotent", "direct-sum")


def generate(descriptor: dict) -> Instance:
    """Build an instance from a family descriptor such as
    {"family": "free-nilpotent", "shape": [3, 2, 2], "class_cap": 3}."""
    d = dict(descriptor)
    fam = d.pop("family", None)
    seed = d.pop("seed", 0)
    extra = d.pop("random_relations", 0)
    if fam == "heisenberg":
        inst = heisenberg(d.get("p", 7), d.get("shape", (3, 2, 2)), d.get("shift", 1))
    elif fam == "abelian-orbit":
        inst = abelian_orbit(d.get("p", 7), d.get("shape", (3, 2, 2)), d.get("index", 1))
    elif fam == "heisenberg-plus-abelian":
        inst = heisenberg_family(d.get("k", 1), d.get("p", 7))
    elif fam == "free-nilpotent":
        inst = free_nilpotent(d.get("shape", (3, 2, 2)), tuple(d.get("base_indices", (1,))),
                              d.get("class_cap", 3), d.get("p"), d.get("relations", "none"), d.get("c", 1))
    elif fam == "direct-sum":
        parts = d.get("parts")
        if not parts:
            raise ContractViolation("direct-sum needs a non-empty 'parts' list")
        inst = direct_sum_instances(*(generate(P) for P in parts))
    else:
        raise ContractViolation(f"unknown family {fam!r}; expected one of {', '.join(FAMILIES)}")
    if extra:
        inst = add_random_relations(inst, int(extra), int(seed))
    inst.family = dict(descriptor, seed=seed)
    return inst


# JSON format ---------------------------------------------------------------
def _scalar_out(gf: GF, a: int) -> list[int]:
    return [int(c) for c in gf.to_coeffs(int(a))]


def instance_to_dict(inst: Instance) -> dict:
    A = inst.action
    ring, gf, fp = A.ring, A.gf, A.field
    brackets = []
    for (i, j), row in sorted(ring.structure.items()):
        entries = [{"k": int(k), "c": _scalar_out(gf, c)} for k, c in sorted(row.items()) if c]
        if entries:
            brackets.append({"i": int(i), "j": int(j), "entries": entries})
    out = {
        "field": {"p": fp.p, "e": fp.e},
        "omega": _scalar_out(gf, fp.omega),
        "frobenius": {"n": A.shape.n, "q": A.shape.q, "r": A.shape.r},
        "dim": ring.dim,
        "basis_names": list(ring.names),
        "brackets": brackets,
        "phi": [[_scalar_out(gf, a) for a in row] for row in A.phi],
        "h": [[_scalar_out(gf, a) for a in row] for row in A.h],
    }
    if fp.e > 1:
        out["field"]["modulus"] = [int(c) for c in fp.modulus]
    if ring.generators is not None:
        out["generators"] = [[_scalar_out(gf, a) for a in row] for row in ring.generators]
    if inst.family:
        out["family"] = inst.family
    return out


def dumps(obj: dict) -> str:
    """Canonical JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=1, ensure_ascii=False) + "\n"


class _Reader:
    def __init__(self, data):
        self.data = data

    def get(self, obj, key, path, kind=None):
        if not isinstance(obj, dict):
            raise InstanceFormatError(f"{path}: expected an object")
        if key not in obj:
            raise InstanceFormatError(f"{path}.{key}: missing")
        val = obj[key]
        if kind is not None and not _is(val, kind):
            raise InstanceFormatError(f"{path}.{key}: expected {kind}")
        return val


def _is(val, kind) -> bool:
    if kind == "int":
        return isinstance(val, int) and not isinstance(val, bool)
    if kind == "list":
        return isinstance(val, list)
    if kind == "object":
        return isinstance(val, dict)
    return True


def _scalar_in(gf: GF, val, path: str) -> int:
    if isinstance(val, int) and not isinstance(val, bool) and gf.e == 1:
        val = [val]
    if not isinstance(val, list) or len(val) != gf.e or not all(_is(c, "int") for c in val):
        raise InstanceFormatError(f"{path}: expected a list of {gf.e} integers")
    if any(not 0 <= c < gf.p for c in val):
        raise InstanceFormatError(f"{path}: coefficients must lie in [0, {gf.p})")
    return gf.from_coeffs(val)


def _matrix_in(gf: GF, val, d: int, path: str) -> np.ndarray:
    if not isinstance(val, list) or len(val) != d:
        raise InstanceFormatError(f"{path}: expected {d} rows")
    out = np.zeros((d, d), dtype=np.int64)
    for a, row in enumerate(val):
        if not isinstance(row, list) or len(row) != d:
            raise InstanceFormatError(f"{path}[{a}]: expected {d} entries")
        for b, x in enumerate(row):
            out[a, b] = _scalar_in(gf, x, f"{path}[{a}][{b}]")
    return out


def instance_from_dict(data) -> Instance:
    R = _Reader(data)
    f = R.get(data, "field", "$", "object")
    p = R.get(f, "p", "$.field", "int")
    e = f.get("e", 1)
    if not _is(e, "int") or e < 1:
        raise InstanceFormatError("$.field.e: expected a positive integer")
    modulus = f.get("modulus")
    fr = R.get(data, "frobenius", "$", "object")
    n, q, r = (R.get(fr, k, "$.frobenius", "int") for k in ("n", "q", "r"))
    try:
        shape = FrobeniusShape(n, q, r)
    except ContractViolation as exc:
        raise InstanceFormatError(f"$.frobenius: {exc}") from None
    try:
        gf = GF(p, e, tuple(modulus) if modulus is not None else None)
    except (ValueError, ContractViolation, StructuralError) as exc:
        raise InstanceFormatError(f"$.field: {exc}") from None
    omega = _scalar_in(gf, R.get(data, "omega", "$"), "$.omega")
    try:
        fp = FieldParams(gf, n, omega)
    except ContractViolation as exc:
        raise InstanceFormatError(f"$.omega: {exc}") from None
    d = R.get(data, "dim", "$", "int")
    if d < 0:
        raise InstanceFormatError("$.dim: must be non-negative")
    names = data.get("basis_names")
    if names is not None and (not isinstance(names, list) or len(names) != d):
        raise InstanceFormatError(f"$.basis_names: expected {d} names")
    table = []
    brs = R.get(data, "brackets", "$", "list")
    for a, br in enumerate(brs):
        path = f"$.brackets[{a}]"
        i = R.get(br, "i", path, "int")
        j = R.get(br, "j", path, "int")
        for name, v in (("i", i), ("j", j)):
            if not 0 <= v < d:
                raise InstanceFormatError(f"{path}.{name}: index {v} out of range")
        for b, ent in enumerate(R.get(br, "entries", path, "list")):
            ep = f"{path}.entries[{b}]"
            k = R.get(ent, "k", ep, "int")
            if not 0 <= k < d:
                raise InstanceFormatError(f"{ep}.k: index {k} out of range")
            table.append((i, j, k, _scalar_in(gf, R.get(ent, "c", ep), f"{ep}.c")))
    gens = None
    if "generators" in data:
        G = data["generators"]
        if not isinstance(G, list):
            raise InstanceFormatError("$.generators: expected a list of rows")
        gens = np.zeros((len(G), d), dtype=np.int64)
        for a, row in enumerate(G):
            if not isinstance(row, list) or len(row) != d:
                raise InstanceFormatError(f"$.generators[{a}]: expected {d} entries")
            for b, x in enumerate(row):
                gens[a, b] = _scalar_in(gf, x, f"$.generators[{a}][{b}]")
    try:
        ring = LieRing(gf, d, table, names, gens)
    except StructuralError as exc:
        raise InstanceFormatError(f"$.brackets: {exc}") from None
    phi = _matrix_in(gf, R.get(data, "phi", "$"), d, "$.phi")
    h = _matrix_in(gf, R.get(data, "h", "$"), d, "$.h")
    return Instance(ring, FrobeniusAction(fp, ring, phi, h, shape), data.get("family") or {})


def loads(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return instance_from_dict(data)


def load(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def save(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(instance_to_dict(inst)))


# group instance files --------------------------------------------------------
@dataclass(eq=False)
class GroupInstance:
    group: "FiniteGroup"
    autos: "GroupAutomorphismPair"
    family: dict = field(default_factory=dict)


def group_to_dict(inst: GroupInstance) -> dict:
    G, A = inst.group, inst.autos
    out = {
        "order": G.order,
        "table": G.table.tolist(),
        "phi": [int(x) for x in A.phi],
        "h": [int(x) for x in A.h],
        "frobenius": {"n": A.shape.n, "q": A.shape.q, "r": A.shape.r},
    }
    if inst.family:
        out["family"] = inst.family
    return out


def _perm_in(val, N: int, path: str) -> np.ndarray:
    if not isinstance(val, list) or len(val) != N or not all(_is(x, "int") for x in val):
        raise InstanceFormatError(f"{path}: expected a list of {N} element ids")
    arr = np.asarray(val, dtype=np.int64)
    if sorted(val) != list(range(N)):
        bad = next(i for i, x in enumerate(val) if not 0 <= x < N or val.count(x) > 1)
        raise InstanceFormatError(f"{path}[{bad}]: not a permutation of 0..{N - 1}")
    return arr


def group_from_dict(data) -> GroupInstance:
    from .groups import FiniteGroup, GroupAutomorphismPair

    R = _Reader(data)
    N = R.get(data, "order", "$", "int")
    if N < 1:
        raise InstanceFormatError("$.order: must be positive")
    T = R.get(data, "table", "$", "list")
    if len(T) != N:
        raise InstanceFormatError(f"$.table: expected {N} rows")
    for a, row in enumerate(T):
        if not isinstance(row, list) or len(row) != N:
            raise InstanceFormatError(f"$.table[{a}]: expected {N} entries")
        for b, x in enumerate(row):
            if not _is(x, "int") or not 0 <= x < N:
                raise InstanceFormatError(f"$.table[{a}][{b}]: expected an element id in [0, {N})")
    fr = R.get(data, "frobenius", "$", "object")
    n, q, r = (R.get(fr, k, "$.frobenius", "int") for k in ("n", "q", "r"))
    try:
        shape = FrobeniusShape(n, q, r)
    except ContractViolation as exc:
        raise InstanceFormatError(f"$.frobenius: {exc}") from None
    phi = _perm_in(R.get(data, "phi", "$"), N, "$.phi")
    h = _perm_in(R.get(data, "h", "$"), N, "$.h")
    try:
        G = FiniteGroup(T)
    except StructuralError as exc:
        raise InstanceFormatError(f"$.table: {exc}") from None
    return GroupInstance(G, GroupAutomorphismPair(phi, h, shape), data.get("family") or {})


def group_loads(text: str) -> GroupInstance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return group_from_dict(data)


GROUP_FAMILIES = ("ut37", "c7-squared", "c2-cubed")


def generate_group(descriptor: dict) -> GroupInstance:
    from . import groups as g

    fam = descriptor.get("family")
    if fam == "ut37":
        inst = GroupInstance(g.unitriangular3(7), g.ut37_autos())
    elif fam == "c7-squared":
        inst = GroupInstance(g.elementary_abelian(7, 2), g.c7_squared_autos())
    elif fam == "c2-cubed":
        inst = GroupInstance(g.elementary_abelian(2, 3), g.c2_cubed_autos())
    else:
        raise ContractViolation(f"unknown group family {fam!r}; expected one of {', '.join(GROUP_FAMILIES)}")
    inst.family = dict(descriptor)
    return inst
