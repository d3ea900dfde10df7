"""Command line entry point: batch checks with a JSON report on stdout.

Exit codes: 0 when no check failed (inconclusive is not a failure), 1 when
some check failed, 2 for usage errors and unreadable or malformed input.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bridge, instances
from .bounds import BoundParams, bound_V
from .centralizers import (build_tower, build_Z_and_report, check_tower_invariants,
                           verify_centralizer_property)
from .errors import (ContractViolation, FrobeniusLieError, InstanceFormatError, KMSInfeasible,
                     ResourceLimitError, StructuralError, UnsupportedInstance)
from .field import GF
from .freelie import IndexedGeneratorSet, default_prime
from .frobenius import FrobeniusShape, check_grading_laws, eigen_decompose, fixed_subring, validate_action
from .groups import check_fitting, fitting_subgroup, validate_group
from .kms import KMSSolver
from .lie import nilpotency_class, validate_lie_ring
from .universal import build_universal_quotient

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


class Report:
    def __init__(self, command: str, caps: dict):
        self.command = command
        self.caps = caps
        self.records: dict[str, dict] = {}

    def add(self, check_id: str, status, numerics=None, caps_used=None, paper_bound=None):
        if isinstance(status, (bool, np.bool_)):
            status = "pass" if status else "fail"
        if status not in ("pass", "fail", "inconclusive"):
            raise ValueError(status)
        self.records[check_id] = {
            "check_id": check_id,
            "status": status,
            "numerics": _jsonable(numerics or {}),
            "caps_used": _jsonable(caps_used or {}),
            "paper_bound": _jsonable(paper_bound),
        }

    def add_validation(self, prefix: str, rep, kinds, numerics=None):
        seen = rep.kinds()
        for k in kinds:
            details = [v.detail for v in rep.violations if v.kind == k][:10]
            self.add(f"{prefix}.{k}", k not in seen, dict(numerics or {}, violations=details))
        for k in sorted(seen - set(kinds)):
            details = [v.detail for v in rep.violations if v.kind == k][:10]
            self.add(f"{prefix}.{k}", "fail", {"violations": details})

    @property
    def failed(self) -> bool:
        return any(r["status"] == "fail" for r in self.records.values())

    def as_dict(self) -> dict:
        recs = [self.records[k] for k in sorted(self.records)]
        counts = {s: sum(r["status"] == s for r in recs) for s in ("pass", "fail", "inconclusive")}
        return {"command": self.command, "caps": _jsonable(self.caps), "summary": counts, "records": recs}


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load_lie(path: str):
    try:
        return instances.loads(_read(path))
    except InstanceFormatError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _load_group(path: str):
    try:
        return instances.group_loads(_read(path))
    except (InstanceFormatError, ResourceLimitError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _ints(text: str, what: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated integers, got {text!r}") from None


def _shape(args) -> FrobeniusShape:
    try:
        return FrobeniusShape(args.n, args.q, args.r)
    except ContractViolation as exc:
        raise UsageError(str(exc)) from None


# subcommands ------------------------------------------------------------------
def cmd_validate(args, rep: Report):
    inst = _load_lie(args.file)
    A = inst.action
    rep.add_validation("lie", validate_lie_ring(inst.ring), ("antisymmetry", "jacobi"),
                       {"dim": inst.ring.dim})
    rep.add_validation("action", validate_action(A),
                       ("coprimality", "phi_order", "h_order", "relation", "automorphism"))
    canon = instances.dumps(instances.instance_to_dict(inst))
    again = instances.dumps(instances.instance_to_dict(instances.loads(canon)))
    rep.add("format.round_trip", canon == again)


def cmd_decompose(args, rep: Report):
    inst = _load_lie(args.file)
    A = inst.action
    val = validate_action(A)
    rep.add_validation("action", val, ("coprimality", "phi_order", "h_order", "relation", "automorphism"))
    if not val.ok:
        return
    D = eigen_decompose(A)
    gf = A.gf
    rng = np.random.default_rng(args.seed)
    X = gf.random(rng, (16, inst.ring.dim))
    total = np.zeros_like(X)
    for k in range(D.n):
        total = gf.add(total, D.project(X, k))
    rep.add("decompose.sum_of_projections", bool(np.array_equal(total, X)), {"dims": list(D.dims)})
    rep.add_validation("decompose", check_grading_laws(D, A), ("grading", "h_permutation"))
    for which in ("F", "H", "FH"):
        fs = fixed_subring(A, which)
        rep.add(f"fixed.{which}", fs.bracket_closed,
                {"dim": fs.space.dim, "nilpotency_class": fs.nilpotency_class})
    rep.add("ring.class", "pass", {"nilpotency_class": nilpotency_class(inst.ring)})


def cmd_universal(args, rep: Report):
    shape = _shape(args)
    gens = IndexedGeneratorSet(shape, args.indices or (1,) * args.orbits)
    W = args.maxweight
    p = args.p or default_prime(shape.n, shape.q, W)
    try:
        uq = build_universal_quotient(shape=shape, c=args.c, gens=gens, W=W, gf=GF(p),
                                      budget=args.budget)
    except ResourceLimitError as exc:
        rep.add("universal.empirical_f", "inconclusive", {"error": str(exc)}, {"maxweight": W})
        return
    caps = {"maxweight": W, "p": p}
    num = {"dims_M_by_weight": list(uq.dims_M_by_weight)}
    for k, v in sorted(uq.checks.items()):
        rep.add(f"universal.{k}", v, num, caps)
    rep.add("universal.empirical_f", "pass" if uq.stabilized else "inconclusive",
            dict(num, empirical_f=uq.empirical_class, stabilized=uq.stabilized), caps)


def cmd_kms(args, rep: Report):
    shape = _shape(args)
    gens = IndexedGeneratorSet(shape, args.indices or (1,) * args.orbits)
    p = args.p or default_prime(shape.n, shape.q)
    solver = KMSSolver(gens, args.c, GF(p))
    if args.word:
        words = [_ints(args.word, "--word")]
    else:
        rng = np.random.default_rng(args.seed)
        words = [tuple(int(x) for x in rng.integers(0, gens.count, args.weight))
                 for _ in range(args.count)]
    for a, w in enumerate(words):
        cid = f"kms.{a:03d}"
        try:
            res = solver.transform(w, args.segment_cap)
        except ResourceLimitError as exc:
            rep.add(cid, "inconclusive", {"word": w, "error": str(exc)}, {"budget": args.budget})
            continue
        except KMSInfeasible as exc:
            rep.add(cid, "fail", {"word": w, "error": str(exc)})
            continue
        except ContractViolation as exc:
            raise UsageError(str(exc)) from None
        rep.add(cid, all(res.checks.values()),
                {"word": w, "terms": [[t.coef, list(t.word)] for t in res.terms],
                 "unchanged": res.unchanged, "checks": res.checks},
                {"segment_cap": args.segment_cap or len(w), "p": p})


def cmd_tower(args, rep: Report):
    inst = _load_lie(args.file)
    A = inst.action
    val = validate_action(A)
    rep.add_validation("action", val, ("coprimality", "phi_order", "h_order", "relation", "automorphism"))
    if not val.ok:
        return
    D = eigen_decompose(A)
    params = BoundParams(args.c, A.shape.q, A.shape.n, args.f, args.weightcap, args.levels)
    caps = {"U_used": params.U_used, "T_used": params.T_used}
    bound = {"f": params.f, "T": params.T, "U": params.U, "N": params.N}
    try:
        tower = build_tower(A, D, params)
    except ResourceLimitError as exc:
        rep.add("tower.build", "inconclusive", {"error": str(exc)}, caps, bound)
        return
    codims = {str(t): tower.codims(t) for t in range(params.T_used + 1)}
    rep.add_validation("tower", check_tower_invariants(tower),
                       ("nesting", "h_stability", "codim_bound", "representative_membership",
                        "orbit_closure", "table_value"), {"codims": codims})
    try:
        cp = verify_centralizer_property(tower, budget=args.budget)
        rep.add_validation("tower", cp, ("centralizer_property", "quasirepresentative"))
    except ResourceLimitError as exc:
        rep.add("tower.centralizer_property", "inconclusive", {"error": str(exc)},
                dict(caps, budget=args.budget))
    Z = build_Z_and_report(tower)
    zc, lc = Z.nilpotency_class, Z.ring_class
    rep.add("Z.class", zc is not None and lc is not None and zc <= lc,
            {"codim": Z.codim, "class_Z": zc, "class_L": lc, "level_codims": Z.level_codims},
            caps, bound)
    rep.add("Z.invariant", Z.phi_invariant and Z.h_invariant,
            {"phi": Z.phi_invariant, "h": Z.h_invariant})


def cmd_group(args, rep: Report):
    gi = _load_group(args.file)
    G, au = gi.group, gi.autos
    val = validate_group(G, au, seed=args.seed)
    rep.add_validation("group", val, ("group_axioms", "associativity", "coprimality",
                                      "automorphism", "phi_order", "h_order", "relation"),
                       {"order": G.order})
    F, index = fitting_subgroup(G)
    m = int(G.centralizer_of_automorphisms([au.phi]).sum())
    fit = check_fitting(G, F)
    rep.add_validation("fitting", fit, ("fitting_nilpotent", "fitting_normal", "fitting_maximal"),
                       {"index": index, "m": m, "n": au.shape.n})
    if not val.ok:
        return
    try:
        summ = bridge.lie_vs_group_summary(G, au)
    except UnsupportedInstance as exc:
        rep.add("bridge.supported", "inconclusive", {"reason": str(exc)})
        return
    rep.add("bridge.bracket_well_defined", summ["bracket_well_defined"])
    rep.add("bridge.fixed_points", summ["C_L_phi"] == summ["C_G_phi"],
            {"C_L_phi": summ["C_L_phi"], "C_G_phi": summ["C_G_phi"]})
    rep.add("bridge.class", summ["class_L"] == summ["class_G"],
            {"class_L": summ["class_L"], "class_G": summ["class_G"]})
    cl, cg = summ["class_C_L_H"], summ["class_C_G_H"]
    rep.add("bridge.class_C_H", cl is not None and cg is not None and cl <= cg,
            {"class_C_L_H": cl, "class_C_G_H": cg})
    R = bridge.lcs_and_associated_lie_ring(G, au)
    rng = np.random.default_rng(args.seed)
    ok, worst = True, []
    for k in range(1, min(args.weightcap, 2) + 1):
        v = tuple(int(x) for x in rng.integers(0, G.order, k))
        K = bridge.group_theta_and_K(G, au, v, cap=args.weightcap, R=R, seed=args.seed)
        ok &= all(K.checks.values())
        worst.append({"v": v, "index": K.index, "bound": m**K.n_tuples, "checks": K.checks})
    rep.add("bridge.K", ok, {"samples": worst}, {"weightcap": args.weightcap})
    try:
        T = bridge.build_A_tower_and_parameter(G, au, args.weightcap, args.levels, seed=args.seed)
    except ResourceLimitError as exc:
        rep.add("bridge.A_tower", "inconclusive", {"error": str(exc)})
        return
    caps = {"N_used": args.weightcap, "T_used": args.levels}
    num = {"orders": [int(a.sum()) for a in T.A], "param_G": T.param_G.as_list(),
           "params": [p.as_list() for p in T.params]}
    for k, v in sorted(T.checks.items()):
        rep.add(f"bridge.A_tower.{k}", v, num if k == "parameter_decrease" else {}, caps)


def cmd_generate(args, rep: Report | None):
    try:
        desc = json.loads(args.descriptor)
    except json.JSONDecodeError as exc:
        raise UsageError(f"descriptor: {exc.msg}") from None
    if not isinstance(desc, dict):
        raise UsageError("descriptor must be a JSON object")
    desc.setdefault("seed", args.seed)
    try:
        if args.group:
            data = instances.group_to_dict(instances.generate_group(desc))
        else:
            data = instances.instance_to_dict(instances.generate(desc))
    except ContractViolation as exc:
        raise UsageError(str(exc)) from None
    return instances.dumps(data)


COMMANDS = {
    "validate": cmd_validate, "decompose": cmd_decompose, "universal": cmd_universal,
    "kms": cmd_kms, "tower": cmd_tower, "group": cmd_group, "generate": cmd_generate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("caps")
    g.add_argument("--maxweight", type=int, default=10, help="weight cap W for free Lie work")
    g.add_argument("--levels", type=int, default=1, help="number of tower levels T_used")
    g.add_argument("--weightcap", type=int, default=2, help="pattern weight cap U_used / N_used")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--budget", type=int, default=2_000_000, help="enumeration budget")

    ap = argparse.ArgumentParser(prog="frobenius-lie", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def shape_args(p):
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--q", type=int, required=True)
        p.add_argument("--r", type=int, required=True)
        p.add_argument("--c", type=int, default=1)
        p.add_argument("--orbits", type=int, default=1)
        p.add_argument("--indices", type=lambda s: _ints(s, "--indices"), default=None,
                       help="base index of each orbit, e.g. 1,2")
        p.add_argument("--p", type=int, default=None, help="characteristic (default: smallest p = 1 mod n)")

    for name in ("validate", "decompose"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("file")
    p = sub.add_parser("universal", parents=[common])
    shape_args(p)
    p = sub.add_parser("kms", parents=[common])
    shape_args(p)
    p.add_argument("--word", default=None, help="generator ids, e.g. 0,1,0")
    p.add_argument("--count", type=int, default=5, help="random inputs when no --word is given")
    p.add_argument("--weight", type=int, default=4)
    p.add_argument("--segment-cap", type=int, default=None)
    p = sub.add_parser("tower", parents=[common])
    p.add_argument("file")
    p.add_argument("--c", type=int, default=1)
    p.add_argument("--f", type=int, default=2, help="class bound f(c, q) used for U and N")
    p = sub.add_parser("group", parents=[common])
    p.add_argument("file")
    p = sub.add_parser("generate", parents=[common])
    p.add_argument("descriptor", help='family descriptor, e.g. \'{"family": "heisenberg"}\'')
    p.add_argument("--group", action="store_true", help="generate a group instance file")
    p.add_argument("-o", "--output", default=None)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    caps = {k: getattr(args, k) for k in ("maxweight", "levels", "weightcap", "seed", "budget")}
    for k in ("maxweight", "levels", "weightcap", "budget"):
        if caps[k] < (0 if k == "levels" else 1):
            print(f"error: --{k} must be positive", file=sys.stderr)
            return EXIT_USAGE
    try:
        if args.command == "generate":
            text = cmd_generate(args, None)
            if args.output:
                with open(args.output, "w", encoding="utf-8") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
            return EXIT_OK
        rep = Report(args.command, caps)
        COMMANDS[args.command](args, rep)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StructuralError, ContractViolation, UnsupportedInstance, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(json.dumps(rep.as_dict(), sort_keys=True, indent=1) + "\n")
    return EXIT_FAIL if rep.failed else EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
