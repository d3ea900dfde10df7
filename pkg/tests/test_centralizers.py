import numpy as np
import pytest

from frobenius_lie.bounds import BoundParams
from frobenius_lie.centralizers import (Pattern, build_tower, build_Z_and_report, check_tower_invariants,
                                        enumerate_patterns, freeze, theta_map, verify_centralizer_property)
from frobenius_lie.errors import ContractViolation, ResourceLimitError
from frobenius_lie.frobenius import eigen_decompose
from frobenius_lie.instances import generate, heisenberg, heisenberg_family

X, Y, Z = np.eye(3, dtype=np.int64)


def _tower(inst, U, T, **kw):
    A = inst.action
    D = eigen_decompose(A)
    return build_tower(A, D, BoundParams(1, A.shape.q, A.shape.n, 1, U, T), **kw)


def test_patterns():
    pats = enumerate_patterns(3, 3)
    assert [p.indices for p in pats] == [(1, 2), (2, 1), (1, 1, 1), (2, 2, 2)]
    with pytest.raises(ContractViolation):
        Pattern((1, 1), 3)
    with pytest.raises(ContractViolation):
        Pattern((0, 3), 3)
    assert Pattern((1, 2), 3).h_image(2).indices == (2, 1)


def test_theta_map_heisenberg():
    inst = heisenberg()
    D = eigen_decompose(inst.action)
    th = theta_map(inst.ring, D, [X])
    assert th.j == 2 and th.codim == 1
    with pytest.raises(ContractViolation):
        theta_map(inst.ring, D, [Z])
    with pytest.raises(ContractViolation):
        theta_map(inst.ring, D, [X, Y])


@pytest.mark.parametrize("U,T,dims,tables", [
    (2, 1, [{1: 1, 2: 1}, {1: 0, 2: 0}], [14, 2]),
    (3, 1, [{1: 1, 2: 1}, {1: 0, 2: 0}], [16, 4]),
    (4, 2, [{1: 1, 2: 1}, {1: 0, 2: 0}, {1: 0, 2: 0}], [22, 10, 10]),
])
def test_heisenberg_tower_frozen(U, T, dims, tables):
    tw = _tower(heisenberg(), U, T)
    assert [{j: S.dim for j, S in lv.items()} for lv in tw.levels] == dims
    assert [len(t) for t in tw.tables] == tables
    assert {j: r.shape[0] for j, r in tw.reps[0].items()} == {1: 6, 2: 6}
    assert check_tower_invariants(tw).ok
    assert verify_centralizer_property(tw).ok
    Zr = build_Z_and_report(tw)
    assert Zr.codim == 3 and Zr.phi_invariant and Zr.h_invariant


def test_freeze_value_preserved():
    tw = _tower(heisenberg(), 2, 1)
    fr = freeze(tw, [X, 3 * Y], [0, 0], 0)
    assert fr.value.tolist() == [0, 0, 3]
    assert [v.tolist() for v in fr.vectors] == [[3, 0, 0], [0, 1, 0]]
    with pytest.raises(ContractViolation):
        freeze(tw, [X, Y], [1, 0], 0)  # X is not in L_1(1)
    with pytest.raises(ContractViolation):
        freeze(tw, [X, Y, X], [0, 0, 0], 0)


def test_mutation_is_detected():
    tw = _tower(heisenberg_family(2), 3, 1)
    x = np.eye(tw.action.ring.dim, dtype=np.int64)[0]
    tw.levels[1][1] = tw.levels[1][1].add_vectors(x[None])
    assert {"centralizer_property", "quasirepresentative"} <= verify_centralizer_property(tw).kinds()
    assert "h_stability" in check_tower_invariants(tw).kinds()


def test_budget_overflow_raises():
    tw = _tower(generate({"family": "free-nilpotent", "shape": [3, 2, 2], "class_cap": 4}), 3, 1)
    with pytest.raises(ResourceLimitError):
        verify_centralizer_property(tw, budget=10)


def test_tuple_cap_raises():
    inst = generate({"family": "free-nilpotent", "shape": [5, 4, 2], "class_cap": 3, "p": 11})
    with pytest.raises(ResourceLimitError) as exc:
        _tower(inst, 3, 1, max_tuples=2000)
    assert exc.value.cap == 2000


def test_trivial_L0():
    inst = generate({"family": "free-nilpotent", "shape": [7, 3, 2], "class_cap": 4, "p": 29,
                     "relations": "JI"})
    tw = _tower(inst, 3, 1)
    assert check_tower_invariants(tw).ok and verify_centralizer_property(tw).ok
    Zr = build_Z_and_report(tw)
    assert Zr.codim == 0 and Zr.nilpotency_class == Zr.ring_class == 2
