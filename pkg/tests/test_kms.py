import numpy as np
import pytest

from frobenius_lie.errors import ContractViolation
from frobenius_lie.field import FieldParams, GF
from frobenius_lie.freelie import GradedFreeLie, IndexedGeneratorSet
from frobenius_lie.frobenius import FrobeniusShape, eigen_decompose, validate_action
from frobenius_lie.kms import (KMSSolver, check_assignment, fold, iterated_kms, scan_witness,
                               specialization_matches, specialize, zero_prefixes)
from frobenius_lie.universal import IdealWorkspace, quotient_ring


def test_zero_prefixes():
    assert zero_prefixes([1, 2, 1, 2], 3) == [2, 4]
    assert zero_prefixes([1, 1, 1], 3) == [3]
    assert zero_prefixes([3, 4], 7) == [2]
    assert zero_prefixes([3, 3], 7) == []


def test_input_already_in_target_form_is_unchanged():
    g = IndexedGeneratorSet(FrobeniusShape(3, 2, 2), (1, 1, 2))
    s = KMSSolver(g, 1, GF(7))
    r = s.transform((0, 1, 0))
    assert r.unchanged and [(t.coef, t.word) for t in r.terms] == [(1, (0, 1, 0))]
    assert all(r.checks.values())


def test_contract_violations():
    g = IndexedGeneratorSet(FrobeniusShape(3, 2, 2), (1,))
    s = KMSSolver(g, 1, GF(7))
    with pytest.raises(ContractViolation):
        s.transform((0,))
    with pytest.raises(ContractViolation):
        s.transform((0, 5))
    with pytest.raises(ContractViolation):
        KMSSolver(g, 1, GF(3))


@pytest.fixture(scope="module")
def seven_three_two():
    shape = FrobeniusShape(7, 3, 2)
    fp = FieldParams.create(29, 7)
    g = IndexedGeneratorSet(shape, (4, 2, 5))
    F = GradedFreeLie(g, fp.gf)
    ring, act, _ = quotient_ring(IdealWorkspace(F, 1), 3, fp, include_J=False)
    return g, fp, ring, act


def test_specialization_reproduces_value(seven_three_two):
    g, fp, ring, act = seven_three_two
    assert validate_action(act).ok
    s = KMSSolver(g, 1, fp.gf)
    r = s.transform((0, 3, 6))
    assert not r.unchanged and r.terms and all(r.checks.values())
    D = eigen_decompose(act)
    rng = np.random.default_rng(3)
    nonzero = 0
    for _ in range(4):
        assign = [fp.gf.matmul(rng.integers(0, 29, (1, ring.dim)), D.projections[i])[0]
                  for i in g.base_indices]
        assert check_assignment(act, g, assign)
        assert specialization_matches(act, g, assign, r)
        nonzero += bool(np.any(specialize(act, g, assign, r.word)))
    assert nonzero


def test_scanner_outcomes():
    g = IndexedGeneratorSet(FrobeniusShape(3, 2, 2), (1, 1, 2))
    assert scan_witness(fold([0, 1]), g, 1, 1) == "f1"
    assert scan_witness(fold([0, 2]), g, 2, 2) is None
    # [[y0, y0^h], y1] contains a zero-sum proper subcommutator
    assert scan_witness(((0, 1), 2), g, 3, 3) == "degenerate"


def test_iterated_kms_small():
    g = IndexedGeneratorSet(FrobeniusShape(3, 2, 2), (1, 1, 1, 1))
    r = iterated_kms(g, 1, 2, 2, (0, 2, 4, 6), GF(7), 3)
    assert r.checks["sound_mod_I"] is True and r.checks["multiplicities"]
    assert all(w is not None for w in r.witnesses)
