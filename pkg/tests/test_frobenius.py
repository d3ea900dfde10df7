import numpy as np
import pytest

from frobenius_lie.errors import ContractViolation
from frobenius_lie.frobenius import (FrobeniusAction, FrobeniusShape, check_grading_laws,
                                     eigen_decompose, fixed_subring, validate_action,
                                     validate_frobenius_shape)
from frobenius_lie.instances import generate, heisenberg


@pytest.mark.parametrize("shape", [(3, 2, 2), (7, 3, 2), (5, 4, 2), (5, 2, 4), (7, 2, 6)])
def test_valid_shapes(shape):
    assert validate_frobenius_shape(*shape)[0]


@pytest.mark.parametrize("shape,frag", [((7, 2, 2), "r^q"), ((6, 2, 5), "gcd"), ((3, 1, 2), "q = 1"),
                                        ((5, 2, 7), "r = 7")])
def test_invalid_shapes_are_named(shape, frag):
    ok, diag = validate_frobenius_shape(*shape)
    assert not ok and frag in diag[0]
    with pytest.raises(ContractViolation):
        FrobeniusShape(*shape)


def test_heisenberg_decomposition():
    inst = heisenberg()
    A = inst.action
    assert validate_action(A).ok
    D = eigen_decompose(A)
    assert D.dims == (1, 1, 1)
    x, y, z = np.eye(3, dtype=np.int64)
    assert D.component_of(x) == 1 and D.component_of(y) == 2 and D.component_of(z) == 0
    assert D.component_of(x + y) is None
    assert check_grading_laws(D, A).ok
    F = fixed_subring(A, "F")
    assert F.space.dim == 1 and F.nilpotency_class == 1
    H = fixed_subring(A, "H")
    assert H.space.dim == 1 and H.bracket_closed


def test_projections_are_orthogonal_idempotents():
    A = generate({"family": "free-nilpotent", "shape": [7, 3, 2], "class_cap": 3, "p": 29}).action
    gf = A.gf
    D = eigen_decompose(A)
    d = A.ring.dim
    total = np.zeros((d, d), dtype=np.int64)
    for j, Pj in enumerate(D.projections):
        total = gf.add(total, Pj)
        for k, Pk in enumerate(D.projections):
            prod = gf.matmul(Pj, Pk)
            assert np.array_equal(prod, Pj if j == k else np.zeros_like(Pj))
    assert np.array_equal(total, gf.eye(d))


def test_bad_actions_flagged():
    inst = heisenberg()
    A = inst.action
    gf = A.gf
    bad_phi = FrobeniusAction(A.field, A.ring, gf.eye(3), A.h, A.shape)
    assert "phi_order" in validate_action(bad_phi).kinds()
    not_auto = np.array([[2, 0, 0], [0, 4, 0], [0, 0, 2]])
    rep = validate_action(FrobeniusAction(A.field, A.ring, not_auto, A.h, A.shape))
    assert "automorphism" in rep.kinds()
    swap_only = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    assert "automorphism" in validate_action(FrobeniusAction(A.field, A.ring, A.phi, swap_only, A.shape)).kinds()


def test_extension_field_instance():
    # cube roots of unity over F_5 live in F_25
    A = heisenberg(p=5).action
    assert A.field.e == 2 and validate_action(A).ok
    D = eigen_decompose(A)
    assert sum(D.dims) == A.ring.dim
    assert check_grading_laws(D, A).ok
