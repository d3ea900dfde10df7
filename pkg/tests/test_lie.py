import numpy as np
import pytest

from frobenius_lie.errors import StructuralError
from frobenius_lie.field import GF
from frobenius_lie.instances import generate, heisenberg
from frobenius_lie.lie import (LieRing, bracket_eval, direct_sum, generated_ideal, generated_subring,
                               is_lie_ring, lower_central_series, nilpotency_class, quotient,
                               validate_lie_ring)

from oracles import dense_structure, jacobi_ok, nilpotency_class_dense


def test_heisenberg_basics():
    L = heisenberg().ring
    x, y, z = np.eye(3, dtype=np.int64)
    assert np.array_equal(L.bracket(x, y), z)
    assert np.array_equal(L.bracket(y, x), 6 * z)
    assert not np.any(L.bracket(x, z))
    assert nilpotency_class(L) == 2
    assert lower_central_series(L).dims == (3, 1, 0)
    assert validate_lie_ring(L).ok


def test_bracket_eval_left_normed():
    L = heisenberg().ring
    x, y, z = np.eye(3, dtype=np.int64)
    assert np.array_equal(bracket_eval(L, [x, y]), z)
    assert not np.any(bracket_eval(L, [x, y, x]))
    assert np.array_equal(bracket_eval(L, [[y, x]]), 6 * z)


def test_jacobi_violation_named():
    gf = GF(7)
    L = LieRing(gf, 4, [(0, 1, 2, 1), (1, 2, 3, 1), (0, 3, 1, 1)])
    rep = validate_lie_ring(L)
    assert rep.kinds() == {"jacobi"} and not jacobi_ok(L.table, 4, 7)


def test_antisymmetry_violations():
    gf = GF(7)
    assert validate_lie_ring(LieRing(gf, 2, [(0, 0, 1, 1)])).kinds() == {"antisymmetry"}
    assert validate_lie_ring(LieRing(gf, 2, [(0, 1, 1, 1), (1, 0, 1, 1)])).kinds() == {"antisymmetry"}
    assert validate_lie_ring(LieRing(gf, 2, [(0, 1, 1, 1), (1, 0, 1, 6)])).ok


def test_structural_errors():
    gf = GF(7)
    with pytest.raises(StructuralError):
        LieRing(gf, 2, [(0, 2, 1, 1)])
    with pytest.raises(StructuralError):
        LieRing(gf, 2, [(0, 1, 1, 9)])
    with pytest.raises(StructuralError):
        LieRing(gf, 2, [(0, 1, 1, 1), (0, 1, 1, 2)])


@pytest.mark.parametrize("desc", [
    {"family": "free-nilpotent", "shape": [3, 2, 2], "class_cap": 4},
    {"family": "free-nilpotent", "shape": [7, 3, 2], "class_cap": 3, "p": 29},
    {"family": "heisenberg-plus-abelian", "k": 3},
])
def test_generated_rings_match_dense_oracle(desc):
    L = generate(desc).ring
    p = L.gf.p
    assert jacobi_ok(L.table, L.dim, p)
    assert is_lie_ring(L)
    C = dense_structure(L.table, L.dim, p)
    assert nilpotency_class(L) == nilpotency_class_dense(C, p)
    assert np.array_equal(L.dense() % p, C)


def test_subring_ideal_quotient():
    L = generate({"family": "free-nilpotent", "shape": [3, 2, 2], "class_cap": 3}).ring
    g = L.generator_vectors()
    assert generated_subring(L, g[:1]).dim == 1
    assert generated_subring(L, g).dim == L.dim
    I = generated_ideal(L, lower_central_series(L).terms[2].basis)
    Q = quotient(L, I)
    assert Q.ring.dim == L.dim - I.dim and nilpotency_class(Q.ring) == 2


def test_direct_sum_class():
    H = heisenberg().ring
    S = direct_sum(H, H)
    assert S.dim == 6 and nilpotency_class(S) == 2 and validate_lie_ring(S).ok
