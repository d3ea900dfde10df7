import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frobenius_lie.errors import ContractViolation
from frobenius_lie.field import GF, FieldParams, canonical_omega
from frobenius_lie.linalg import Subspace, kernel_space, left_kernel, solve_left

from oracles import rank_mod_p

FIELDS = [GF(7), GF(2, 3), GF(5, 2), GF(29)]


@pytest.mark.parametrize("gf", FIELDS, ids=lambda g: f"F{g.q}")
def test_field_axioms_exhaustive_small(gf):
    xs = np.arange(gf.q)
    a, b = np.meshgrid(xs, xs, indexing="ij")
    assert np.array_equal(gf.add(a, b), gf.add(b, a))
    assert np.array_equal(gf.mul(a, b), gf.mul(b, a))
    assert np.all(gf.add(a, gf.neg(a)) == 0)
    nz = xs[1:]
    assert np.all(gf.mul(nz, gf.inv(nz)) == 1)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 24), st.integers(0, 24), st.integers(0, 24))
def test_distributivity_f25(a, b, c):
    gf = GF(5, 2)
    assert gf.mul(a, gf.add(b, c)) == gf.add(gf.mul(a, b), gf.mul(a, c))


def test_omega_is_canonical():
    assert FieldParams.create(7, 3).omega == 2
    fp = FieldParams.create(2, 7)
    assert fp.e == 3 and fp.gf.order(fp.omega) == 7
    fp = FieldParams.create(11, 4)
    assert fp.e == 2
    with pytest.raises(ContractViolation):
        canonical_omega(GF(7), 4)


def test_bad_field_inputs():
    with pytest.raises(ContractViolation):
        GF(9)
    with pytest.raises(ContractViolation):
        GF(2, 2, (1, 0, 1))  # x^2 + 1 = (x + 1)^2 over F_2


def test_subspace_rank_matches_oracle():
    rng = np.random.default_rng(1)
    gf = GF(7)
    for _ in range(30):
        M = rng.integers(0, 7, (rng.integers(1, 6), 6))
        M[rng.random(M.shape) < 0.5] = 0
        assert Subspace.span(gf, M, 6).dim == rank_mod_p(M, 7)


def test_subspace_lattice_operations():
    gf = GF(5)
    rng = np.random.default_rng(2)
    for _ in range(20):
        U = Subspace.span(gf, rng.integers(0, 5, (3, 6)), 6)
        V = Subspace.span(gf, rng.integers(0, 5, (3, 6)), 6)
        S, I = U + V, U.intersect(V)
        assert S.dim + I.dim == U.dim + V.dim
        assert I.issubspace(U) and I.issubspace(V) and U.issubspace(S)
        x = gf.random(rng, (6,))
        r = U.reduce(x)
        assert U.contains(gf.sub(x, r[0]))


def test_kernel_and_solve():
    gf = GF(7)
    M = np.array([[1, 2], [2, 4], [0, 1]])
    K = left_kernel(gf, M)
    assert K.shape[0] == 1 and not np.any(gf.matmul(K, M))
    assert kernel_space(gf, M).dim == 1
    B = np.array([[3, 5]])
    X = solve_left(gf, M, B)
    assert np.array_equal(gf.matmul(X, M), B)
    assert solve_left(gf, np.array([[1, 2]]), np.array([[1, 0]])) is None


def test_zero_ambient():
    gf = GF(7)
    Z = Subspace.full(gf, 0)
    assert Z.dim == 0 and Z == Subspace.zero(gf, 0)
