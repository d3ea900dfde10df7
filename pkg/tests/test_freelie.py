import itertools

import numpy as np
import pytest

from frobenius_lie.errors import ContractViolation, ResourceLimitError
from frobenius_lie.field import GF
from frobenius_lie.freelie import (Block, GradedFreeLie, IndexedGeneratorSet, apply_fh_action,
                                   build_hall_basis, content_dimension, default_prime, is_lyndon,
                                   lyndon_tree, lyndon_words, standard_factorization, witt_dimension)
from frobenius_lie.frobenius import FrobeniusShape

from oracles import free_lie_span_dim, necklace_count

# Witt numbers for 2 generators, weights 1..10
WITT_2 = (2, 1, 2, 3, 6, 9, 18, 30, 56, 99)


def test_witt_frozen_values():
    assert tuple(witt_dimension(2, w) for w in range(1, 11)) == WITT_2
    assert witt_dimension(3, 4) == 18 and witt_dimension(4, 3) == 20


@pytest.mark.parametrize("g", [1, 2, 3])
def test_lyndon_words_match_necklaces(g):
    words = list(lyndon_words(g, 6))
    for w in range(1, 7):
        assert sum(len(x) == w for x in words) == necklace_count(g, w)
    assert all(is_lyndon(x) for x in words)
    assert words == sorted(words)


def test_standard_factorization():
    assert standard_factorization((0, 0, 1)) == ((0,), (0, 1))
    assert standard_factorization((0, 1, 1)) == ((0, 1), (1,))
    assert lyndon_tree((0, 0, 1, 0, 1)) == ((0, (0, 1)), (0, 1))
    with pytest.raises(ContractViolation):
        standard_factorization((1, 0))


def test_content_dimension_by_brute_force():
    for content in [(2, 1), (2, 2), (3, 1, 1), (2, 2, 2), (1, 1, 1, 1)]:
        letters = [a for a, c in enumerate(content) for _ in range(c)]
        words = set(itertools.permutations(letters))
        assert content_dimension(content) == sum(is_lyndon(w) for w in words)


def test_blocks_are_independent():
    gf = GF(7)
    for content in [(2, 1), (2, 2), (3, 2), (2, 1, 1)]:
        b = Block(gf, content)
        assert b.dim == content_dimension(content)
        # unitriangular on Lyndon words: P restricted to the Lyndon columns is invertible
        assert b.Pinv.shape == (b.dim, b.dim)


@pytest.mark.parametrize("g,w", [(3, 4), (3, 5), (2, 5)])
def test_brute_force_span(g, w):
    assert free_lie_span_dim(g, w) == witt_dimension(g, w)


def test_hall_basis_graded():
    gens = IndexedGeneratorSet(FrobeniusShape(3, 2, 2), (1,))
    T = build_hall_basis(gens, 6)
    assert T.dims_by_weight == WITT_2[:6]
    for h in T.hall:
        assert h.index == sum(gens.index(a) * c for a, c in enumerate(h.content)) % 3
    tabs = apply_fh_action(T)
    gf = T.gf
    for M in tabs.h_matrices:
        assert np.array_equal(gf.matmul(M, M), gf.eye(M.shape[0]))


def test_hall_caps():
    gens = IndexedGeneratorSet(FrobeniusShape(3, 2, 2), (1, 1, 2, 1))
    with pytest.raises(ResourceLimitError) as exc:
        build_hall_basis(gens, 4, max_generators=6)
    assert exc.value.requested == sum(witt_dimension(8, w) for w in range(1, 5))


def test_free_lie_jacobi_and_antisymmetry():
    gens = IndexedGeneratorSet(FrobeniusShape(3, 2, 2), (1,))
    gf = GF(7)
    F = GradedFreeLie(gens, gf)
    D1, x = F.generator_vector(0)
    _, y = F.generator_vector(1)
    Dxy, xy = F.bracket_all(D1, x, D1, y)
    _, yx = F.bracket_all(D1, y, D1, x)
    assert np.array_equal(gf.add(xy, yx), np.zeros_like(xy))
    # [[x,y],x] + [[y,x],x] = 0 and Jacobi on (x, y, x)
    _, a = F.bracket_all(Dxy, xy, D1, x)
    _, b = F.word_vector((0, 1, 0))
    assert np.array_equal(a[0], b)
    _, c = F.word_vector((1, 0, 0))
    assert np.array_equal(gf.add(b, c), np.zeros_like(b))


def test_default_prime():
    assert default_prime(3, 2) == 7
    assert default_prime(7, 3) == 29
    assert default_prime(3, 2, 10) == 13
