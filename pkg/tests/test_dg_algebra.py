import itertools
import random

import pytest
from hypothesis import given, strategies as st

from dghomalg.complexes import FinComplex, disk, homology, homology_at, sphere
from dghomalg.corpus import (acyclic_pair, cup1_algebra, dual_numbers, exterior, massey_algebra,
                             module_over_map, polynomial, truncated_quotient, two_generator_z,
                             z_mod)
from dghomalg.dg_algebra import (DGAlgebra, MissingStructure, NoCup1, NotFree, Projective,
                                 Unknown, algebra_module, check_relatively_projective,
                                 free_module, hom_over_A, homology_algebra, homology_module,
                                 restricted_module, tensor_over_A, trivial_module, validate_cup1)
from dghomalg.linalg import QQ, ZZ, Matrix, PrimeField

CORPUS = [exterior, dual_numbers, two_generator_z, acyclic_pair, cup1_algebra, massey_algebra,
          lambda: polynomial(QQ, (2, 2), 6), lambda: truncated_quotient(ZZ, 2, 3, 8)]


def monomial_count(degrees, n, odd_polynomial=False):
    """Monomials of degree n in free graded-commutative generators (enumeration)."""
    bound = [n // d if (d % 2 == 0 or odd_polynomial) else 1 for d in degrees]
    return sum(1 for e in itertools.product(*(range(b + 1) for b in bound))
               if sum(k * d for k, d in zip(e, degrees)) == n)


@pytest.mark.parametrize("make", CORPUS)
def test_corpus_algebras_validate(make):
    A = make()
    assert A.validate() == []
    assert not A.carrier.dd_violations()


@given(st.sampled_from(range(len(CORPUS))), st.integers(0, 10**6))
def test_products_are_associative(k, seed):
    A = CORPUS[k]()
    rng = random.Random(seed)
    degs = list(A.degrees())
    red = A.ring.reduce
    i, j, l = (rng.choice(degs) for _ in range(3))
    x, y, z = ([rng.randint(-2, 2) for _ in range(A.rank(t))] for t in (i, j, l))
    if i + j + l > A.hi:
        return
    lhs = A.product(i + j, A.product(i, x, j, y), l, z)
    rhs = A.product(i, x, j + l, A.product(j, y, l, z))
    assert [red(c) for c in lhs] == [red(c) for c in rhs]


def test_polynomial_ranks_match_monomial_enumeration():
    A = polynomial(QQ, (2, 3, 4), 9)
    for n in range(10):
        assert A.rank(n) == monomial_count((2, 3, 4), n)
    B = cup1_algebra(top=6)
    for n in range(7):
        assert B.rank(n) == monomial_count((1, 2, 2), n, odd_polynomial=True)


def test_unit_law_violation_reported():
    C = FinComplex(ZZ, {0: 1, 1: 1}, {1: [[2]]})
    good = {(0, 0, 0, 0): [1], (0, 0, 1, 0): [1], (1, 0, 0, 0): [1]}
    assert DGAlgebra(C, 0, good).validate() == []
    bad = dict(good)
    bad[(1, 0, 0, 0)] = [3]
    assert any("unit law fails on (1,0)" in m for m in DGAlgebra(C, 0, bad).validate())


def test_leibniz_violation_reported():
    C = FinComplex(ZZ, {0: 1, 1: 1, 2: 1}, {1: [[0]], 2: [[1]]})
    mul = {(0, 0, n, 0): [1] for n in range(3)}
    mul.update({(n, 0, 0, 0): [1] for n in range(3)})
    mul[(1, 0, 1, 0)] = [1]  # y^2 = z with dz = y: d(y^2) = y but dy y + ... = 0
    msgs = DGAlgebra(C, 0, mul).validate()
    assert any(m.startswith("Leibniz fails on (1,0),(1,0)") for m in msgs)


def test_homology_algebra_of_acyclic_pair_is_polynomial():
    A = acyclic_pair(top=8)
    HA = homology_algebra(A)
    assert [HA.rank(n) for n in range(9)] == [1, 0, 1, 0, 1, 0, 1, 0, 1]
    # x^k generates in degree 2k
    x = [1]
    for k in range(2, 5):
        x = HA.product(2 * (k - 1), x, 2, [1])
        assert x == [1]


def test_homology_algebra_two_generator_z():
    HA = homology_algebra(two_generator_z())
    assert [HA.rank(n) for n in range(6)] == [1, 0, 1, 0, 0, 0]
    assert HA.product(2, [1], 2, [1]) == []


def test_homology_algebra_refuses_torsion():
    with pytest.raises(NotFree):
        homology_algebra(dual_numbers())


def test_homology_module_classes():
    A = two_generator_z()
    M = algebra_module(A)
    HM = homology_module(M)
    assert [HM.rank(n) for n in range(6)] == [1, 0, 1, 0, 0, 0]
    assert HM.validate() == []


def test_cup1_certificates():
    assert validate_cup1(cup1_algebra(top=6)).valid
    assert validate_cup1(polynomial(PrimeField(2), (2,), 6)).valid
    with pytest.raises(NoCup1):
        validate_cup1(massey_algebra())


@pytest.mark.parametrize("make", [exterior, two_generator_z, massey_algebra])
def test_module_structures_validate(make):
    A = make()
    for side in ("left", "right"):
        assert algebra_module(A, side).validate() == []
    if A.aug is not None:
        assert trivial_module(A).validate() == []
        assert restricted_module(A, disk(2, A.ring)).validate() == []


def test_trivial_module_needs_augmentation():
    with pytest.raises(MissingStructure):
        trivial_module(dual_numbers())


@pytest.mark.parametrize("make", [exterior, two_generator_z, acyclic_pair])
def test_tensor_routes_agree(make):
    A = make()
    N = trivial_module(A, "right")
    X = free_module(A, disk(2, A.ring))
    S = tensor_over_A(N, X, route="shortcut")
    Q = tensor_over_A(N, X, route="coequalizer")
    for n in range(-1, 5):
        assert sorted(homology_at(S, n).factors) == sorted(homology_at(Q, n).factors)


def test_free_module_on_disk_is_acyclic():
    A = two_generator_z()
    X = free_module(A, disk(3, ZZ))
    assert X.validate() == []
    assert homology(X.carrier).is_zero()


def test_tensor_with_algebra_is_identity():
    A = exterior()
    M = restricted_module(A, sphere(2, A.ring))
    T = tensor_over_A(algebra_module(A, "right"), M)
    assert [len(homology_at(T, n).factors) for n in range(4)] == [0, 0, 1, 0]


def test_hom_over_algebra_is_complex():
    A = exterior()
    H, inc = hom_over_A(algebra_module(A), trivial_module(A))
    assert not H.dd_violations()
    assert len(homology_at(H, 0).factors) == 1


def test_relative_projectivity():
    A = exterior()
    assert isinstance(check_relatively_projective(free_module(A, sphere(0, A.ring))), Projective)
    assert isinstance(check_relatively_projective(algebra_module(A)), Projective)
    assert isinstance(check_relatively_projective(trivial_module(A)), Unknown)


def test_module_over_map_restricts_scalars():
    A = polynomial(ZZ, (2,), 6)
    B = truncated_quotient(ZZ, 2, 2, 6)
    f = {0: Matrix(ZZ, 1, 1, [[1]]), 2: Matrix(ZZ, 1, 1, [[1]])}
    N = module_over_map(A, B, f, side="right")
    assert N.validate() == []
    assert N.rank(2) == 1 and N.rank(4) == 0


def test_presented_module_carrier():
    C = z_mod(2)
    assert homology_at(C, 0).factors == (2,)
