import random
from itertools import product

import pytest
from hypothesis import given, strategies as st

from dghomalg.complexes import (ChainMap, FinComplex, disk, sphere, sum_inclusion,
                                sum_projection)
from dghomalg.corpus import z4_truncated
from dghomalg.linalg import ZZ, IntegersMod, Matrix
from dghomalg.model import (LiftSquare, No, PreconditionFailed, PresentedMap, Yes,
                            enriched_lift_IR, enriched_lift_JR, factor_cocylinder,
                            factor_cylinder, factor_onestep_J, is_q_fibration,
                            is_q_fibration_presented, is_r_fibration, is_r_fibration_presented,
                            normalize_split_exact, solve_lift, split_mono_retractions,
                            verify_ir_witness, verify_lift)

from gen import (RINGS, acyclic_cofibration_square, cofibration_acyclic_fibration_square,
                 random_chain_map, random_complex)
from oracles import elements, span

seeds = st.integers(0, 10_000)
FINITE = [r for r in RINGS if r != ZZ]


def brute_surjective(f):
    ring = f.ring
    for n in f.degrees():
        k = f.target.rank(n)
        if k and len(span(ring, f.at(n).columns(), k)) != len(list(product(elements(ring),
                                                                          repeat=k))):
            return False
    return True


def brute_split(f):
    """Some graded section exists: search column by column over all vectors."""
    ring = f.ring
    for n in f.degrees():
        k, s = f.target.rank(n), f.source.rank(n)
        for j in range(k):
            e = [int(i == j) for i in range(k)]
            if not any([ring.reduce(x) for x in f.at(n).apply(list(v))] == e
                       for v in product(elements(ring), repeat=s)):
                return False
    return True


@given(seeds, st.sampled_from(FINITE))
def test_fibration_predicates_against_enumeration(seed, ring):
    rng = random.Random(seed)
    X = random_complex(ring, rng, hi=2, pieces=3)
    Y = random_complex(ring, rng, hi=2, pieces=3)
    f = random_chain_map(X, Y, rng)
    assert is_q_fibration(f) == brute_surjective(f)
    assert bool(is_r_fibration(f)) == brute_split(f)


def test_split_epi_and_non_split_epi_over_z4():
    R = IntegersMod(4)
    # Z/4 -> Z/4 multiplication by 2 is not onto
    f = ChainMap(sphere(0, R), sphere(0, R), {0: [[2]]})
    assert not is_q_fibration(f)
    v = is_r_fibration(f)
    assert isinstance(v, No) and v.degree == 0
    g = sum_projection([sphere(0, R), sphere(0, R)], 1)
    w = is_r_fibration(g)
    assert isinstance(w, Yes)
    assert all(g.at(n) @ s == Matrix.identity(R, 1) for n, s in w.witness.items())
    assert bool(enriched_lift_JR(g))


def test_presented_epi_without_section():
    # Z/4 -> Z/2 is onto but does not split
    p = PresentedMap(ZZ, (4,), (2,), ((1,),))
    assert p.is_epi() and p.section() is None
    assert is_q_fibration_presented({0: p})
    assert isinstance(is_r_fibration_presented({0: p}), No)
    q = PresentedMap(ZZ, (2, 4), (2,), ((1, 0),))
    assert q.section() is not None


def test_enriched_lift_against_ir():
    ring = ZZ
    # sphere(0) -> 0 is split onto but not acyclic
    p = ChainMap(sphere(0, ring), FinComplex(ring, {}), {})
    assert isinstance(enriched_lift_IR(p), No)
    # B + D^2 -> B is an r-acyclic r-fibration
    B = sphere(0, ring)
    q = sum_projection([B, disk(2, ring)], 0)
    v = enriched_lift_IR(q)
    assert isinstance(v, Yes) and verify_ir_witness(q, v.witness) == []


@pytest.mark.parametrize("factor", [factor_cylinder, factor_cocylinder, factor_onestep_J])
@given(seed=seeds, ring=st.sampled_from(RINGS))
def test_factorizations_recompose(factor, seed, ring):
    rng = random.Random(seed)
    X = random_complex(ring, rng, hi=2)
    Y = random_complex(ring, rng, hi=2)
    f = random_chain_map(X, Y, rng)
    fac = factor(f)
    assert fac.verify() == []


@given(seeds, st.sampled_from(RINGS))
def test_lifts_exist_for_acyclic_cofibrations(seed, ring):
    sq = acyclic_cofibration_square(ring, random.Random(seed))
    lam = solve_lift(sq, "q", "i")
    assert lam is not None and verify_lift(sq, lam) == []


@given(seeds, st.sampled_from(RINGS))
def test_lifts_exist_against_acyclic_fibrations(seed, ring):
    sq = cofibration_acyclic_fibration_square(ring, random.Random(seed))
    for structure in ("q", "r", "h"):
        lam = solve_lift(sq, structure, "p")
        assert lam is not None and verify_lift(sq, lam) == []


def test_lift_preconditions_are_checked():
    R = ZZ
    S = sphere(0, R)
    twice = ChainMap(S, S, {0: [[2]]})
    ident = ChainMap.identity(S)
    with pytest.raises(PreconditionFailed):
        solve_lift(LiftSquare(twice, ident, ident, twice), "q", "p")
    zero = FinComplex(R, {})
    # sphere(0) -> 0 is a fibration but not acyclic
    p = ChainMap(S, zero, {})
    sq = LiftSquare(ChainMap(zero, S, {}), p, ChainMap(zero, S, {}), ChainMap(S, zero, {}))
    with pytest.raises(PreconditionFailed):
        solve_lift(sq, "q", "p")


def test_split_mono_retractions():
    R = IntegersMod(4)
    assert split_mono_retractions(ChainMap(sphere(0, R), sphere(0, R), {0: [[2]]})) is None
    i = sum_inclusion([sphere(0, R), sphere(0, R)], 0)
    r = split_mono_retractions(i)
    assert r[0] @ i.at(0) == Matrix.identity(R, 1)


def test_normalize_split_exact():
    R = ZZ
    X, Z = disk(1, R), sphere(0, R)
    i = sum_inclusion([X, Z], 0)
    g = sum_projection([X, Z], 1)
    N = normalize_split_exact(i, g)
    for n in N.sum.degrees():
        assert N.psi.at(n) @ N.phi.at(n) == Matrix.identity(R, N.sum.rank(n))
    assert not N.phi.commutation_violations()


def test_z4_is_not_r_acyclic():
    X = z4_truncated(0, 8)
    p = ChainMap(X, FinComplex(X.ring, {}), {})
    assert is_q_fibration(p)
    assert isinstance(enriched_lift_IR(p), No)
