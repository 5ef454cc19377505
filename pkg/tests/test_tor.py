import random

import pytest
from hypothesis import given, settings, strategies as st

from dghomalg.complexes import ChainMap, cycles_and_boundaries, homology_at, sphere
from dghomalg.corpus import (acyclic_pair, exterior, massey_algebra, two_generator_z,
                             z2_over_z4, z4_truncated, z_mod)
from dghomalg.corpus import MonomialAlgebra
from dghomalg.dg_algebra import algebra_module, restricted_module, trivial_module
from dghomalg.linalg import ZZ, IntegersMod, PrimeField
from dghomalg.resolutions import (SplitModule, as_module, bar_resolution, ce_resolution,
                                  distinguished_resolution, ground_algebra, moore_resolution)
from dghomalg.tor import (Undefined, edge_and_suspension, emss, ext, gamma, is_kunneth,
                          module_map, semiflat_probe, tor, tor_les, triple_massey)

from gen import RINGS, random_complex
from oracles import integer_homology, integer_kunneth, prime_power_parts

F2 = PrimeField(2)


def _homology_orders(C):
    out = {}
    for n in C.degrees():
        free, tors = integer_homology(C.rank, lambda k: C.d(k).data if C.rank(k) and C.rank(k - 1)
                                      else [], n)
        out[n] = [0] * free + tors
    return out


# ---------------------------------------------------------------- Tor values

@pytest.mark.parametrize("method", ["moore", "bar", "distinguished"])
def test_tor_exterior_is_divided_powers(method):
    A = exterior()
    T = tor(trivial_module(A, "right"), trivial_module(A), method, top=8)
    assert T.table() == {n: "F2" if n % 2 == 0 else "0" for n in range(9)}


@pytest.mark.parametrize("make", [exterior, two_generator_z, massey_algebra,
                                  lambda: acyclic_pair(top=8)])
def test_methods_agree(make):
    A = make()
    N, M = trivial_module(A, "right"), trivial_module(A)
    tables = [tor(N, M, m, top=6) for m in ("moore", "bar", "distinguished")]
    for t in tables[1:]:
        assert tables[0].disagreements(t) == []


def test_tor_two_generator_z():
    A = two_generator_z()
    T = tor(trivial_module(A, "right"), trivial_module(A), "bar", top=8)
    assert [len(T.factors(n)) for n in range(9)] == [1, 0, 0, 1, 0, 0, 1, 0, 0]
    assert all(f == 0 for n in range(9) for f in T.factors(n))


def test_tor_with_algebra_is_module_homology():
    A = two_generator_z()
    T = tor(algebra_module(A, "right"), trivial_module(A), "moore", top=6)
    assert [len(T.factors(n)) for n in range(7)] == [1, 0, 0, 0, 0, 0, 0]


def test_classical_tor_over_z():
    R = ground_algebra(ZZ)
    T = tor(as_module(R, z_mod(2), "right"), as_module(R, z_mod(2)), "ce", top=4)
    assert [T.factors(n) for n in range(3)] == [(2,), (2,), ()]


def test_ext_over_z_and_exterior():
    R = ground_algebra(ZZ)
    E = ext(as_module(R, z_mod(2)), as_module(R, sphere(0, ZZ)), "ce", top=4)
    assert [E.factors(k) for k in range(3)] == [(), (2,), ()]
    A = exterior()
    E = ext(trivial_module(A), trivial_module(A), "moore", top=6)
    assert [len(E.factors(k)) for k in range(7)] == [1, 0, 1, 0, 1, 0, 1]
    E = ext(algebra_module(A), trivial_module(A), "moore", top=6)
    assert [len(E.factors(k)) for k in range(3)] == [1, 0, 0]


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_integer_tor_matches_kunneth(seed):
    rng = random.Random(seed)
    N = random_complex(ZZ, rng, lo=0, hi=2, pieces=3)
    M = random_complex(ZZ, rng, lo=0, hi=2, pieces=3)
    R = ground_algebra(ZZ)
    _, res = ce_resolution(M, top=6)
    T = tor(as_module(R, N, "right"), as_module(R, M), resolution=res, top=6)
    HN, HM = _homology_orders(N), _homology_orders(M)
    for n in range(0, 6):
        assert prime_power_parts(T.factors(n)) == integer_kunneth(HN, HM, n), n


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.sampled_from(RINGS))
def test_tor_against_ground_ring_is_homology(seed, ring):
    rng = random.Random(seed)
    M = random_complex(ring, rng, lo=0, hi=3)
    R = ground_algebra(ring)
    T = tor(as_module(R, sphere(0, ring), "right"), as_module(R, M), "ce", top=5)
    for n in range(0, 4):
        assert sorted(T.factors(n)) == sorted(homology_at(M, n).factors)


@settings(max_examples=20)
@given(st.integers(0, 10**6), st.sampled_from([F2, PrimeField(3), PrimeField(5)]))
def test_field_tor_ranks_multiply(seed, field):
    rng = random.Random(seed)
    N = random_complex(field, rng, lo=0, hi=2)
    M = random_complex(field, rng, lo=0, hi=2)
    R = ground_algebra(field)
    T = tor(as_module(R, N, "right"), as_module(R, M), "ce", top=5)
    for n in range(0, 5):
        want = sum(len(homology_at(N, p).factors) * len(homology_at(M, n - p).factors)
                   for p in range(0, n + 1))
        assert len(T.factors(n)) == want


# ---------------------------------------------------------------- EMSS

def test_emss_exterior_collapses():
    A = exterior()
    rep = emss(trivial_module(A, "right"), bar_resolution(trivial_module(A), top=7), top=6)
    assert rep.e2_mismatches == [] and rep.total_mismatches == []
    assert rep.e2_is_einf
    assert rep.pages[2].table() == {f"{p},{p}": "F2" for p in range(4)}


@pytest.mark.parametrize("build", [
    lambda M: bar_resolution(M, top=8),
    lambda M: distinguished_resolution(M, top=8),
    lambda M: moore_resolution(M, top=8)[1],
])
def test_emss_two_generator_z(build):
    A = two_generator_z()
    rep = emss(trivial_module(A, "right"), build(trivial_module(A)), top=8)
    assert rep.e2_mismatches == [] and rep.total_mismatches == []
    assert rep.pages[2].table() == {"0,0": "Z", "1,2": "Z", "2,4": "Z", "3,6": "Z"}


def test_spectral_sequence_converges():
    A = massey_algebra()
    T = tor(trivial_module(A, "right"), trivial_module(A), "bar", top=6)
    rep = emss(trivial_module(A, "right"), T.resolution, top=6)
    assert rep.sequence.convergence_failures() == []
    assert all(rep.sequence.page_failures(r) == [] for r in range(3))


# ---------------------------------------------------------------- Kunneth, semi-flatness, gamma

@pytest.mark.parametrize("make", [exterior, two_generator_z])
def test_resolutions_are_kunneth(make):
    M = trivial_module(make())
    for res in (bar_resolution(M, top=6), distinguished_resolution(M, top=6)):
        assert is_kunneth(res.X, top=5)


def test_torsion_quotient_is_not_kunneth():
    R = ground_algebra(ZZ)
    X = SplitModule(R, {0: [(0, 0)], 1: [(0, 1)]}, {1: [[2]]})
    v = is_kunneth(X, top=1)
    assert not v and v.degree == 0 and v.witness == "Z/2"


def _z4_probe(lo=-10, hi=10, top=8):
    R4 = ground_algebra(IntegersMod(4))
    X = as_module(R4, z4_truncated(lo, hi))
    _, P = ce_resolution(z2_over_z4(), top=top)
    f = module_map(P.alpha, as_module(R4, P.X.carrier, "right"),
                   as_module(R4, z2_over_z4(), "right"))
    return X, f


def test_truncated_z4_is_not_semiflat():
    X, f = _z4_probe()
    rep = semiflat_probe(X, [f], range(0, 9))
    assert not rep.verdict
    assert rep.failures and all(0 <= n <= 8 for _, n in rep.failures)


def test_free_module_is_semiflat():
    R4 = ground_algebra(IntegersMod(4))
    X = as_module(R4, sphere(0, IntegersMod(4)))
    _, f = _z4_probe()
    assert semiflat_probe(X, [f], range(0, 6)).verdict


def test_gamma_iso_for_resolution_of_free_module():
    A = two_generator_z()
    g = gamma(trivial_module(A, "right"), algebra_module(A), top=6)
    assert g.iso_degrees == list(range(0, 7))


def test_gamma_iso_on_bounded_free_complex():
    # bounded below and free, hence cofibrant
    R4 = ground_algebra(IntegersMod(4))
    g = gamma(as_module(R4, z2_over_z4(), "right"), as_module(R4, z4_truncated(0, 8)), top=8)
    assert g.iso_degrees == list(range(0, 9))


def test_gamma_fails_in_the_interior_of_wide_z4():
    R4 = ground_algebra(IntegersMod(4))
    g = gamma(as_module(R4, z2_over_z4(), "right"), as_module(R4, z4_truncated(-10, 10)), top=8)
    for n in range(0, 9):
        assert n not in g.iso_degrees
        assert g.source[n] == () and g.cokernel[n] == (2,)


# ---------------------------------------------------------------- Massey products

def test_massey_product_is_nonzero():
    A = massey_algebra()
    m = triple_massey(A, (1, [1]), (1, [1]), (1, [1]))
    assert m.degree == 4 and not m.contains_zero


def test_massey_undefined_when_products_survive():
    A = massey_algebra()
    assert isinstance(triple_massey(A, (0, [1]), (1, [1]), (1, [1])), Undefined)


def test_massey_well_defined_modulo_indeterminacy():
    A = massey_algebra()
    x = (1, [1])
    m = triple_massey(A, x, x, x)
    u, v = m.bounding
    for zu in cycles_and_boundaries(A.carrier, 3)[0] + [[0]]:
        for zv in cycles_and_boundaries(A.carrier, 3)[0] + [[0]]:
            alt = triple_massey(A, x, x, x, bounding=([a + b for a, b in zip(u, zu)],
                                                     [a + b for a, b in zip(v, zv)]))
            assert alt.coset_coords(alt.representative) == m.coset_coords(m.representative)


def test_massey_with_zero_entry_contains_zero():
    A = massey_algebra()
    assert triple_massey(A, (1, [0]), (1, [1]), (1, [1])).contains_zero


# ---------------------------------------------------------------- edge maps

def test_suspension_kills_decomposables():
    A = MonomialAlgebra(F2, (1,), 8, odd_polynomial=True)
    r = edge_and_suspension(A, top=5)
    assert r.sigma[1] == [[1]] and r.sigma_kernel[1] == []
    for n in range(2, 6):
        assert r.sigma_kernel[n] == [[1]] and r.decomposables[n]


def test_edge_map_on_exterior():
    r = edge_and_suspension(exterior(), top=5)
    assert r.sigma == {1: [[1]]} and r.sigma_kernel == {1: []}
    assert r.pi == {0: [[1]]} and r.pi_kernel == {0: []}


# ---------------------------------------------------------------- long exact sequences

def test_les_over_z():
    R = ground_algebra(ZZ)
    Z, Z2 = sphere(0, ZZ), z_mod(2)
    i = ChainMap(Z, Z, {0: [[2]]})
    j = ChainMap(Z, Z2, {0: [[1]]})
    mods = [as_module(R, C, "right") for C in (Z, Z, Z2)]
    rep = tor_les(i, j, mods, as_module(R, z_mod(2)), top=3)
    assert rep.all_exact
    assert rep.connecting[1] == [[1]]


def test_les_over_z4():
    R4 = ground_algebra(IntegersMod(4))
    a, b = z2_over_z4(), sphere(0, IntegersMod(4))
    i = ChainMap(a, b, {0: [[2]]}, check=False)
    j = ChainMap(b, a, {0: [[1]]}, check=False)
    mods = [as_module(R4, C, "right") for C in (a, b, a)]
    rep = tor_les(i, j, mods, as_module(R4, z4_truncated(0, 4)), top=4)
    assert rep.all_exact
    assert all(rep.connecting[n] == [[1]] for n in range(1, 5))


def test_les_over_exterior():
    A = exterior()
    N1 = restricted_module(A, sphere(1, F2), "right")
    N2 = algebra_module(A, "right")
    N3 = trivial_module(A, "right")
    i = ChainMap(N1.carrier, N2.carrier, {1: [[1]]}, check=False)
    j = ChainMap(N2.carrier, N3.carrier, {0: [[1]]}, check=False)
    rep = tor_les(i, j, (N1, N2, N3), trivial_module(A), top=6)
    assert rep.all_exact
    assert {n: c for n, c in rep.connecting.items() if c and c != [[]]} == \
        {2: [[1]], 4: [[1]], 6: [[1]]}


def test_les_rejects_non_exact_sequence():
    R = ground_algebra(ZZ)
    Z = sphere(0, ZZ)
    i = ChainMap(Z, Z, {0: [[2]]})
    j = ChainMap(Z, Z, {0: [[1]]})
    mods = [as_module(R, Z, "right")] * 3
    with pytest.raises(ValueError):
        tor_les(i, j, mods, as_module(R, Z), top=2)
