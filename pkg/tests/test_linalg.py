import random

import pytest
from hypothesis import given, strategies as st

from dghomalg.linalg import (QQ, ZZ, IntegersMod, Matrix, ModulePresentation, NotASubmodule,
                             PrimeField, Subquotient, UnsupportedRing, describe_factors,
                             format_element, howell_form, kernel, parse_element, rank,
                             ring_from_json, smith_normal_form, solve)

from oracles import (factor_torsion_counts, minors_gcd, solutions, span,
                     subquotient_torsion_counts)

FINITE = [IntegersMod(4), IntegersMod(6), IntegersMod(8), PrimeField(2), PrimeField(3)]


def small_matrix(ring_elems, max_rows=3, max_cols=3):
    return st.integers(1, max_rows).flatmap(lambda r: st.integers(1, max_cols).flatmap(
        lambda c: st.lists(st.lists(ring_elems, min_size=c, max_size=c),
                           min_size=r, max_size=r)))


def test_ring_json_round_trip():
    for r in [ZZ, QQ, IntegersMod(12), PrimeField(7)]:
        assert ring_from_json(r.to_json()) == r
    with pytest.raises(ValueError):
        ring_from_json({"kind": "H"})
    with pytest.raises(ValueError):
        PrimeField(9)


def test_element_strings():
    assert parse_element(QQ, "-3/6") == QQ.reduce(-1) / 2
    assert parse_element(IntegersMod(4), "7") == 3
    assert parse_element(PrimeField(5), "1/2") == 3
    assert format_element(parse_element(QQ, "2/4")) == "1/2"


@given(small_matrix(st.integers(-6, 6)))
def test_smith_form_oracle(rows):
    m = Matrix(ZZ, len(rows), len(rows[0]), rows)
    U, D, V = smith_normal_form(m)
    assert U @ m @ V == D
    diag = [D.data[i][i] for i in range(min(m.rows, m.cols))]
    nz = [d for d in diag if d]
    assert all(d > 0 for d in nz)
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    assert not any(D.data[i][j] for i in range(m.rows) for j in range(m.cols) if i != j)
    # determinantal divisors d_1 ... d_k = gcd of k x k minors
    prod = 1
    for k, d in enumerate(diag, start=1):
        prod *= d
        assert prod == minors_gcd(rows, k)


def test_smith_form_needs_integers():
    with pytest.raises(UnsupportedRing):
        smith_normal_form(Matrix(IntegersMod(4), 1, 1, [[2]]))


@pytest.mark.parametrize("n", [4, 6, 8, 12])
def test_howell_form_is_canonical(n):
    ring = IntegersMod(n)
    rng = random.Random(n)
    for _ in range(30):
        r, c = rng.randint(1, 3), rng.randint(1, 3)
        rows = [[rng.randrange(n) for _ in range(c)] for _ in range(r)]
        m = Matrix(ring, r, c, rows)
        H = howell_form(m)
        # same row span as m, checked by enumeration
        assert span(ring, H.data, c) == span(ring, rows, c)
        # invariant under invertible row operations
        k = rng.randrange(r)
        u = rng.choice([u for u in range(1, n) if ring.is_unit(u)])
        mixed = [list(x) for x in rows]
        mixed[k] = [ring.reduce(u * x) for x in mixed[k]]
        if r > 1:
            j = (k + 1) % r
            t = rng.randrange(n)
            mixed[j] = [ring.reduce(a + t * b) for a, b in zip(mixed[j], mixed[k])]
        assert howell_form(Matrix(ring, r, c, mixed)) == H


@pytest.mark.parametrize("ring", FINITE, ids=str)
def test_solve_and_kernel_against_enumeration(ring):
    rng = random.Random(str(ring))
    q = ring.n if hasattr(ring, "n") else ring.p
    for _ in range(25):
        r, c = rng.randint(1, 3), rng.randint(1, 3)
        rows = [[rng.randrange(q) for _ in range(c)] for _ in range(r)]
        b = [rng.randrange(q) for _ in range(r)]
        m = Matrix(ring, r, c, rows)
        x = solve(m, b)
        brute = solutions(ring, rows, b)
        assert (x is None) == (not brute)
        if x is not None:
            assert m.apply(x) == [ring.reduce(t) for t in b]
        K = kernel(m)
        assert set(span(ring, K.columns(), c)) == set(solutions(ring, rows, [0] * r))


def test_rank_over_fields_and_refusal_over_zn():
    assert rank(Matrix(QQ, 2, 2, [[1, 2], [2, 4]])) == 1
    assert rank(Matrix(ZZ, 2, 2, [[2, 0], [0, 3]])) == 2
    with pytest.raises(UnsupportedRing):
        rank(Matrix(IntegersMod(4), 1, 1, [[2]]))


@pytest.mark.parametrize("ring", FINITE, ids=str)
def test_subquotient_invariants_against_enumeration(ring):
    rng = random.Random(repr(ring))
    q = ring.n if hasattr(ring, "n") else ring.p
    for _ in range(20):
        dim = rng.randint(1, 3)
        z = [[rng.randrange(q) for _ in range(dim)] for _ in range(rng.randint(0, 3))]
        b = []
        for _ in range(rng.randint(0, 2) if z else 0):
            t = [rng.randrange(q) for _ in z]
            b.append([ring.reduce(sum(c * v[i] for c, v in zip(t, z))) for i in range(dim)])
        S = Subquotient(ring, dim, z, b)
        assert factor_torsion_counts(q, S.moduli) == subquotient_torsion_counts(ring, dim, z, b)
        assert S.presentation.order() == len(span(ring, z, dim)) // len(span(ring, b, dim))
        for v in list(span(ring, z, dim))[:10]:
            c = S.coords(list(v))
            assert len(c) == len(S.factors)


def test_subquotient_over_integers():
    S = Subquotient(ZZ, 2, [[1, 0], [0, 1]], [[2, 4]])
    assert sorted(S.factors) == [0, 2]
    assert S.is_zero_class([2, 4])
    assert not S.is_zero_class([1, 2])
    with pytest.raises(NotASubmodule):
        Subquotient(ZZ, 2, [[2, 0]], []).coords([1, 0])


@given(st.lists(st.integers(0, 6), max_size=4))
def test_presentation_from_factors_is_canonical(fs):
    fs = [f for f in fs if f != 1]
    P = ModulePresentation.from_factors(ZZ, fs)
    assert P.free_rank() == fs.count(0)
    torsion = [f for f in P.factors if f]
    assert all(b % a == 0 for a, b in zip(torsion, torsion[1:]))
    prod = 1
    for f in fs:
        prod *= f or 1
    got = 1
    for f in torsion:
        got *= f
    assert got == prod
    assert ModulePresentation.from_factors(ZZ, list(P.factors)) == P


def test_describe_factors():
    assert describe_factors(ZZ, ()) == "0"
    assert describe_factors(ZZ, (2, 0, 0)) == "Z/2 + Z^2"
    assert describe_factors(PrimeField(2), (0,)) == "F2"


@given(small_matrix(st.integers(-4, 4)), small_matrix(st.integers(-4, 4)))
def test_matmul_associates_with_apply(a, b):
    A = Matrix(ZZ, len(a), len(a[0]), a)
    B = Matrix(ZZ, len(b), len(b[0]), b)
    if A.cols != B.rows:
        return
    v = [1] * B.cols
    assert (A @ B).apply(v) == A.apply(B.apply(v))


def test_howell_two_by_two_over_z4():
    ring = IntegersMod(4)
    H = howell_form(Matrix(ring, 2, 2, [[2, 2], [0, 2]]))
    assert H == Matrix(ring, 2, 2, [[2, 0], [0, 2]])
    # the row span is {0, 2} x {0, 2}
    assert len(span(ring, H.data, 2)) == 4
