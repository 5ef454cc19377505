"""Acceptance criteria 1-10.

Each ``criterion_N`` returns (ok, detail).  Under pytest every criterion is
a test and a PASS/FAIL line per criterion is printed in the terminal
summary; ``python3 tests/test_acceptance.py`` prints the same lines.
"""

import random
import sys
import time
from math import comb
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dghomalg.complexes import (ChainMap, FinComplex, contracting_homotopy, disk,
                                homology_at, is_h_equivalence, is_quasi_iso, sphere,
                                sum_projection)
from dghomalg.corpus import (acyclic_pair, cup1_algebra, dual_numbers, exterior, massey_algebra,
                             module_over_map, polynomial, truncated_quotient, two_generator_z,
                             z2_over_z4, z4_truncated, z_mod)
from dghomalg.dg_algebra import (algebra_module, restricted_module, tensor_over_A,
                                 trivial_module, validate_cup1)
from dghomalg.linalg import QQ, ZZ, IntegersMod, Matrix, PrimeField
from dghomalg.model import (check_lift_hypotheses, factor_cocylinder, factor_cylinder,
                            factor_onestep_J, is_q_fibration, is_r_fibration, solve_lift,
                            split_mono_retractions, verify_lift)
from dghomalg.resolutions import (as_module, bar_resolution, ce_resolution, check_filtration,
                                  filtration_implies, ground_algebra, koszul_e1_violations,
                                  koszul_resolution, verify_bar_witness)
from dghomalg.tor import emss, module_map, semiflat_probe, tor, tor_les

from gen import (RINGS, acyclic_cofibration_square, cofibration_acyclic_fibration_square,
                 random_chain_map, random_complex)

F2, F5 = PrimeField(2), PrimeField(5)
RESULTS = {}


def _ranks(tbl, n):
    return len(tbl.factors(n))


# ---------------------------------------------------------------- 1

def criterion_1():
    t0 = time.perf_counter()
    X = z4_truncated(0, 8)
    interior = all(homology_at(X, n).is_zero() for n in range(1, 8))
    v = contracting_homotopy(X, (1, 7))
    dt = time.perf_counter() - t0
    ok = interior and not v and v.reason == "infeasible" and dt < 1
    return ok, f"H = 0 on 1..7, NotContractible at degree {v.degree} ({v.reason}), {dt:.2f}s"


# ---------------------------------------------------------------- 2

def criterion_2():
    t0 = time.perf_counter()
    R4 = ground_algebra(IntegersMod(4))
    X = as_module(R4, z4_truncated(-10, 10))
    _, P = ce_resolution(z2_over_z4(), pmax=8, top=8)
    Pm = as_module(R4, P.X.carrier, "right")
    Z2 = as_module(R4, z2_over_z4(), "right")
    PX = tensor_over_A(Pm, X, route="coequalizer")
    ZX = tensor_over_A(Z2, X, route="coequalizer")
    interior = range(0, 9)
    zero = all(homology_at(PX, n).is_zero() for n in interior)
    z2 = all(homology_at(ZX, n).factors == (2,) for n in interior)
    probe = semiflat_probe(X, [module_map(P.alpha, Pm, Z2)], interior)
    dt = time.perf_counter() - t0
    ok = zero and z2 and not probe.verdict and dt < 1
    return ok, (f"H(P(x)X) = 0 and H(Z/2(x)X) = Z/2 on 0..8, first failing degree "
                f"{probe.verdict.degree}, {dt:.2f}s")


# ---------------------------------------------------------------- 3

def _triples():
    A = exterior()
    yield "E[y]; F2, F2", trivial_module(A, "right"), trivial_module(A)
    yield "E[y]; A, F2", algebra_module(A, "right"), trivial_module(A)
    B = two_generator_z()
    yield "Z<x,y>; Z, Z", trivial_module(B, "right"), trivial_module(B)
    yield "Z<x,y>; A, Z", algebra_module(B, "right"), trivial_module(B)
    C = massey_algebra()
    yield "Massey; F2, F2", trivial_module(C, "right"), trivial_module(C)
    D = acyclic_pair(top=10)
    yield "P[x](x)K; Z, Z", trivial_module(D, "right"), trivial_module(D)


def criterion_3():
    bad, names = [], []
    for name, N, M in _triples():
        tables = [tor(N, M, m, top=8) for m in ("moore", "distinguished", "bar")]
        full = all(t.window[1] >= 8 for t in tables)
        if not full or any(tables[0].disagreements(t) for t in tables[1:]):
            bad.append(name)
        names.append(name)
    return not bad, f"{len(names)} triples agree through degree 8" if not bad else f"disagree: {bad}"


# ---------------------------------------------------------------- 4

def _corpus_modules():
    algebras = [exterior(), dual_numbers(), two_generator_z(), acyclic_pair(top=8),
                cup1_algebra(top=6), massey_algebra(), polynomial(QQ, (2, 2, 2), 6),
                truncated_quotient(ZZ, 2, 3, 8)]
    for A in algebras:
        yield A.name, algebra_module(A)
        if A.aug is not None:
            yield A.name, trivial_module(A)
            yield A.name, restricted_module(A, disk(2, A.ring))


def criterion_4():
    bad, count = [], 0
    for name, M in _corpus_modules():
        res = bar_resolution(M, top=6)
        count += 1
        if verify_bar_witness(res) or not filtration_implies(check_filtration(res), "r-split"):
            bad.append(name)
    return not bad, f"{count} pairs: witnesses verify, r-split" if not bad else f"failed: {bad}"


# ---------------------------------------------------------------- 5

def criterion_5():
    A = exterior()
    rep = emss(trivial_module(A, "right"), bar_resolution(trivial_module(A), top=13), top=12)
    e2 = rep.pages[2]
    expect = {(p, q): (1 if p == q else 0) for p in range(7) for q in range(7)}
    got = {k: len(e2.factors(*k)) for k in expect}
    classical = {k: len(rep.classical[k].factors) if k in rep.classical else 0 for k in expect}
    ok = got == expect == classical and not rep.e2_mismatches and not rep.total_mismatches
    return ok, "E2 = Tor(F2, F2) for p <= 6, E-infinity totals match the Tor table"


# ---------------------------------------------------------------- 6

def criterion_6():
    cases = [
        (cup1_algebra(top=9), [(1, 0, 0), (0, 1, 0), (0, 0, 1)]),
        (polynomial(QQ, (2, 2, 2), 9), [(1, 0, 0), (0, 1, 0), (0, 0, 1)]),
        (acyclic_pair(top=10), [(1, 0, 0)]),
    ]
    details, ok = [], True
    for A, exps in cases:
        t0 = time.perf_counter()
        cycles = [A.basis_vector(e) for e in exps]
        res = koszul_resolution(A, cycles)
        X = res.X
        good = (not X.carrier.dd_violations() and not koszul_e1_violations(res)
                and res.is_quasi_iso(range(0, res.top)))
        if all(A.carrier.d(n).is_zero() for n in A.degrees() if A.rank(n - 1)):
            n = len(exps)
            T = tor(trivial_module(A, "right"), trivial_module(A), resolution=res, top=res.top)
            # R (x)_A K(A) has zero differential, so Tor counts generators
            by_p, by_t = {}, {}
            for (p, q), c in X.barx().items():
                by_p[p] = by_p.get(p, 0) + c
                by_t[p + q] = by_t.get(p + q, 0) + c
            good = good and by_p == {p: comb(n, p) for p in range(n + 1)}
            good = good and all(_ranks(T, t) == by_t.get(t, 0) for t in T.degrees())
        dt = time.perf_counter() - t0
        good = good and dt < 10
        ok = ok and good
        details.append(f"{A.name} {dt:.1f}s")
    return ok, ", ".join(details)


# ---------------------------------------------------------------- 7

def _quotient_map(A, B):
    """A = P[x] (x) K -> B = R[x]/x^2: x -> x, the acyclic generators -> 0."""
    mats = {}
    for n, labels in A.labels.items():
        if n not in B.labels:
            continue
        cols = []
        for e in labels:
            v = [0] * B.rank(n)
            if e[1:] == (0, 0) and (e[0],) in B._pos:
                v[B._pos[(e[0],)][1]] = 1
            cols.append(v)
        mats[n] = Matrix.from_columns(A.ring, cols, B.rank(n))
    return mats


def criterion_7():
    A = acyclic_pair(top=10)
    B = truncated_quotient(ZZ, 2, 2, 10)
    cert = validate_cup1(A)
    N = module_over_map(A, B, _quotient_map(A, B), side="right")
    M = trivial_module(A)
    res = bar_resolution(M, top=9)
    rep = emss(N, res, top=8)
    T = rep.tor_table
    totals = {}
    for (p, q), g in rep.classical.items():
        totals[p + q] = totals.get(p + q, 0) + len(g.factors)
    ranks_ok = all(_ranks(T, n) == totals.get(n, 0) for n in range(0, 9))
    ok = (cert.valid and not N.validate() and ranks_ok and rep.e2_is_einf
          and T.window[1] >= 8)
    return ok, (f"Tor ranks {[_ranks(T, n) for n in range(9)]} = classical, "
                f"E2 = E-infinity: {rep.e2_is_einf}")


# ---------------------------------------------------------------- 8

def _factor_instance(ring, rng):
    X = random_complex(ring, rng, hi=2)
    Y = random_complex(ring, rng, hi=2)
    return random_chain_map(X, Y, rng)


def criterion_8(count=100):
    failures = []
    for structure in ("q", "r", "h"):
        rng = random.Random(f"acceptance-{structure}")
        for k in range(count):
            ring = RINGS[k % len(RINGS)]
            f = _factor_instance(ring, rng)
            for fac in (factor_cylinder(f), factor_cocylinder(f), factor_onestep_J(f)):
                if fac.verify():
                    failures.append((structure, "factor", k))
            for make, acyclic in ((acyclic_cofibration_square, "i"),
                                  (cofibration_acyclic_fibration_square, "p")):
                sq = make(ring, rng)
                try:
                    check_lift_hypotheses(sq, structure, acyclic)
                except ValueError:
                    continue
                r = split_mono_retractions(sq.i)
                if any(r[n] @ sq.i.at(n) != Matrix.identity(ring, sq.i.source.rank(n))
                       for n in r):
                    failures.append((structure, "retraction", k))
                lam = solve_lift(sq, structure, acyclic)
                if lam is None or verify_lift(sq, lam):
                    failures.append((structure, make.__name__, k))
    return not failures, (f"{count} instances per structure (q, r, h)" if not failures
                          else f"failures: {failures[:5]}")


# ---------------------------------------------------------------- 9

def _field_maps(F, rng):
    s0, d1, d2 = sphere(0, F), disk(1, F), disk(2, F)
    zero = FinComplex(F, {})
    yield ChainMap(s0, d1, {0: [[1]]})
    yield sum_projection([s0, s0], 0)
    yield ChainMap(s0, s0, {0: [[2]]})
    yield ChainMap(d1, zero, {})
    yield ChainMap(s0, zero, {})
    yield ChainMap(zero, d2, {})
    for A in (exterior(F), massey_algebra() if F == F2 else polynomial(F, (2,), 6)):
        C = A.carrier
        yield ChainMap.identity(C)
        yield ChainMap(C, FinComplex(F, {}), {})
    yield sum_projection([s0, d1], 0)
    for _ in range(40):
        yield _factor_instance(F, rng)


def criterion_9():
    bad, count = [], 0
    for F in (F2, F5):
        rng = random.Random(F.p)
        for f in _field_maps(F, rng):
            count += 1
            if is_q_fibration(f) != bool(is_r_fibration(f)):
                bad.append((F.p, "fibration", count))
            if is_quasi_iso(f) != bool(is_h_equivalence(f)):
                bad.append((F.p, "equivalence", count))
    return not bad, f"{count} maps over F2 and F5" if not bad else f"disagreements: {bad[:5]}"


# ---------------------------------------------------------------- 10

def criterion_10():
    reports = []
    R = ground_algebra(ZZ)
    Z, Z2 = sphere(0, ZZ), z_mod(2)
    reports.append(tor_les(ChainMap(Z, Z, {0: [[2]]}), ChainMap(Z, Z2, {0: [[1]]}),
                           [as_module(R, C, "right") for C in (Z, Z, Z2)],
                           as_module(R, z_mod(2)), top=3))
    Z4 = IntegersMod(4)
    R4 = ground_algebra(Z4)
    a, b = z2_over_z4(), sphere(0, Z4)
    reports.append(tor_les(ChainMap(a, b, {0: [[2]]}, check=False),
                           ChainMap(b, a, {0: [[1]]}, check=False),
                           [as_module(R4, C, "right") for C in (a, b, a)],
                           as_module(R4, z4_truncated(0, 4)), top=4))
    A = exterior()
    N1 = restricted_module(A, sphere(1, F2), "right")
    N2, N3 = algebra_module(A, "right"), trivial_module(A, "right")
    reports.append(tor_les(ChainMap(N1.carrier, N2.carrier, {1: [[1]]}, check=False),
                           ChainMap(N2.carrier, N3.carrier, {0: [[1]]}, check=False),
                           (N1, N2, N3), trivial_module(A), top=6))
    nodes = sum(len(r.exact) for r in reports)
    ok = all(r.all_exact for r in reports)
    return ok, f"3 sequences (Z, Z/4, E[y]), {nodes} nodes exact"


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 11)}


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    ok, detail = CRITERIA[n]()
    RESULTS[n] = (ok, detail)
    assert ok, detail


def summary_lines():
    return [f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
            for n, (ok, detail) in sorted(RESULTS.items())]


if __name__ == "__main__":
    for n, fn in CRITERIA.items():
        RESULTS[n] = fn()
        print(summary_lines()[-1], flush=True)
