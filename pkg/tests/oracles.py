"""Brute-force references: enumerate everything, trust nothing clever."""

from itertools import product
from math import gcd


def elements(ring):
    if hasattr(ring, "n"):
        return range(ring.n)
    return range(ring.p)


def span(ring, cols, dim):
    """Every R-combination of the columns, as a set of tuples."""
    red = ring.reduce
    out = {tuple([0] * dim)}
    for c in cols:
        c = [red(x) for x in c]
        out = {tuple(red(v[i] + k * c[i]) for i in range(dim)) for v in out for k in elements(ring)}
    return out


def subquotient_torsion_counts(ring, dim, z, b):
    """|{x in span z / span b : kx = 0}| for each k dividing the characteristic.

    Assumes span b lies inside span z.
    """
    n = ring.n if hasattr(ring, "n") else ring.p
    Z, B = span(ring, z, dim), span(ring, b, dim)
    counts = {}
    for k in range(1, n + 1):
        if n % k == 0:
            kill = sum(1 for x in Z if tuple(ring.reduce(k * t) for t in x) in B)
            counts[k] = kill // len(B)
    return counts


def factor_torsion_counts(n, moduli):
    counts = {}
    for k in range(1, n + 1):
        if n % k:
            continue
        c = 1
        for m in moduli:
            c *= gcd(k, m)
        counts[k] = c
    return counts


def solutions(ring, rows, b):
    """All x with rows . x = b over a finite ring."""
    cols = len(rows[0]) if rows else 0
    red = ring.reduce
    return [x for x in product(elements(ring), repeat=cols)
            if all(red(sum(r[j] * x[j] for j in range(cols)) - bi) == 0
                   for r, bi in zip(rows, b))]


def minors_gcd(m, k):
    """gcd of all k x k minors of an integer matrix."""
    from itertools import combinations
    rows, cols = len(m), len(m[0]) if m else 0
    g = 0
    for R in combinations(range(rows), k):
        for C in combinations(range(cols), k):
            g = gcd(g, det([[m[i][j] for j in C] for i in R]))
    return g


def det(a):
    if not a:
        return 1
    if len(a) == 1:
        return a[0][0]
    return sum((-1) ** j * a[0][j] * det([row[:j] + row[j + 1:] for row in a[1:]])
               for j in range(len(a)))


def rational_rank(rows):
    from fractions import Fraction
    A = [[Fraction(x) for x in r] for r in rows]
    rank, cols = 0, len(A[0]) if A else 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(A)) if A[i][c]), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        for i in range(len(A)):
            if i != rank and A[i][c]:
                f = A[i][c] / A[rank][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[rank])]
        rank += 1
    return rank


def integer_homology(rank_of, d, n):
    """(free rank, torsion factors) of H_n over Z from determinantal divisors."""
    dn, dn1 = d(n), d(n + 1)
    r_n = rational_rank(dn) if dn and dn[0] else 0
    r_n1 = rational_rank(dn1) if dn1 and dn1[0] else 0
    free = rank_of(n) - r_n - r_n1
    torsion = []
    prev = 1
    for k in range(1, r_n1 + 1):
        g = minors_gcd(dn1, k)
        f = g // prev
        prev = g
        if f > 1:
            torsion.append(f)
    return free, torsion


def finite_homology_counts(ring, X, n):
    """Torsion counts of H_n by enumerating cycles and boundaries."""
    q = ring.n if hasattr(ring, "n") else ring.p
    k = X.rank(n)
    if not k:
        return factor_torsion_counts(q, [])
    cyc = [v for v in product(elements(ring), repeat=k)
           if not X.rank(n - 1) or not any(X.d(n).apply(list(v)))]
    bnd = span(ring, X.d(n + 1).columns(), k) if X.rank(n + 1) else {tuple([0] * k)}
    counts = {}
    for t in range(1, q + 1):
        if q % t == 0:
            kill = sum(1 for x in cyc if tuple(ring.reduce(t * a) for a in x) in bnd)
            counts[t] = kill // len(bnd)
    return counts


def prime_power_parts(orders):
    """Sorted primary decomposition of a sum of cyclic groups; 0 stands for Z."""
    out = []
    for m in orders:
        if m == 0:
            out.append(0)
            continue
        p = 2
        while m > 1:
            q = 1
            while m % p == 0:
                m //= p
                q *= p
            if q > 1:
                out.append(q)
            p += 1
    return sorted(out)


def integer_kunneth(HN, HM, n):
    """Tor^Z_n(N, M) for complexes of free abelian groups, from their homology.

    HN, HM map a degree to a list of cyclic orders (0 for Z); the answer is
    sum H_p N (x) H_q M over p + q = n plus Tor_1(H_p N, H_q M) over p + q = n - 1.
    """
    out = []
    for p, gs in HN.items():
        for a in gs:
            for b in HM.get(n - p, []):
                out.append(gcd(a, b))
            for b in HM.get(n - 1 - p, []):
                if a and b:
                    out.append(gcd(a, b))
    return prime_power_parts([g for g in out if g != 1])
