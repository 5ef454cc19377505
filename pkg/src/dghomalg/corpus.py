"""Small DG algebras and modules used by the tests, the acceptance suite and the CLI."""
from __future__ import annotations

import itertools

from .complexes import FinComplex, PresentedComplex
from .dg_algebra import DGAlgebra, DGModule, _unit_vec
from .linalg import ZZ, IntegersMod, PrimeField


class MonomialAlgebra(DGAlgebra):
    """Graded-commutative algebra on generators, truncated above degree ``top``.

    ``diff`` maps a generator index to a polynomial {exponent tuple: coeff}.
    Odd generators square to zero unless ``odd_polynomial`` (characteristic 2).
    Monomials divisible by one in ``kill`` are zero.  Boundaries d(A_{top+1})
    are divided out so the truncation stays a DG algebra; homology is
    unaffected below ``top``.
    """

    def __init__(self, ring, degrees, top, diff=None, kill=(), odd_polynomial=False,
                 cup1=None, name=None):
        self.gen_degrees = tuple(degrees)
        self.odd_polynomial = odd_polynomial
        self.kill = [tuple(k) for k in kill]
        self.diff_gens = dict(diff or {})
        for g, P in self.diff_gens.items():
            if any(self.mdeg(e) != degrees[g] - 1 for e in P):
                raise ValueError(f"d of generator {g} is not of degree {degrees[g] - 1}")
        self.ring0 = ring
        self.top = top
        labels = {}
        for e in self._monomials(top + 1):
            labels.setdefault(self.mdeg(e), []).append(e)
        for n in labels:
            labels[n].sort(reverse=True)
        # divide out the boundaries of degree top + 1
        dead = set()
        for e in labels.get(top + 1, []):
            for m, c in self.poly_d({e: 1}).items():
                if c:
                    dead.add(m)
        image = [self.poly_d({e: 1}) for e in labels.get(top + 1, [])]
        for v in image:
            if len([m for m, c in v.items() if ring.reduce(c)]) > 1:
                raise ValueError("boundaries at the cut are not spanned by monomials")
        self.labels = {n: [e for e in labels.get(n, []) if e not in dead] for n in range(0, top + 1)}
        self.labels = {n: v for n, v in self.labels.items() if v}
        self._pos = {e: (n, i) for n, v in self.labels.items() for i, e in enumerate(v)}
        ranks = {n: len(v) for n, v in self.labels.items()}
        dmats = {}
        for n, v in self.labels.items():
            if n - 1 in self.labels:
                cols = [self.vector(n - 1, self.poly_d({e: 1})) for e in v]
                dmats[n] = [[c[r] for c in cols] for r in range(ranks[n - 1])]
        carrier = FinComplex(ring, ranks, dmats, lo=0, hi=top)
        mul = {}
        for i, vi in self.labels.items():
            for j, vj in self.labels.items():
                if i + j > top:
                    continue
                for a, e in enumerate(vi):
                    for b, f in enumerate(vj):
                        v = self.vector(i + j, self.poly_mul({e: 1}, {f: 1}))
                        if any(v):
                            mul[(i, a, j, b)] = v
        zero = tuple(0 for _ in degrees)
        unit = self._pos[zero][1]
        aug = [int(e == zero) for e in self.labels[0]]
        # graded-commutative, so the zero cup-1 product is valid by default
        cup = {}
        if cup1 is not None:
            cup = {}
            for i, vi in self.labels.items():
                for j, vj in self.labels.items():
                    if i + j + 1 > top:
                        continue
                    for a, e in enumerate(vi):
                        for b, f in enumerate(vj):
                            v = self.vector(i + j + 1, cup1(self, e, f))
                            if any(v):
                                cup[(i, a, j, b)] = v
        super().__init__(carrier, unit, mul, cup1=cup, aug=aug, name=name or "A")

    # --- monomial arithmetic

    def mdeg(self, e):
        return sum(k * d for k, d in zip(e, self.gen_degrees))

    def _allowed(self, e):
        if not self.odd_polynomial:
            if any(k > 1 and d % 2 for k, d in zip(e, self.gen_degrees)):
                return False
        return not any(all(x >= y for x, y in zip(e, k)) for k in self.kill)

    def _monomials(self, top):
        bounds = [top // d if d else 0 for d in self.gen_degrees]
        for e in itertools.product(*[range(b + 1) for b in bounds]):
            if self.mdeg(e) <= top and self._allowed(e):
                yield e

    def _word(self, e):
        return [i for i, k in enumerate(e) for _ in range(k)]

    def mono_mul(self, e, f):
        """(sign, monomial) of e*f, sign 0 when the product vanishes."""
        sign = 1
        for i, fi in enumerate(f):
            if not fi:
                continue
            for j in range(i + 1, len(e)):
                if e[j] and (self.gen_degrees[i] * self.gen_degrees[j] * fi * e[j]) % 2:
                    sign = -sign
        g = tuple(a + b for a, b in zip(e, f))
        if not self._allowed(g) or self.mdeg(g) > self.top + 1:
            return 0, g
        return sign, g

    def poly_mul(self, P, Q):
        out = {}
        for e, c in P.items():
            for f, d in Q.items():
                s, g = self.mono_mul(e, f)
                if s:
                    out[g] = out.get(g, 0) + s * c * d
        return {k: v for k, v in out.items() if self.ring0.reduce(v)}

    def poly_d(self, P):
        out = {}
        k = len(self.gen_degrees)
        for e, c in P.items():
            word = self._word(e)
            sign = 1
            for t, gi in enumerate(word):
                left = [0] * k
                for s in word[:t]:
                    left[s] += 1
                right = [0] * k
                for s in word[t + 1:]:
                    right[s] += 1
                dg = self.diff_gens.get(gi)
                if dg:
                    term = self.poly_mul(self.poly_mul({tuple(left): 1}, dg), {tuple(right): 1})
                    for m, v in term.items():
                        out[m] = out.get(m, 0) + sign * c * v
                if self.gen_degrees[gi] % 2:
                    sign = -sign
        return {m: v for m, v in out.items() if self.ring0.reduce(v)}

    def vector(self, n, P):
        v = [0] * len(self.labels.get(n, []))
        for e, c in P.items():
            pos = self._pos.get(e)
            if pos is not None and pos[0] == n:
                v[pos[1]] += c
        return [self.ring0.reduce(x) for x in v]

    def basis_vector(self, e):
        n, i = self._pos[tuple(e)]
        return n, _unit_vec(len(self.labels[n]), i)


# ---------------------------------------------------------------- algebras

def exterior(ring=PrimeField(2)):
    """E[y] with |y| = 1 and zero differential."""
    C = FinComplex(ring, {0: 1, 1: 1})
    mul = {(0, 0, 0, 0): [1], (0, 0, 1, 0): [1], (1, 0, 0, 0): [1]}
    return DGAlgebra(C, 0, mul, cup1={}, aug=[1], name="E[y]")


def dual_numbers():
    """Z[e]/e^2 with |e| = 1 and de = 2; its homology Z/2 is not free."""
    C = FinComplex(ZZ, {0: 1, 1: 1}, {1: [[2]]})
    mul = {(0, 0, 0, 0): [1], (0, 0, 1, 0): [1], (1, 0, 0, 0): [1]}
    return DGAlgebra(C, 0, mul, name="Z[e]")


def two_generator_z():
    """Z<x, y> with |x| = 2, |y| = 5, dy = x^2, xy = 0: homology Z{1, x} with x^2 = 0."""
    return MonomialAlgebra(ZZ, (2, 5), 5, diff={1: {(2, 0): 1}}, kill=[(1, 1)], name="Z<x,y>")


def polynomial(ring, degrees, top):
    return MonomialAlgebra(ring, degrees, top, name=f"P{list(degrees)}")


def acyclic_pair(ring=ZZ, xdeg=2, top=10):
    """P[x] (x) (E[u] (x) P[v], du = v) with |v| = 2, |u| = 3: homology P[x] below ``top``."""
    return MonomialAlgebra(ring, (xdeg, 2, 3), top, diff={2: {(0, 1, 0): 1}}, name="P[x]⊗K")


def cup1_algebra(top=8):
    """F_2[u, x1, x2] with |u| = 1, |x_i| = 2, d = 0 and a nontrivial cup-1 product.

    a cup_1 c = u x1 c (d a / d x1), a derivation in a, so the Hirsch formula holds.
    """
    def cup(alg, e, f):
        k = e[1]
        if not k:
            return {}
        g = (e[0], e[1] - 1, e[2])
        P = alg.poly_mul({g: k}, {(1, 1, 0): 1})
        return alg.poly_mul(P, {f: 1})
    return MonomialAlgebra(PrimeField(2), (1, 2, 2), top, odd_polynomial=True, cup1=cup,
                           name="F2[u,x1,x2]")


def truncated_quotient(ring, xdeg, power, top):
    """R[x]/x^power with zero differential."""
    kill = [(power,)]
    return MonomialAlgebra(ring, (xdeg,), top, kill=kill, name=f"R[x]/x^{power}")


def massey_algebra():
    """F_2{1, x, w, u, e}: x^2 = w, du = w, xu = e, ux = 0; <x, x, x> = {e} is nonzero."""
    F2 = PrimeField(2)
    C = FinComplex(F2, {0: 1, 1: 1, 2: 1, 3: 1, 4: 1}, {3: [[1]]})
    mul = {(0, 0, n, 0): [1] for n in range(5)}
    mul.update({(n, 0, 0, 0): [1] for n in range(5)})
    mul[(1, 0, 1, 0)] = [1]
    mul[(1, 0, 3, 0)] = [1]
    return DGAlgebra(C, 0, mul, aug=[1], name="Massey")


# ---------------------------------------------------------------- modules

def module_over_map(A: DGAlgebra, B: DGAlgebra, fmats: dict, side="right", name=None):
    """B as an A-module through an algebra map with components ``fmats[n]: A_n -> B_n``."""
    action = {}
    for i in A.degrees():
        for a in range(A.rank(i)):
            fa = fmats[i].column(a) if i in fmats and B.rank(i) else []
            if not any(fa):
                continue
            for j in B.degrees():
                for m in range(B.rank(j)):
                    em = _unit_vec(B.rank(j), m)
                    v = B.product(j, em, i, fa) if side == "right" else B.product(i, fa, j, em)
                    if any(v):
                        action[(i, a, j, m)] = v
    return DGModule(A, B.carrier, action, side, name=name or B.name)


def z4_truncated(lo=0, hi=8):
    """The complex of free Z/4-modules with every differential multiplication by 2."""
    R = IntegersMod(4)
    return FinComplex(R, {n: 1 for n in range(lo, hi + 1)},
                      {n: [[2]] for n in range(lo + 1, hi + 1)})


def z2_over_z4():
    return PresentedComplex(IntegersMod(4), {0: 1}, {}, {0: [[2]]})


def z_mod(k, ring=ZZ):
    """Z/k concentrated in degree 0, as a presented complex."""
    return PresentedComplex(ring, {0: 1}, {}, {0: [[k]]})
