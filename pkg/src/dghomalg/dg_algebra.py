"""DG algebras and DG modules with sparse structure tables.

Products are stored per pair of basis elements: ``mul[(i, a, j, b)]`` is the
coordinate vector of e^i_a * e^j_b in degree i + j.  Missing entries are
zero.  Algebras are closed: a product cannot land outside the window.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .complexes import (ChainMap, FinComplex, PresentedComplex, homology_at, hom,
                        hom_offsets, subcomplex, tensor, tensor_offsets)
from .linalg import (LinearSolver, Matrix, RingMismatch, Subquotient, UnsupportedRing)


def _sign(k):
    return -1 if k % 2 else 1


def _unit_vec(k, i):
    return [int(j == i) for j in range(k)]


def _axpy(out, c, v):
    if c:
        for k, x in enumerate(v):
            if x:
                out[k] += c * x


class MissingStructure(ValueError):
    pass


class NoCup1(MissingStructure):
    pass


class AlgebraMismatch(ValueError):
    pass


class DGAlgebra:
    def __init__(self, carrier: FinComplex, unit: int, mul: dict, cup1=None, aug=None,
                 name=None):
        self.carrier = carrier
        self.ring = carrier.ring
        self.unit = unit
        red = self.ring.reduce
        self.mul = {tuple(k): [red(x) for x in v] for k, v in mul.items()}
        self.cup1 = None if cup1 is None else {tuple(k): [red(x) for x in v]
                                                for k, v in cup1.items()}
        self.aug = None if aug is None else [red(x) for x in aug]
        self.name = name or "A"
        self._mm = {}

    # --- structure access

    @property
    def lo(self):
        return self.carrier.lo

    @property
    def hi(self):
        return self.carrier.hi

    def rank(self, n):
        return self.carrier.rank(n)

    def d(self, n):
        return self.carrier.d(n)

    def degrees(self):
        return self.carrier.degrees()

    def unit_vector(self):
        return _unit_vec(self.rank(0), self.unit)

    def basis_product(self, i, a, j, b):
        v = self.mul.get((i, a, j, b))
        return list(v) if v is not None else [0] * self.rank(i + j)

    def mul_matrix(self, i, j):
        """A_i (x) A_j -> A_{i+j}, columns ordered (a, b)."""
        key = (i, j)
        if key not in self._mm:
            ri, rj, rt = self.rank(i), self.rank(j), self.rank(i + j)
            cols = [self.basis_product(i, a, j, b) if rt else []
                    for a in range(ri) for b in range(rj)]
            self._mm[key] = Matrix.from_columns(self.ring, cols, rt)
        return self._mm[key]

    def product(self, i, x, j, y):
        """Product of a degree-i vector x with a degree-j vector y."""
        out = [0] * self.rank(i + j)
        if not out:
            return out
        for a, xa in enumerate(x):
            if not xa:
                continue
            for b, yb in enumerate(y):
                if yb:
                    v = self.mul.get((i, a, j, b))
                    if v:
                        _axpy(out, xa * yb, v)
        return [self.ring.reduce(c) for c in out]

    def cup1_product(self, i, x, j, y):
        if self.cup1 is None:
            raise NoCup1("no cup-1 table")
        out = [0] * self.rank(i + j + 1)
        if not out:
            return out
        for a, xa in enumerate(x):
            for b, yb in enumerate(y):
                if xa and yb:
                    v = self.cup1.get((i, a, j, b))
                    if v:
                        _axpy(out, xa * yb, v)
        return [self.ring.reduce(c) for c in out]

    def dvec(self, n, x):
        return self.d(n).apply(x) if self.rank(n - 1) else []

    def augment(self, x):
        if self.aug is None:
            raise MissingStructure("no augmentation")
        return self.ring.reduce(sum(a * b for a, b in zip(self.aug, x)))

    # --- validation

    def validate(self):
        """List of axiom violations (empty when A is a DG algebra)."""
        bad = []
        ring = self.ring
        if self.d(0).rows and any(self.d(0).apply(self.unit_vector())):
            bad.append("unit is not a cycle")
        for key, v in self.mul.items():
            i, a, j, b = key
            if not (self.lo <= i + j <= self.hi) and any(v):
                bad.append(f"product {key} lands outside the window")
            elif len(v) != self.rank(i + j):
                bad.append(f"product {key} has wrong length")
        degs = list(self.degrees())
        for i in degs:
            for a in range(self.rank(i)):
                e = _unit_vec(self.rank(i), a)
                u = self.unit_vector()
                if self.product(0, u, i, e) != e or self.product(i, e, 0, u) != e:
                    bad.append(f"unit law fails on ({i},{a})")
        for i in degs:
            for j in degs:
                for a in range(self.rank(i)):
                    x = _unit_vec(self.rank(i), a)
                    dx = self.dvec(i, x)
                    for b in range(self.rank(j)):
                        y = _unit_vec(self.rank(j), b)
                        lhs = self.dvec(i + j, self.product(i, x, j, y))
                        rhs = [0] * self.rank(i + j - 1)
                        if dx:
                            _axpy(rhs, 1, self.product(i - 1, dx, j, y))
                        dy = self.dvec(j, y)
                        if dy:
                            _axpy(rhs, _sign(i), self.product(i, x, j - 1, dy))
                        if lhs != [ring.reduce(c) for c in rhs]:
                            bad.append(f"Leibniz fails on ({i},{a}),({j},{b})")
        for i in degs:
            for j in degs:
                for k in degs:
                    if not self.rank(i + j + k):
                        continue
                    for a in range(self.rank(i)):
                        x = _unit_vec(self.rank(i), a)
                        for b in range(self.rank(j)):
                            y = _unit_vec(self.rank(j), b)
                            xy = self.product(i, x, j, y)
                            for c in range(self.rank(k)):
                                z = _unit_vec(self.rank(k), c)
                                if (self.product(i + j, xy, k, z)
                                        != self.product(i, x, j + k, self.product(j, y, k, z))):
                                    bad.append(f"associativity fails on ({i},{a}),({j},{b}),({k},{c})")
        if self.aug is not None:
            if len(self.aug) != self.rank(0):
                bad.append("augmentation has wrong length")
            elif self.augment(self.unit_vector()) != ring.reduce(1):
                bad.append("augmentation does not preserve the unit")
            else:
                for a in range(self.rank(0)):
                    for b in range(self.rank(0)):
                        x, y = _unit_vec(self.rank(0), a), _unit_vec(self.rank(0), b)
                        if self.augment(self.product(0, x, 0, y)) != ring.reduce(
                                self.augment(x) * self.augment(y)):
                            bad.append(f"augmentation not multiplicative on {a},{b}")
                for a in range(self.rank(1)):
                    if self.augment(self.dvec(1, _unit_vec(self.rank(1), a))):
                        bad.append(f"augmentation does not kill d of (1,{a})")
        return bad

    def __repr__(self):
        return f"DGAlgebra({self.name}, {self.ring}, ranks={self.carrier.ranks})"


# ---------------------------------------------------------------- cup-1 identities

@dataclass
class Cup1Certificate:
    pairs: int = 0
    triples: int = 0
    violations: list = field(default_factory=list)

    @property
    def valid(self):
        return not self.violations


def validate_cup1(A: DGAlgebra) -> Cup1Certificate:
    """Check the coboundary formula for cup-1 and the Hirsch formula."""
    if A.cup1 is None:
        raise NoCup1("no cup-1 table")
    cert = Cup1Certificate()
    red = A.ring.reduce
    degs = list(A.degrees())
    E = lambda n, k: _unit_vec(A.rank(n), k)
    for p in degs:
        for q in degs:
            for a in range(A.rank(p)):
                for b in range(A.rank(q)):
                    cert.pairs += 1
                    x, y = E(p, a), E(q, b)
                    lhs = A.dvec(p + q + 1, A.cup1_product(p, x, q, y))
                    rhs = [0] * A.rank(p + q)
                    if rhs:
                        _axpy(rhs, 1, A.product(p, x, q, y))
                        _axpy(rhs, -_sign(p * q), A.product(q, y, p, x))
                        dx, dy = A.dvec(p, x), A.dvec(q, y)
                        if dx:
                            _axpy(rhs, -1, A.cup1_product(p - 1, dx, q, y))
                        if dy:
                            _axpy(rhs, -_sign(p), A.cup1_product(p, x, q - 1, dy))
                    if lhs != [red(c) for c in rhs]:
                        cert.violations.append(("coboundary", (p, a), (q, b)))
    for p in degs:
        for q in degs:
            for r in degs:
                if not A.rank(p + q + r + 1):
                    continue
                for a in range(A.rank(p)):
                    for b in range(A.rank(q)):
                        for c in range(A.rank(r)):
                            cert.triples += 1
                            x, y, z = E(p, a), E(q, b), E(r, c)
                            lhs = A.cup1_product(p + q, A.product(p, x, q, y), r, z)
                            rhs = [0] * len(lhs)
                            _axpy(rhs, _sign(p), A.product(p, x, q + r + 1,
                                                           A.cup1_product(q, y, r, z)))
                            _axpy(rhs, _sign(q * r), A.product(p + r + 1,
                                                               A.cup1_product(p, x, r, z), q, y))
                            if lhs != [red(v) for v in rhs]:
                                cert.violations.append(("hirsch", (p, a), (q, b), (r, c)))
    return cert


def validate_dga(A: DGAlgebra):
    return A.validate()


# ---------------------------------------------------------------- modules

class _Residue:
    """Equality modulo the relations of a (possibly presented) carrier."""

    def __init__(self, C):
        self.C = C
        self._sq = {}

    def zero(self, n, v):
        red = self.C.ring.reduce
        v = [red(x) for x in v]
        if not any(v):
            return True
        rel = self.C.relations(n)
        if not rel:
            return False
        sq = self._sq.get(n)
        if sq is None:
            k = self.C.rank(n)
            sq = self._sq[n] = Subquotient(self.C.ring, k, [_unit_vec(k, i) for i in range(k)],
                                           rel)
        return sq.is_zero_class(v)

    def equal(self, n, u, v):
        return self.zero(n, [a - b for a, b in zip(u, v)])


class DGModule:
    """A DG module over ``algebra`` on a (possibly presented) carrier.

    ``action[(i, a, j, m)]`` is the product of the algebra basis element
    (i, a) with the module basis element (j, m), for either side.
    """

    def __init__(self, algebra: DGAlgebra, carrier: FinComplex, action: dict, side="left",
                 name=None):
        if algebra.ring != carrier.ring:
            raise RingMismatch(f"{algebra.ring} vs {carrier.ring}")
        if side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        self.algebra = algebra
        self.carrier = carrier
        self.ring = carrier.ring
        self.side = side
        red = self.ring.reduce
        self.action = {tuple(k): [red(x) for x in v] for k, v in action.items()}
        self.name = name or "M"

    def rank(self, n):
        return self.carrier.rank(n)

    def degrees(self):
        return self.carrier.degrees()

    def act(self, i, x, j, y):
        """The product of algebra vector x (degree i) with module vector y (degree j)."""
        out = [0] * self.rank(i + j)
        if not out:
            return out
        for a, xa in enumerate(x):
            if not xa:
                continue
            for m, ym in enumerate(y):
                if ym:
                    v = self.action.get((i, a, j, m))
                    if v:
                        _axpy(out, xa * ym, v)
        return [self.ring.reduce(c) for c in out]

    def dvec(self, n, y):
        return self.carrier.d(n).apply(y) if self.rank(n - 1) else []

    def action_matrix(self, i, a, j):
        """Matrix of the action of basis element (i, a) on M_j."""
        k = self.rank(i + j)
        cols = [self.action.get((i, a, j, m), [0] * k) for m in range(self.rank(j))]
        return Matrix.from_columns(self.ring, cols, k)

    def validate(self):
        """List of module-axiom violations."""
        A, M, bad = self.algebra, self, []
        res = _Residue(self.carrier)
        red = self.ring.reduce
        for key, v in self.action.items():
            i, a, j, m = key
            if not (M.carrier.lo <= i + j <= M.carrier.hi) and any(v):
                bad.append(f"action {key} lands outside the window")
            elif len(v) != M.rank(i + j):
                bad.append(f"action {key} has wrong length")
        u = A.unit_vector()
        adegs, mdegs = list(A.degrees()), list(M.degrees())
        for j in mdegs:
            for m in range(M.rank(j)):
                e = _unit_vec(M.rank(j), m)
                if not res.equal(j, M.act(0, u, j, e), e):
                    bad.append(f"unit does not act as identity on ({j},{m})")
        for i in adegs:
            for a in range(A.rank(i)):
                x = _unit_vec(A.rank(i), a)
                dx = A.dvec(i, x)
                for j in mdegs:
                    for k in M.carrier.relations(j):
                        if not res.zero(i + j, M.act(i, x, j, k)):
                            bad.append(f"({i},{a}) does not preserve relations in degree {j}")
                    for m in range(M.rank(j)):
                        y = _unit_vec(M.rank(j), m)
                        if not M.rank(i + j):
                            continue
                        lhs = M.dvec(i + j, M.act(i, x, j, y))
                        rhs = [0] * M.rank(i + j - 1)
                        # left: d(xy) = dx.y + (-1)^i x.dy ; right: d(yx) = dy.x + (-1)^j y.dx
                        sa, sm = (1, _sign(i)) if self.side == "left" else (_sign(j), 1)
                        if dx:
                            _axpy(rhs, sa, M.act(i - 1, dx, j, y))
                        dy = M.dvec(j, y)
                        if dy:
                            _axpy(rhs, sm, M.act(i, x, j - 1, dy))
                        if not res.equal(i + j - 1, lhs, [red(c) for c in rhs]):
                            bad.append(f"Leibniz fails on ({i},{a}),({j},{m})")
        for i in adegs:
            for k in adegs:
                for j in mdegs:
                    if not M.rank(i + j + k):
                        continue
                    for a in range(A.rank(i)):
                        x = _unit_vec(A.rank(i), a)
                        for b in range(A.rank(k)):
                            z = _unit_vec(A.rank(k), b)
                            for m in range(M.rank(j)):
                                y = _unit_vec(M.rank(j), m)
                                if self.side == "left":   # x(zy) = (xz)y
                                    lhs = M.act(i, x, k + j, M.act(k, z, j, y))
                                    rhs = M.act(i + k, A.product(i, x, k, z), j, y)
                                else:                      # (yx)z = y(xz)
                                    lhs = M.act(k, z, i + j, M.act(i, x, j, y))
                                    rhs = M.act(i + k, A.product(i, x, k, z), j, y)
                                if not res.equal(i + j + k, lhs, rhs):
                                    bad.append(f"associativity fails on ({i},{a}),({k},{b}),({j},{m})")
        return bad

    def __repr__(self):
        return f"DGModule({self.name} over {self.algebra.name}, {self.side}, ranks={self.carrier.ranks})"


def validate_module(M: DGModule):
    return M.validate()


def algebra_module(A: DGAlgebra, side="left"):
    """A as a module over itself."""
    action = {}
    for (i, a, j, b), v in A.mul.items():
        if side == "left":
            action[(i, a, j, b)] = v
        else:
            action[(j, b, i, a)] = v
    return DGModule(A, A.carrier, action, side, name=A.name)


def restricted_module(A: DGAlgebra, C: FinComplex, side="left", name=None):
    """An R-complex viewed as an A-module through the augmentation."""
    if A.aug is None:
        raise MissingStructure("restriction of scalars needs an augmentation")
    action = {}
    for a, e in enumerate(A.aug):
        if e:
            for j in C.degrees():
                for m in range(C.rank(j)):
                    action[(0, a, j, m)] = [e * (k == m) for k in range(C.rank(j))]
    return DGModule(A, C, action, side, name=name or "R")


def trivial_module(A: DGAlgebra, side="left"):
    """R in degree 0, with A acting through the augmentation."""
    from .complexes import sphere
    return restricted_module(A, sphere(0, A.ring), side, name="R")


# ---------------------------------------------------------------- relatively free modules

class RelFreeModule(DGModule):
    """A (x) Xbar with a twisted differential d(a (x) g) = da (x) g + (-1)^|a| a d(g).

    ``gen_diff[n]`` lists, for each generator of degree n, the vector d(1 (x) g)
    in the carrier in degree n - 1.
    """

    def __init__(self, algebra: DGAlgebra, gen_ranks: dict, gen_diff: dict, name=None,
                 check=True):
        ring = algebra.ring
        self.algebra = algebra
        self.ring = ring
        gen_ranks = {int(n): int(r) for n, r in gen_ranks.items() if r}
        self.generators = FinComplex(ring, gen_ranks, check=False)
        X, A = self.generators, algebra.carrier
        lo, hi = A.lo + X.lo, A.hi + X.hi
        self._layout = {n: tensor_offsets(A, X, n) for n in range(lo - 1, hi + 2)}
        red = ring.reduce
        self.gen_diff = {}
        for n in X.degrees():
            vecs = [[red(c) for c in v] for v in gen_diff.get(n, [])]
            if not vecs:
                vecs = [[0] * self._layout[n - 1][1] for _ in range(X.rank(n))]
            if len(vecs) != X.rank(n) or any(len(v) != self._layout[n - 1][1] for v in vecs):
                raise ValueError(f"generator differentials in degree {n} have the wrong shape")
            self.gen_diff[n] = vecs
        ranks = {n: self._layout[n][1] for n in range(lo, hi + 1)}
        diff = {n: self._diff_matrix(n) for n in range(lo + 1, hi + 1)}
        carrier = FinComplex(ring, ranks, diff, lo=lo, hi=hi, check=False)
        super().__init__(algebra, carrier, {}, "left", name=name or "AX")
        if check:
            bad = carrier.dd_violations()
            if bad:
                raise ValueError(f"d o d != 0 in degrees {bad}")

    # --- coordinates

    def index(self, n, i, a, g):
        offs, _ = self._layout[n]
        return offs[i] + a * self.generators.rank(n - i) + g

    def decompose(self, n, idx):
        offs, _ = self._layout[n]
        for i, start in sorted(offs.items(), reverse=True):
            if idx >= start:
                rg = self.generators.rank(n - i)
                return i, (idx - start) // rg, (idx - start) % rg
        raise IndexError(idx)

    def entries(self, n, v):
        """Nonzero terms (i, a, g, c) of a carrier vector in degree n."""
        offs, _ = self._layout.get(n, ({}, 0))
        out = []
        for i, start in offs.items():
            rg = self.generators.rank(n - i)
            for a in range(self.algebra.rank(i)):
                for g in range(rg):
                    c = v[start + a * rg + g]
                    if c:
                        out.append((i, a, g, c))
        return out

    def gen_vector(self, n, g):
        v = [0] * self.rank(n)
        v[self.index(n, 0, self.algebra.unit, g)] = 1
        return v

    def left_multiply(self, k, x, n, v):
        """x . v for x in A_k and v in the carrier in degree n."""
        A = self.algebra
        out = [0] * self._layout.get(n + k, ({}, 0))[1]
        if not out:
            return out
        for i, a, g, c in self.entries(n, v):
            prod = A.product(k, x, i, _unit_vec(A.rank(i), a))
            for a2, p in enumerate(prod):
                if p:
                    out[self.index(n + k, k + i, a2, g)] += c * p
        return [self.ring.reduce(t) for t in out]

    def _diff_matrix(self, n):
        A, X = self.algebra, self.generators
        offs, size = self._layout[n]
        _, tsize = self._layout[n - 1]
        D = [[0] * size for _ in range(tsize)]
        for i, start in offs.items():
            rg = X.rank(n - i)
            dA = A.d(i).data
            for a in range(A.rank(i)):
                ea = _unit_vec(A.rank(i), a)
                for g in range(rg):
                    col = start + a * rg + g
                    if A.rank(i - 1):
                        for a2 in range(A.rank(i - 1)):
                            if dA[a2][a]:
                                D[self.index(n - 1, i - 1, a2, g)][col] += dA[a2][a]
                    dg = self.gen_diff[n - i][g]
                    if any(dg):
                        w = self.left_multiply(i, ea, n - i - 1, dg)
                        for r, c in enumerate(w):
                            if c:
                                D[r][col] += _sign(i) * c
        return Matrix(self.ring, tsize, size, D)

    @property
    def action(self):
        return _FreeAction(self)

    @action.setter
    def action(self, value):
        pass

    def act(self, i, x, j, y):
        return self.left_multiply(i, x, j, y)

    def tensor_shortcut(self, N: DGModule):
        """N (x)_A (A (x) Xbar) computed as N (x) Xbar."""
        X, C = self.generators, N.carrier
        ring = self.ring
        lo, hi = C.lo + X.lo, C.hi + X.hi
        lay = {t: tensor_offsets(C, X, t) for t in range(lo - 1, hi + 1)}
        ranks = {t: lay[t][1] for t in range(lo, hi + 1)}
        diff = {}
        for t in range(lo + 1, hi + 1):
            offs, size = lay[t]
            toffs, tsize = lay[t - 1]
            D = [[0] * size for _ in range(tsize)]
            for p, start in offs.items():
                q = t - p
                rg = X.rank(q)
                dN = C.d(p).data
                for m in range(C.rank(p)):
                    em = _unit_vec(C.rank(p), m)
                    for g in range(rg):
                        col = start + m * rg + g
                        if p - 1 in toffs:
                            for m2 in range(C.rank(p - 1)):
                                if dN[m2][m]:
                                    D[toffs[p - 1] + m2 * rg + g][col] += dN[m2][m]
                        for k, b, g2, c in self.entries(q - 1, self.gen_diff[q][g]):
                            nb = N.act(k, _unit_vec(self.algebra.rank(k), b), p, em)
                            rg2 = X.rank(q - 1 - k)
                            for m3, e in enumerate(nb):
                                if e:
                                    D[toffs[p + k] + m3 * rg2 + g2][col] += _sign(p) * c * e
            diff[t] = Matrix(ring, tsize, size, D)
        if not C.is_presented:
            return FinComplex(ring, ranks, diff, lo=lo, hi=hi, check=False)
        rels = {}
        for t in range(lo, hi + 1):
            offs, size = lay[t]
            vecs = []
            for p, start in offs.items():
                rg = X.rank(t - p)
                for k in C.relations(p):
                    for g in range(rg):
                        v = [0] * size
                        for m, c in enumerate(k):
                            v[start + m * rg + g] = c
                        vecs.append(v)
            rels[t] = vecs
        return PresentedComplex(ring, ranks, diff, rels, lo=lo, hi=hi, check=False)


class _FreeAction:
    """Lazy action table of a relatively free module (read-only mapping)."""

    def __init__(self, M):
        self.M = M

    def get(self, key, default=None):
        i, a, j, m = key
        M = self.M
        if not (0 <= m < M.rank(j)) or not (0 <= a < M.algebra.rank(i)):
            return default
        v = M.left_multiply(i, _unit_vec(M.algebra.rank(i), a), j, _unit_vec(M.rank(j), m))
        return v if any(v) else default

    def items(self):
        M = self.M
        for i in M.algebra.degrees():
            for a in range(M.algebra.rank(i)):
                for j in M.degrees():
                    for m in range(M.rank(j)):
                        v = self.get((i, a, j, m))
                        if v is not None:
                            yield (i, a, j, m), v


def free_module(A: DGAlgebra, X: FinComplex, name=None) -> RelFreeModule:
    """F X = A (x) X with the tensor-product differential."""
    if A.ring != X.ring:
        raise RingMismatch(f"{A.ring} vs {X.ring}")
    if X.is_presented:
        raise UnsupportedRing("free_module needs a free complex")
    Xb = FinComplex(A.ring, X.ranks, check=False)
    lay = {n: tensor_offsets(A.carrier, Xb, n) for n in range(X.lo - 1, X.hi + 1)}
    gen_diff = {}
    for n in X.degrees():
        offs, size = lay[n - 1]
        vecs = []
        for g in range(X.rank(n)):
            v = [0] * size
            if X.rank(n - 1):
                for g2, c in enumerate(X.d(n).column(g)):
                    if c:
                        v[offs[0] + A.unit * X.rank(n - 1) + g2] = c
            vecs.append(v)
        gen_diff[n] = vecs
    M = RelFreeModule(A, X.ranks, gen_diff, name=name or "F" + A.name)
    M.source_complex = X
    return M


# ---------------------------------------------------------------- tensor and Hom over A

def _same_algebra(N, M):
    if N.algebra is not M.algebra and (N.algebra.carrier != M.algebra.carrier
                                       or N.algebra.mul != M.algebra.mul):
        raise AlgebraMismatch(f"{N.algebra.name} vs {M.algebra.name}")


def tensor_over_A(N: DGModule, M: DGModule, route="auto") -> FinComplex:
    """N (x)_A M for a right module N and a left module M.

    ``route`` is "shortcut" (M relatively free), "coequalizer" or "auto".
    The result records the route used in its ``route`` attribute.
    """
    _same_algebra(N, M)
    if N.side != "right" or M.side != "left":
        raise ValueError("tensor_over_A needs a right module and a left module")
    if route not in ("auto", "shortcut", "coequalizer"):
        raise ValueError(f"unknown route {route!r}")
    if route != "coequalizer" and hasattr(M, "tensor_shortcut"):
        T = M.tensor_shortcut(N)
        T.route = "shortcut"
        return T
    if route == "shortcut":
        raise ValueError("shortcut route needs a relatively free module")
    A = N.algebra
    T = tensor(N.carrier, M.carrier)
    P, Q = N.carrier, M.carrier
    rels = {t: list(T.relations(t)) for t in T.degrees()}
    for t in T.degrees():
        offs, size = tensor_offsets(P, Q, t)
        for p in P.degrees():
            for i in A.degrees():
                j = t - p - i
                if not (P.rank(p) and A.rank(i) and Q.rank(j)):
                    continue
                for n in range(P.rank(p)):
                    en = _unit_vec(P.rank(p), n)
                    for a in range(A.rank(i)):
                        ea = _unit_vec(A.rank(i), a)
                        na = N.act(i, ea, p, en)
                        for m in range(Q.rank(j)):
                            em = _unit_vec(Q.rank(j), m)
                            am = M.act(i, ea, j, em)
                            v = [0] * size
                            rq = Q.rank(j)
                            for n2, c in enumerate(na):
                                if c:
                                    v[offs[p + i] + n2 * rq + m] += c
                            rq2 = Q.rank(i + j)
                            for m2, c in enumerate(am):
                                if c:
                                    v[offs[p] + n * rq2 + m2] -= c
                            v = [A.ring.reduce(x) for x in v]
                            if any(v):
                                rels[t].append(v)
    C = PresentedComplex(T.ring, T.ranks, {n: T.d(n) for n in T.degrees()}, rels,
                         lo=T.lo, hi=T.hi, check=False)
    C.route = "coequalizer"
    return C


def _equivariance_matrix(M, N, H, n):
    """Constraint matrix whose kernel is Hom_A(M, N)_n inside Hom(M, N)_n."""
    A = M.algebra
    offs, size = hom_offsets(M.carrier, N.carrier, n)
    cons = []
    for i in A.degrees():
        for a in range(A.rank(i)):
            ea = _unit_vec(A.rank(i), a)
            for j in M.degrees():
                if not (M.rank(j) and N.rank(i + j + n)):
                    continue
                for m in range(M.rank(j)):
                    cons.append((i, ea, j, m))
    cols = []
    for col in range(size):
        # basis map: e_(src index) in degree s goes to e_(tgt index) in degree s + n
        s = max(k for k in offs if offs[k] <= col)
        ry = N.rank(s + n)
        src, tgt = divmod(col - offs[s], ry)
        out = []
        for i, ea, j, m in cons:
            am = M.act(i, ea, j, _unit_vec(M.rank(j), m))
            lhs = [0] * N.rank(i + j + n)
            if i + j == s and am and am[src]:
                lhs[tgt] += am[src]
            rhs = [0] * N.rank(i + j + n)
            if j == s and m == src:
                fm = _unit_vec(N.rank(j + n), tgt)
                _axpy(rhs, _sign(n * i), N.act(i, ea, j + n, fm))
            out.extend(l - r for l, r in zip(lhs, rhs))
        cols.append(out)
    nrows = sum(N.rank(i + j + n) for i, _, j, _ in cons)
    return Matrix.from_columns(M.ring, cols, nrows)


def hom_over_A(M: DGModule, N: DGModule):
    """Hom_A(M, N): maps with f(am) = (-1)^{n|a|} a f(m), as a subcomplex of Hom(M, N).

    Returns (S, inclusion) where inclusion[n] embeds S_n in Hom(M, N)_n.
    """
    _same_algebra(M, N)
    if M.side != N.side:
        raise ValueError("modules on different sides")
    if M.carrier.is_presented or N.carrier.is_presented:
        raise UnsupportedRing("hom_over_A needs free carriers")
    H = hom(M.carrier, N.carrier)
    gens = {}
    for n in H.degrees():
        if not H.rank(n):
            continue
        E = _equivariance_matrix(M, N, H, n)
        if E.rows == 0:
            gens[n] = [_unit_vec(H.rank(n), k) for k in range(H.rank(n))]
        else:
            gens[n] = LinearSolver(E).kernel_vectors()
    return subcomplex(H, gens)


# ---------------------------------------------------------------- relative projectivity

@dataclass
class Unknown:
    reason: str

    def __bool__(self):
        return False


@dataclass
class Projective:
    """Witness: A-linear chain maps P -> A (x) UP -> P composing to the identity."""
    section: dict
    free: object

    def __bool__(self):
        return True


def counit(M: DGModule) -> ChainMap:
    """The action map A (x) UM -> M."""
    A = M.algebra
    F = free_module(A, M.carrier if not M.carrier.is_presented else M.carrier.ambient())
    mats = {}
    for n in F.degrees():
        cols = []
        for idx in range(F.rank(n)):
            i, a, g = F.decompose(n, idx)
            cols.append(M.act(i, _unit_vec(A.rank(i), a), n - i, _unit_vec(M.rank(n - i), g)))
        mats[n] = Matrix.from_columns(M.ring, cols, M.rank(n))
    return ChainMap(F.carrier, M.carrier, mats, check=False), F


def check_relatively_projective(P: DGModule):
    """Projective (with witness) when P is a retract of A (x) UP, otherwise Unknown."""
    if isinstance(P, RelFreeModule):
        return Projective(section=None, free=P)
    if P.side != "left" or P.carrier.is_presented:
        return Unknown("only left modules on free carriers are searched")
    from .linalg import solve_matrix_system
    eps, F = counit(P)
    A, ring = P.algebra, P.ring
    degs = list(P.degrees())
    shapes = {n: (F.rank(n), P.rank(n)) for n in degs}
    eqs = []
    for n in degs:
        if P.rank(n):
            eqs.append(([(eps.at(n), n, None)], Matrix.identity(ring, P.rank(n))))
        if P.rank(n) and F.rank(n - 1):
            terms = [(F.carrier.d(n), n, None)]
            if P.rank(n - 1):
                terms.append((Matrix.identity(ring, F.rank(n - 1)).scale(-1), n - 1,
                              P.carrier.d(n)))
            eqs.append((terms, Matrix.zero(ring, F.rank(n - 1), P.rank(n))))
    for i in A.degrees():
        for a in range(A.rank(i)):
            for j in degs:
                if not (P.rank(j) and F.rank(i + j)):
                    continue
                terms = [(F.action_matrix(i, a, j).scale(-1), j, None)]
                if P.rank(i + j):
                    terms.append((None, i + j, P.action_matrix(i, a, j)))
                eqs.append((terms, Matrix.zero(ring, F.rank(i + j), P.rank(j))))
    sol = solve_matrix_system(ring, shapes, eqs)
    if sol is None:
        return Unknown("no A-linear section of the counit within the window")
    return Projective(section=sol, free=F)


# ---------------------------------------------------------------- homology algebra

class NotFree(UnsupportedRing):
    pass


def _free_homology_basis(C, n, preferred=None):
    """(reps, coords) for H_n(C) when it is R-free; ``preferred`` becomes a basis vector."""
    H = homology_at(C, n)
    if any(H.factors):
        raise NotFree(f"homology in degree {n} is not free: {H.presentation}")
    reps = [list(r) for r in H.reps]
    if preferred is None or not reps:
        return reps, H.coords
    c = H.coords(preferred)
    k = next((k for k, x in enumerate(c) if H.ring.is_unit(x)), None)
    if k is None:
        raise NotFree("the unit class is not part of a basis of H_0")
    reps[k] = list(preferred)
    T = Matrix.from_columns(H.ring, [list(H.coords(r)) for r in reps], len(reps))
    solver = LinearSolver(T)
    return reps, (lambda v: tuple(solver.solve(list(H.coords(v)))))


class HomologyAlgebra(DGAlgebra):
    """H(A) with zero differential, plus class representatives in A."""

    def __init__(self, A: DGAlgebra):
        ring = A.ring
        reps, coords = {}, {}
        for n in A.degrees():
            pref = A.unit_vector() if n == 0 else None
            reps[n], coords[n] = _free_homology_basis(A.carrier, n, pref)
        ranks = {n: len(r) for n, r in reps.items()}
        mul = {}
        for i in A.degrees():
            for j in A.degrees():
                if not ranks.get(i + j):
                    continue
                for a, x in enumerate(reps[i]):
                    for b, y in enumerate(reps[j]):
                        v = list(coords[i + j](A.product(i, x, j, y)))
                        if any(v):
                            mul[(i, a, j, b)] = v
        unit = next(k for k, x in enumerate(coords[0](A.unit_vector())) if x)
        aug = None if A.aug is None else [A.augment(r) for r in reps[0]]
        carrier = FinComplex(ring, ranks, lo=A.lo, hi=A.hi, check=False)
        super().__init__(carrier, unit, mul, aug=aug, name="H" + A.name)
        self.source = A
        self.reps = reps
        self.class_of = coords


def homology_algebra(A: DGAlgebra) -> HomologyAlgebra:
    return HomologyAlgebra(A)


def homology_module(M: DGModule, HA: HomologyAlgebra | None = None) -> DGModule:
    """H(M) as a module over H(A), when both are R-free."""
    A = M.algebra
    HA = HA or homology_algebra(A)
    if M.carrier.is_presented:
        raise NotFree("homology_module needs a free carrier")
    reps, coords = {}, {}
    for n in M.degrees():
        reps[n], coords[n] = _free_homology_basis(M.carrier, n)
    action = {}
    for i in A.degrees():
        for j in M.degrees():
            if not reps.get(i + j):
                continue
            for a, x in enumerate(HA.reps[i]):
                for m, y in enumerate(reps[j]):
                    v = list(coords[i + j](M.act(i, x, j, y)))
                    if any(v):
                        action[(i, a, j, m)] = v
    carrier = FinComplex(M.ring, {n: len(r) for n, r in reps.items()},
                         lo=M.carrier.lo, hi=M.carrier.hi, check=False)
    H = DGModule(HA, carrier, action, M.side, name="H" + M.name)
    H.reps = reps
    H.class_of = coords
    return H
