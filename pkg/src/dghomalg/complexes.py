"""Finite chain complexes of free modules and the operations on them.

A complex is stored by its ranks and differentials ``d(n): X_n -> X_{n-1}``.
Basis elements of tensor products and Hom complexes are ordered
lexicographically in (X-degree, X-index, Y-index).
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .linalg import (LinearSolver, Matrix, RingMismatch, ShapeError, Subquotient,
                     block_matrix, coord_map_is_iso)


def _sign(k):
    return -1 if k % 2 else 1


class FinComplex:
    """Degreewise free chain complex with finite support [lo, hi]."""

    def __init__(self, ring, ranks, diff=None, lo=None, hi=None, check=True):
        self.ring = ring
        ranks = {int(n): int(r) for n, r in ranks.items() if r}
        if lo is None:
            lo = min(ranks, default=0)
        if hi is None:
            hi = max(ranks, default=lo - 1)
        if any(n < lo or n > hi for n in ranks):
            raise ShapeError("nonzero rank outside the window")
        self.lo, self.hi = lo, hi
        self._ranks = ranks
        self._diff = {}
        for n, m in (diff or {}).items():
            n = int(n)
            if not isinstance(m, Matrix):
                m = Matrix(ring, self.rank(n - 1), self.rank(n), m)
            if m.ring != ring:
                raise RingMismatch(f"differential in degree {n} over {m.ring}")
            if m.shape != (self.rank(n - 1), self.rank(n)):
                raise ShapeError(f"d({n}) has shape {m.shape}, expected "
                                 f"{(self.rank(n - 1), self.rank(n))}")
            if not m.is_zero():
                self._diff[n] = m
        if check:
            bad = self.dd_violations()
            if bad:
                raise ValueError(f"d o d != 0 in degrees {bad}")

    # --- basic access

    def rank(self, n):
        return self._ranks.get(n, 0)

    def d(self, n):
        m = self._diff.get(n)
        if m is None:
            return Matrix.zero(self.ring, self.rank(n - 1), self.rank(n))
        return m

    def degrees(self):
        return range(self.lo, self.hi + 1)

    @property
    def ranks(self):
        return dict(self._ranks)

    def is_zero(self):
        return not self._ranks

    def dd_violations(self):
        return [n for n in range(self.lo + 2, self.hi + 1)
                if not (self.d(n - 1) @ self.d(n)).is_zero()]

    def with_window(self, lo, hi):
        return FinComplex(self.ring, self._ranks, self._diff, lo=min(lo, self.lo),
                          hi=max(hi, self.hi), check=False)

    def __eq__(self, other):
        if not isinstance(other, FinComplex) or other.ring != self.ring:
            return False
        if self._ranks != other._ranks:
            return False
        degs = set(self._diff) | set(other._diff)
        return all(self.d(n) == other.d(n) for n in degs)

    def __hash__(self):
        return hash((self.ring, tuple(sorted(self._ranks.items()))))

    def __repr__(self):
        return f"FinComplex({self.ring}, ranks={dict(sorted(self._ranks.items()))})"

    def homology(self):
        return homology(self)

    def relations(self, n):
        return []

    @property
    def is_presented(self):
        return False


class PresentedComplex(FinComplex):
    """A free complex modulo a subcomplex of relations.

    ``relations[n]`` spans a submodule K_n of the free module in degree n.
    The differential must carry K into K and square to zero modulo K; this
    is how non-free modules such as Z/2 over Z/4 enter the computations.
    """

    def __init__(self, ring, ranks, diff=None, relations=None, lo=None, hi=None, check=True):
        super().__init__(ring, ranks, diff, lo=lo, hi=hi, check=False)
        self._rel = {}
        for n, vecs in (relations or {}).items():
            vecs = [[ring.reduce(x) for x in v] for v in vecs]
            vecs = [v for v in vecs if any(v)]
            if any(len(v) != self.rank(int(n)) for v in vecs):
                raise ShapeError(f"relation of wrong length in degree {n}")
            if vecs:
                self._rel[int(n)] = vecs
        if check:
            bad = self.dd_violations()
            if bad:
                raise ValueError(f"not a complex modulo relations in degrees {bad}")

    @classmethod
    def quotient(cls, X, relations, check=True):
        return cls(X.ring, X.ranks, {n: X.d(n) for n in X.degrees()}, relations,
                   lo=X.lo, hi=X.hi, check=check)

    def relations(self, n):
        return self._rel.get(n, [])

    @property
    def is_presented(self):
        return True

    def ambient(self):
        return FinComplex(self.ring, self.ranks, {n: self.d(n) for n in self.degrees()},
                          lo=self.lo, hi=self.hi, check=False)

    def _in_relations(self, n, vecs):
        sq = Subquotient(self.ring, self.rank(n),
                         [[int(i == j) for i in range(self.rank(n))] for j in range(self.rank(n))],
                         self.relations(n))
        return all(sq.is_zero_class(v) for v in vecs)

    def dd_violations(self):
        bad = []
        for n in range(self.lo, self.hi + 1):
            imgs = [self.d(n).apply(v) for v in self.relations(n)]
            dd = (self.d(n - 1) @ self.d(n)).columns() if n - 1 >= self.lo else []
            if not self._in_relations(n - 1, imgs) or not self._in_relations(n - 2, dd):
                bad.append(n)
        return bad

    def __eq__(self, other):
        return (FinComplex.__eq__(self, other)
                and all(self.relations(n) == other.relations(n) for n in self.degrees()))

    __hash__ = FinComplex.__hash__


@dataclass
class GradedHomology:
    """Homology per degree as subquotients of the chain modules."""

    ring: object
    groups: dict = field(default_factory=dict)

    def at(self, n):
        g = self.groups.get(n)
        if g is None:
            return Subquotient(self.ring, 0, [], [])
        return g

    def factors(self, n):
        return self.at(n).factors

    def presentation(self, n):
        return self.at(n).presentation

    def is_zero(self, degrees=None):
        degrees = self.groups if degrees is None else degrees
        return all(not self.at(n).factors for n in degrees)

    def nonzero_degrees(self):
        return [n for n in sorted(self.groups) if self.groups[n].factors]

    def table(self):
        return {n: str(self.groups[n].presentation) for n in sorted(self.groups)}


def cycles_and_boundaries(X, n):
    """Generators of Z_n and B_n as column lists in X_n (relations included)."""
    rel, below = X.relations(n), X.relations(n - 1)
    if not X.rank(n):
        return [], []
    if below:
        A = Matrix.from_columns(X.ring, X.d(n).columns() + below, X.rank(n - 1))
        z = [v[:X.rank(n)] for v in LinearSolver(A).kernel_vectors()]
    else:
        z = LinearSolver(X.d(n)).kernel_vectors()
    b = X.d(n + 1).columns() + rel
    return z + rel, b


def homology_at(X, n):
    z, b = cycles_and_boundaries(X, n)
    return Subquotient(X.ring, X.rank(n), z, b)


def homology(X) -> GradedHomology:
    return GradedHomology(X.ring, {n: homology_at(X, n) for n in X.degrees()})


# ---------------------------------------------------------------- maps

class ChainMap:
    """Degree-zero map with components ``at(n): source_n -> target_n``."""

    def __init__(self, source, target, mats=None, check=True):
        if source.ring != target.ring:
            raise RingMismatch("source and target over different rings")
        self.source, self.target, self.ring = source, target, source.ring
        self._mats = {}
        for n, m in (mats or {}).items():
            n = int(n)
            if not isinstance(m, Matrix):
                m = Matrix(self.ring, target.rank(n), source.rank(n), m)
            if m.shape != (target.rank(n), source.rank(n)):
                raise ShapeError(f"component {n} has shape {m.shape}")
            if not m.is_zero():
                self._mats[n] = m
        if check:
            bad = self.commutation_violations()
            if bad:
                raise ValueError(f"not a chain map in degrees {bad}")

    def at(self, n):
        m = self._mats.get(n)
        if m is None:
            return Matrix.zero(self.ring, self.target.rank(n), self.source.rank(n))
        return m

    def degrees(self):
        lo = min(self.source.lo, self.target.lo)
        hi = max(self.source.hi, self.target.hi)
        return range(lo, hi + 1)

    def commutation_violations(self):
        return [n for n in self.degrees()
                if self.target.d(n) @ self.at(n) != self.at(n - 1) @ self.source.d(n)]

    @classmethod
    def identity(cls, X):
        return cls(X, X, {n: Matrix.identity(X.ring, X.rank(n)) for n in X.degrees()},
                   check=False)

    @classmethod
    def zero(cls, X, Y):
        return cls(X, Y, {}, check=False)

    def __matmul__(self, other):
        """Composition ``self o other``."""
        return ChainMap(other.source, self.target,
                        {n: self.at(n) @ other.at(n) for n in other.source.degrees()},
                        check=False)

    def __add__(self, other):
        return ChainMap(self.source, self.target,
                        {n: self.at(n) + other.at(n) for n in self.source.degrees()},
                        check=False)

    def __neg__(self):
        return ChainMap(self.source, self.target, {n: -m for n, m in self._mats.items()},
                        check=False)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        return (isinstance(other, ChainMap) and self.source == other.source
                and self.target == other.target
                and all(self.at(n) == other.at(n) for n in self.degrees()))

    def is_zero(self):
        return not self._mats

    def __repr__(self):
        return f"ChainMap({self.source!r} -> {self.target!r})"


class Homotopy:
    """Degree +1 map with components ``at(n): source_n -> target_{n+1}``."""

    def __init__(self, source, target, mats=None):
        self.source, self.target, self.ring = source, target, source.ring
        self._mats = {}
        for n, m in (mats or {}).items():
            if not isinstance(m, Matrix):
                m = Matrix(self.ring, target.rank(n + 1), source.rank(n), m)
            if m.shape != (target.rank(n + 1), source.rank(n)):
                raise ShapeError(f"homotopy component {n} has shape {m.shape}")
            if not m.is_zero():
                self._mats[n] = m

    def at(self, n):
        m = self._mats.get(n)
        if m is None:
            return Matrix.zero(self.ring, self.target.rank(n + 1), self.source.rank(n))
        return m

    def boundary_at(self, n):
        """(ds + sd)_n."""
        return self.target.d(n + 1) @ self.at(n) + self.at(n - 1) @ self.source.d(n)

    def verifies(self, f, g, degrees=None):
        """Whether ds + sd = f - g in the given degrees."""
        degrees = f.degrees() if degrees is None else degrees
        return all(self.boundary_at(n) == f.at(n) - g.at(n) for n in degrees)


# ---------------------------------------------------------------- basic objects

def sphere(n, ring):
    return FinComplex(ring, {n: 1})


def disk(n, ring):
    """D^n: basis in degrees n and n-1 with identity differential."""
    return FinComplex(ring, {n: 1, n - 1: 1}, {n: [[1]]})


def interval(ring):
    """I: [I] in degree 1, [0] and [1] in degree 0, d[I] = [0] - [1]."""
    return FinComplex(ring, {1: 1, 0: 2}, {1: [[1], [-1]]})


def direct_sum(*Xs):
    ring = Xs[0].ring
    degs = set()
    for X in Xs:
        degs.update(X.degrees())
    ranks = {n: sum(X.rank(n) for X in Xs) for n in degs}
    diff = {}
    for n in degs:
        rs = [X.rank(n - 1) for X in Xs]
        cs = [X.rank(n) for X in Xs]
        diff[n] = block_matrix(ring, rs, cs, {(i, i): X.d(n) for i, X in enumerate(Xs)})
    lo = min((X.lo for X in Xs), default=0)
    hi = max((X.hi for X in Xs), default=-1)
    return FinComplex(ring, ranks, diff, lo=lo, hi=hi, check=False)


def sum_inclusion(Xs, k):
    """Inclusion of the k-th summand into direct_sum(*Xs)."""
    S = direct_sum(*Xs)
    mats = {}
    for n in S.degrees():
        rs = [X.rank(n) for X in Xs]
        mats[n] = block_matrix(S.ring, rs, [Xs[k].rank(n)],
                               {(k, 0): Matrix.identity(S.ring, Xs[k].rank(n))})
    return ChainMap(Xs[k], S, mats, check=False)


def sum_projection(Xs, k):
    S = direct_sum(*Xs)
    mats = {}
    for n in S.degrees():
        cs = [X.rank(n) for X in Xs]
        mats[n] = block_matrix(S.ring, [Xs[k].rank(n)], cs,
                               {(0, k): Matrix.identity(S.ring, Xs[k].rank(n))})
    return ChainMap(S, Xs[k], mats, check=False)


def suspension(X, k):
    """X (x) S^k; the sphere's generator has zero differential, so no signs."""
    return FinComplex(X.ring, {n + k: r for n, r in X.ranks.items()},
                      {n + k: X.d(n) for n in X.degrees()}, lo=X.lo + k, hi=X.hi + k,
                      check=False)


def up_shift(X):
    """(Y X)_n = X_{n+1} with d(m-bar) = -(dm)-bar."""
    return FinComplex(X.ring, {n - 1: r for n, r in X.ranks.items()},
                      {n - 1: -X.d(n) for n in X.degrees()}, lo=X.lo - 1, hi=X.hi - 1,
                      check=False)


def down_shift(X):
    """Inverse of up_shift."""
    return FinComplex(X.ring, {n + 1: r for n, r in X.ranks.items()},
                      {n + 1: -X.d(n) for n in X.degrees()}, lo=X.lo + 1, hi=X.hi + 1,
                      check=False)


# ---------------------------------------------------------------- tensor and Hom

def tensor_offsets(X, Y, n):
    """Offsets {i: start} of the X_i (x) Y_{n-i} blocks in (X (x) Y)_n."""
    offs, pos = {}, 0
    for i in range(X.lo, X.hi + 1):
        j = n - i
        r = X.rank(i) * Y.rank(j)
        if r:
            offs[i] = pos
            pos += r
    return offs, pos


def tensor(X, Y):
    if X.ring != Y.ring:
        raise RingMismatch(f"{X.ring} vs {Y.ring}")
    ring = X.ring
    lo, hi = X.lo + Y.lo, X.hi + Y.hi
    layout = {n: tensor_offsets(X, Y, n) for n in range(lo - 1, hi + 1)}
    ranks = {n: layout[n][1] for n in range(lo, hi + 1)}
    diff = {}
    for n in range(lo + 1, hi + 1):
        offs, size = layout[n]
        toffs, tsize = layout[n - 1]
        D = [[0] * size for _ in range(tsize)]
        for i, start in offs.items():
            j = n - i
            ry = Y.rank(j)
            dx = X.d(i).data
            dy = Y.d(j).data
            sgn = _sign(i)
            for a in range(X.rank(i)):
                for b in range(ry):
                    col = start + a * ry + b
                    if i - 1 in toffs:  # dx (x) y
                        base = toffs[i - 1]
                        for a2 in range(X.rank(i - 1)):
                            c = dx[a2][a]
                            if c:
                                D[base + a2 * ry + b][col] += c
                    if i in toffs and Y.rank(j - 1):  # (-1)^i x (x) dy
                        base = toffs[i]
                        ry2 = Y.rank(j - 1)
                        for b2 in range(ry2):
                            c = dy[b2][b]
                            if c:
                                D[base + a * ry2 + b2][col] += sgn * c
        diff[n] = Matrix(ring, tsize, size, D)
    if not (X.is_presented or Y.is_presented):
        return FinComplex(ring, ranks, diff, lo=lo, hi=hi, check=False)
    rels = {}
    for n in range(lo, hi + 1):
        offs, size = layout[n]
        vecs = []
        for i, start in offs.items():
            j = n - i
            ry = Y.rank(j)
            for k in X.relations(i):        # K_i (x) Y_j
                for b in range(ry):
                    v = [0] * size
                    for a, c in enumerate(k):
                        v[start + a * ry + b] = c
                    vecs.append(v)
            for k in Y.relations(j):        # X_i (x) K_j
                for a in range(X.rank(i)):
                    v = [0] * size
                    v[start + a * ry: start + (a + 1) * ry] = k
                    vecs.append(v)
        rels[n] = vecs
    return PresentedComplex(ring, ranks, diff, rels, lo=lo, hi=hi, check=False)


def tensor_maps(f, g):
    """f (x) g for degree-zero chain maps."""
    S, T = tensor(f.source, g.source), tensor(f.target, g.target)
    mats = {}
    for n in S.degrees():
        so, _ = tensor_offsets(f.source, g.source, n)
        to, _ = tensor_offsets(f.target, g.target, n)
        M = [[0] * S.rank(n) for _ in range(T.rank(n))]
        for i, start in so.items():
            if i not in to:
                continue
            j = n - i
            fi, gj = f.at(i).data, g.at(j).data
            ry, ry2 = g.source.rank(j), g.target.rank(j)
            for a in range(f.source.rank(i)):
                for b in range(ry):
                    col = start + a * ry + b
                    for a2 in range(f.target.rank(i)):
                        fa = fi[a2][a]
                        if not fa:
                            continue
                        for b2 in range(ry2):
                            c = gj[b2][b]
                            if c:
                                M[to[i] + a2 * ry2 + b2][col] += fa * c
        mats[n] = Matrix(S.ring, T.rank(n), S.rank(n), M)
    return ChainMap(S, T, mats, check=False)


def hom_offsets(X, Y, n):
    offs, pos = {}, 0
    for i in range(X.lo, X.hi + 1):
        r = X.rank(i) * Y.rank(i + n)
        if r:
            offs[i] = pos
            pos += r
    return offs, pos


def hom(X, Y):
    """Hom(X, Y) with (df)(x) = d(f(x)) - (-1)^n f(dx)."""
    if X.ring != Y.ring:
        raise RingMismatch(f"{X.ring} vs {Y.ring}")
    ring = X.ring
    lo, hi = Y.lo - X.hi, Y.hi - X.lo
    layout = {n: hom_offsets(X, Y, n) for n in range(lo - 1, hi + 1)}
    ranks = {n: layout[n][1] for n in range(lo, hi + 1)}
    diff = {}
    for n in range(lo + 1, hi + 1):
        offs, size = layout[n]
        toffs, tsize = layout[n - 1]
        D = [[0] * size for _ in range(tsize)]
        sgn = -_sign(n)
        for i, start in offs.items():
            ry = Y.rank(i + n)
            dy = Y.d(i + n).data
            for a in range(X.rank(i)):
                for b in range(ry):
                    col = start + a * ry + b
                    if i in toffs:  # d o f
                        ry2 = Y.rank(i + n - 1)
                        for b2 in range(ry2):
                            c = dy[b2][b]
                            if c:
                                D[toffs[i] + a * ry2 + b2][col] += c
                    if i + 1 in toffs:  # -(-1)^n f o d
                        dx = X.d(i + 1).data
                        for a2 in range(X.rank(i + 1)):
                            c = dx[a][a2]
                            if c:
                                D[toffs[i + 1] + a2 * ry + b][col] += sgn * c
        diff[n] = Matrix(ring, tsize, size, D)
    return FinComplex(ring, ranks, diff, lo=lo, hi=hi, check=False)


def hom_vector_to_maps(X, Y, n, vec):
    """Split a degree-n element of Hom(X, Y) into matrices Y_{i+n} x X_i."""
    offs, _ = hom_offsets(X, Y, n)
    out = {}
    for i, start in offs.items():
        ry = Y.rank(i + n)
        out[i] = Matrix(X.ring, ry, X.rank(i),
                        [[vec[start + a * ry + b] for a in range(X.rank(i))] for b in range(ry)])
    return out


def maps_to_hom_vector(X, Y, n, mats):
    offs, size = hom_offsets(X, Y, n)
    vec = [0] * size
    for i, start in offs.items():
        ry = Y.rank(i + n)
        m = mats.get(i)
        if m is None:
            continue
        for a in range(X.rank(i)):
            for b in range(ry):
                vec[start + a * ry + b] = m.data[b][a]
    return vec


# ---------------------------------------------------------------- cones and cylinders

def cone(f):
    """Y with X (x) D^1 glued along f: (C f)_n = Y_n + X_{n-1}.

    d(y, x) = (dy + (-1)^{|x|} f(x), dx).
    """
    X, Y = f.source, f.target
    ring = f.ring
    lo, hi = min(Y.lo, X.lo + 1), max(Y.hi, X.hi + 1)
    ranks = {n: Y.rank(n) + X.rank(n - 1) for n in range(lo, hi + 1)}
    diff = {}
    for n in range(lo, hi + 1):
        rs = [Y.rank(n - 1), X.rank(n - 2)]
        cs = [Y.rank(n), X.rank(n - 1)]
        diff[n] = block_matrix(ring, rs, cs, {
            (0, 0): Y.d(n), (0, 1): f.at(n - 1).scale(_sign(n - 1)), (1, 1): X.d(n - 1)})
    return FinComplex(ring, ranks, diff, lo=lo, hi=hi, check=False)


@dataclass
class Cylinder:
    """Mapping cylinder Mf with f = r o j, i: Y -> Mf and ds + sd = id - i r."""

    middle: FinComplex
    j: ChainMap
    r: ChainMap
    i: ChainMap
    homotopy: Homotopy


def cylinder(f) -> Cylinder:
    """Mf = Y + X (x) [1] + X (x) [I], with x (x) [0] identified with f(x)."""
    X, Y = f.source, f.target
    ring = f.ring
    lo, hi = min(X.lo, Y.lo), max(X.hi + 1, Y.hi)
    blocks = {n: [Y.rank(n), X.rank(n), X.rank(n - 1)] for n in range(lo - 1, hi + 2)}
    ranks = {n: sum(blocks[n]) for n in range(lo, hi + 1)}
    diff = {}
    for n in range(lo, hi + 1):
        e = _sign(n - 1)
        diff[n] = block_matrix(ring, blocks[n - 1], blocks[n], {
            (0, 0): Y.d(n), (1, 1): X.d(n),
            (0, 2): f.at(n - 1).scale(e),
            (1, 2): Matrix.identity(ring, X.rank(n - 1)).scale(-e),
            (2, 2): X.d(n - 1)})
    M = FinComplex(ring, ranks, diff, lo=lo, hi=hi, check=False)
    j, r, i, s = {}, {}, {}, {}
    for n in M.degrees():
        j[n] = block_matrix(ring, blocks[n], [X.rank(n)],
                            {(1, 0): Matrix.identity(ring, X.rank(n))})
        r[n] = block_matrix(ring, [Y.rank(n)], blocks[n],
                            {(0, 0): Matrix.identity(ring, Y.rank(n)), (0, 1): f.at(n)})
        i[n] = block_matrix(ring, blocks[n], [Y.rank(n)],
                            {(0, 0): Matrix.identity(ring, Y.rank(n))})
        s[n] = block_matrix(ring, blocks[n + 1], blocks[n],
                            {(2, 1): Matrix.identity(ring, X.rank(n)).scale(_sign(n + 1))})
    return Cylinder(M, ChainMap(X, M, j, check=False), ChainMap(M, Y, r, check=False),
                    ChainMap(Y, M, i, check=False), Homotopy(M, M, s))


@dataclass
class Cocylinder:
    """Mapping cocylinder Nf with f = rho o nu, pi o nu = id, ds + sd = id - nu pi."""

    middle: FinComplex
    nu: ChainMap
    rho: ChainMap
    pi: ChainMap
    homotopy: Homotopy
    section: dict  # graded (not chain) section of rho, per degree


def cocylinder(f) -> Cocylinder:
    """Nf = X x_f Y^I: triples (x, b, c) with b in Y_n, c in Y_{n+1}.

    d(x, b, c) = (dx, db, dc - (-1)^n (f(x) - b)).
    """
    X, Y = f.source, f.target
    ring = f.ring
    lo, hi = min(X.lo, Y.lo - 1), max(X.hi, Y.hi)
    blocks = {n: [X.rank(n), Y.rank(n), Y.rank(n + 1)] for n in range(lo - 1, hi + 2)}
    ranks = {n: sum(blocks[n]) for n in range(lo, hi + 1)}
    diff = {}
    for n in range(lo, hi + 1):
        e = _sign(n)
        diff[n] = block_matrix(ring, blocks[n - 1], blocks[n], {
            (0, 0): X.d(n), (2, 0): f.at(n).scale(-e),
            (1, 1): Y.d(n), (2, 1): Matrix.identity(ring, Y.rank(n)).scale(e),
            (2, 2): Y.d(n + 1)})
    N = FinComplex(ring, ranks, diff, lo=lo, hi=hi, check=False)
    nu, rho, pi, s, sec = {}, {}, {}, {}, {}
    for n in N.degrees():
        nu[n] = block_matrix(ring, blocks[n], [X.rank(n)],
                             {(0, 0): Matrix.identity(ring, X.rank(n)), (1, 0): f.at(n)})
        rho[n] = block_matrix(ring, [Y.rank(n)], blocks[n],
                              {(0, 1): Matrix.identity(ring, Y.rank(n))})
        pi[n] = block_matrix(ring, [X.rank(n)], blocks[n],
                             {(0, 0): Matrix.identity(ring, X.rank(n))})
        s[n] = block_matrix(ring, blocks[n + 1], blocks[n],
                            {(1, 2): Matrix.identity(ring, Y.rank(n + 1)).scale(_sign(n + 1))})
        sec[n] = block_matrix(ring, blocks[n], [Y.rank(n)],
                              {(1, 0): Matrix.identity(ring, Y.rank(n))})
    return Cocylinder(N, ChainMap(X, N, nu, check=False), ChainMap(N, Y, rho, check=False),
                      ChainMap(N, X, pi, check=False), Homotopy(N, N, s), sec)


# ---------------------------------------------------------------- contractibility

@dataclass
class Contractible:
    homotopy: Homotopy
    degrees: tuple

    def __bool__(self):
        return True


@dataclass
class NotContractible:
    degree: int
    reason: str  # "homology" or "infeasible"

    def __bool__(self):
        return False


def _homotopy_system(S, T, unknown_degrees, eq_degrees, rhs):
    """Linear system for ds + sd = rhs(n) in the unknowns s_m, m in unknown_degrees.

    Unknown s_m is a T_{m+1} x S_m matrix flattened row-major.
    """
    ring = S.ring
    offs, pos = {}, 0
    for m in unknown_degrees:
        offs[m] = pos
        pos += T.rank(m + 1) * S.rank(m)
    rows, b = [], []
    for n in eq_degrees:
        rt, rs = T.rank(n), S.rank(n)
        A = T.d(n + 1).data          # T_n x T_{n+1}
        B = S.d(n).data              # S_{n-1} x S_n
        R = rhs(n).data
        for i in range(rt):
            for q in range(rs):
                row = [0] * pos
                if n in offs:        # (d s_n)[i][q] = sum_p A[i][p] s_n[p][q]
                    for p in range(T.rank(n + 1)):
                        if A[i][p]:
                            row[offs[n] + p * rs + q] += A[i][p]
                if n - 1 in offs:    # (s_{n-1} d)[i][q] = sum_p s[i][p] B[p][q]
                    w = S.rank(n - 1)
                    for p in range(w):
                        if B[p][q]:
                            row[offs[n - 1] + i * w + p] += B[p][q]
                rows.append(row)
                b.append(R[i][q])
    return offs, Matrix(ring, len(rows), pos, rows), b


def _unpack(S, T, offs, x):
    mats = {}
    for m, start in offs.items():
        r, c = T.rank(m + 1), S.rank(m)
        mats[m] = Matrix(S.ring, r, c, [x[start + i * c: start + (i + 1) * c] for i in range(r)])
    return mats


def local_contraction_feasible(X, n):
    """Can d s_n + s_{n-1} d = id hold at degree n alone?"""
    ident = lambda k: Matrix.identity(X.ring, X.rank(k))
    offs, A, b = _homotopy_system(X, X, [n - 1, n], [n], ident)
    return LinearSolver(A).solve(b) is not None if A.rows else True


def contracting_homotopy(X, interior=None):
    """Contractible(s) with ds + sd = id, or NotContractible(degree, reason).

    With ``interior = (a, b)`` the verdict concerns degrees a..b only, which
    is how truncations of unbounded complexes are handled.
    """
    degrees = list(X.degrees()) if interior is None else list(range(interior[0], interior[1] + 1))
    for n in degrees:
        if homology_at(X, n).factors:
            return NotContractible(n, "homology")
    for n in degrees:
        if not local_contraction_feasible(X, n):
            return NotContractible(n, "infeasible")
    ring = X.ring
    if interior is None:
        mats = {}
        prev = Matrix.zero(ring, X.rank(X.lo), X.rank(X.lo - 1))
        for n in degrees:
            rhs = Matrix.identity(ring, X.rank(n)) - prev @ X.d(n)
            solver = LinearSolver(X.d(n + 1))
            cols = []
            for c in rhs.columns():
                x = solver.solve(c)
                if x is None:
                    return NotContractible(n, "infeasible")
                cols.append(x)
            mats[n] = Matrix.from_columns(ring, cols, X.rank(n + 1))
            prev = mats[n]
        return Contractible(Homotopy(X, X, mats), tuple(degrees))
    offs, A, b = _homotopy_system(X, X, range(degrees[0] - 1, degrees[-1] + 1), degrees,
                                  lambda k: Matrix.identity(ring, X.rank(k)))
    x = LinearSolver(A).solve(b) if A.rows else [0] * A.cols
    if x is None:
        return NotContractible(degrees[0], "infeasible")
    return Contractible(Homotopy(X, X, _unpack(X, X, offs, x)), tuple(degrees))


def find_homotopy(f, g, degrees=None):
    """A homotopy s with ds + sd = f - g on the given degrees, or None."""
    S, T = f.source, f.target
    degrees = list(f.degrees()) if degrees is None else list(degrees)
    offs, A, b = _homotopy_system(S, T, range(degrees[0] - 1, degrees[-1] + 1), degrees,
                                  lambda n: f.at(n) - g.at(n))
    x = LinearSolver(A).solve(b) if A.rows else [0] * A.cols
    if x is None:
        return None
    return Homotopy(S, T, _unpack(S, T, offs, x))


# ---------------------------------------------------------------- equivalences

def induced_map(f, n):
    """(matrix, source homology, target homology) of H_n(f) in coordinates."""
    hs, ht = homology_at(f.source, n), homology_at(f.target, n)
    fn = f.at(n)
    cols = [list(ht.coords(fn.apply(rep))) for rep in hs.reps]
    M = [[c[i] for c in cols] for i in range(len(ht.factors))]
    return M, hs, ht


def is_quasi_iso(f, degrees=None):
    degrees = f.degrees() if degrees is None else degrees
    for n in degrees:
        M, hs, ht = induced_map(f, n)
        if not coord_map_is_iso(f.ring, M, hs.moduli, ht.moduli):
            return False
    return True


def is_h_equivalence(f, interior=None):
    """Verdict on the cone: Contractible (truthy) exactly for h-equivalences."""
    if interior is not None:
        interior = (interior[0] + 1, interior[1])
    return contracting_homotopy(cone(f), interior)


def subcomplex(C, gens):
    """The subcomplex of C spanned degreewise by ``gens[n]`` (closed under d).

    Returns (S, inclusion matrices).  S is presented by its cyclic
    decomposition, so torsion submodules over Z/n are handled exactly.
    """
    ring = C.ring
    parts = {n: Subquotient(ring, C.rank(n), gens.get(n, []), []) for n in C.degrees()}
    ranks = {n: len(sq.reps) for n, sq in parts.items()}
    incl = {n: Matrix.from_columns(ring, sq.reps, C.rank(n)) for n, sq in parts.items()}
    diff = {}
    for n, sq in parts.items():
        if n - 1 not in parts:
            continue
        cols = [list(parts[n - 1].coords(C.d(n).apply(r))) for r in sq.reps]
        diff[n] = Matrix.from_columns(ring, cols, ranks[n - 1])
    rels = {n: [[m * (i == k) for i in range(ranks[n])] for k, m in enumerate(sq.moduli)
                if m and not (hasattr(ring, "n") and m == ring.n)]
            for n, sq in parts.items()}
    if any(rels.values()):
        S = PresentedComplex(ring, ranks, diff, rels, lo=C.lo, hi=C.hi, check=False)
    else:
        S = FinComplex(ring, ranks, diff, lo=C.lo, hi=C.hi, check=False)
    return S, incl
