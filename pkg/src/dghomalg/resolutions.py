"""Resolutions of DG modules: Cartan-Eilenberg/Moore, distinguished, Koszul, bar.

Every resolution is returned as a ``SplitModule``: a relatively free module
A (x) Xbar whose generators carry a bidegree (p, q) with total degree p + q.
The differential of a generator splits into components d^r that drop the
filtration by r.  Constructions are finite: ``top`` bounds the total degree
through which the result is exact, ``pmax`` bounds the filtration.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .complexes import ChainMap, FinComplex, Homotopy, is_quasi_iso
from .dg_algebra import (DGAlgebra, DGModule, MissingStructure, RelFreeModule, _sign, trivial_module,
                         _unit_vec, homology_algebra, homology_module, validate_cup1)
from .linalg import LinearSolver, Matrix, Subquotient


class WindowTooSmall(RuntimeError):
    pass


class SignDerivationFailed(RuntimeError):
    pass


def ground_algebra(ring):
    """R concentrated in degree 0."""
    return DGAlgebra(FinComplex(ring, {0: 1}), 0, {(0, 0, 0, 0): [1]}, aug=[1], name="R")


def as_module(A: DGAlgebra, C: FinComplex, side="left"):
    """A complex as a module over the ground algebra (scalar action)."""
    action = {(0, 0, j, m): _unit_vec(C.rank(j), m) for j in C.degrees() for m in range(C.rank(j))}
    return DGModule(A, C, action, side, name="C")


# ---------------------------------------------------------------- split modules

class SplitModule(RelFreeModule):
    """A (x) Xbar with generators in bidegrees (p, q).

    ``gens[n]`` lists the bidegrees of the generators of total degree n in
    their index order; ``gen_diff[n]`` their differentials.
    """

    def __init__(self, algebra, gens: dict, gen_diff: dict, name=None, kind="general",
                 check=True):
        self.bidegrees = {int(n): [tuple(b) for b in bs] for n, bs in gens.items() if bs}
        for n, bs in self.bidegrees.items():
            if any(p + q != n or p < 0 for p, q in bs):
                raise ValueError(f"bad bidegree in total degree {n}")
        super().__init__(algebra, {n: len(b) for n, b in self.bidegrees.items()}, gen_diff,
                         name=name or "X", check=check)
        self.kind = kind

    def filtration_of(self, n, idx):
        """Filtration degree of a carrier basis element."""
        i, _, g = self.decompose(n, idx)
        return self.bidegrees[n - i][g][0]

    def basis_filtration(self, n):
        out = []
        for idx in range(self.rank(n)):
            i, _, g = self.decompose(n, idx)
            out.append(self.bidegrees[n - i][g][0])
        return out

    @property
    def pmax(self):
        return max((p for bs in self.bidegrees.values() for p, _ in bs), default=-1)

    def barx(self):
        """Generator ranks by bidegree."""
        out = {}
        for bs in self.bidegrees.values():
            for b in bs:
                out[b] = out.get(b, 0) + 1
        return out

    def component(self, r, n, g):
        """d^r of generator g in total degree n: the terms landing in filtration p - r."""
        p = self.bidegrees[n][g][0]
        v = list(self.gen_diff[n][g])
        for idx, f in enumerate(self.basis_filtration(n - 1)):
            if f != p - r:
                v[idx] = 0
        return v

    def generators_in_filtration(self, p):
        return [(n, g) for n, bs in sorted(self.bidegrees.items()) for g, b in enumerate(bs)
                if b[0] == p]


def validate_split(X: SplitModule):
    """Violations of the multicomplex identities, as (r, p, q) triples plus messages."""
    bad = []
    for n, bs in sorted(X.bidegrees.items()):
        filt = X.basis_filtration(n - 1)
        filt2 = X.basis_filtration(n - 2)
        for g, (p, q) in enumerate(bs):
            v = X.gen_diff[n][g]
            if any(c and f > p for c, f in zip(v, filt)):
                bad.append(((-1, p, q), "differential raises filtration"))
            if not X.rank(n - 2):
                continue
            dd = X.carrier.d(n - 1).apply(v)
            drops = sorted({p - f for c, f in zip(dd, filt2) if c})
            for r in drops:
                bad.append(((r, p, q), f"sum of d^i d^j with i + j = {r} is nonzero"))
    return bad


def classify(X: SplitModule):
    """'distinguished' when d^0 vanishes on generators (cell-like, free), else 'general'."""
    for n, bs in X.bidegrees.items():
        for g in range(len(bs)):
            if any(X.component(0, n, g)):
                return "general"
    return "distinguished"


@dataclass
class ResolutionMap:
    """alpha: X -> M, a map of DG A-modules from a split module."""
    X: SplitModule
    M: DGModule
    alpha: ChainMap
    kind: str
    top: int
    notes: dict = field(default_factory=dict)

    def is_quasi_iso(self, degrees=None):
        degrees = range(self.X.carrier.lo, self.top + 1) if degrees is None else degrees
        return is_quasi_iso(self.alpha, degrees)

    def alpha_on(self, n, v):
        return self.alpha.at(n).apply(v) if self.M.rank(n) else []


# ---------------------------------------------------------------- bicomplexes

class Bicomplex:
    """Columns P_{p,*} with vertical d0 and horizontal maps; d1 = (-1)^q times horizontal."""

    def __init__(self, ring, columns: dict, horizontal: dict, algebra=None):
        self.ring = ring
        self.columns = columns
        self.horizontal = horizontal   # horizontal[p][q]: P_{p,q} -> P_{p-1,q}
        self.algebra = algebra

    def rank(self, p, q):
        C = self.columns.get(p)
        return C.rank(q) if C is not None else 0

    @property
    def ranks(self):
        return {(p, q): C.rank(q) for p, C in self.columns.items() for q in C.degrees()
                if C.rank(q)}

    def d0(self, p, q):
        C = self.columns.get(p)
        return C.d(q) if C is not None else Matrix.zero(self.ring, 0, 0)

    def h(self, p, q):
        m = self.horizontal.get(p, {}).get(q)
        if m is None:
            return Matrix.zero(self.ring, self.rank(p - 1, q), self.rank(p, q))
        return m

    def d1(self, p, q):
        return self.h(p, q).scale(_sign(q))

    def violations(self):
        bad = []
        for (p, q) in self.ranks:
            if not (self.d0(p, q - 1) @ self.d0(p, q)).is_zero() and self.rank(p, q - 2):
                bad.append(("d0d0", p, q))
            if p >= 2 and not (self.d1(p - 1, q) @ self.d1(p, q)).is_zero():
                bad.append(("d1d1", p, q))
            if p >= 1 and self.rank(p - 1, q - 1):
                s = self.d0(p - 1, q) @ self.d1(p, q) + self.d1(p, q - 1) @ self.d0(p, q)
                if not s.is_zero():
                    bad.append(("d0d1+d1d0", p, q))
        return bad


def total_complex(B: Bicomplex) -> FinComplex:
    """Sum over p + q = n with differential d0 + d1; ``filtration[n]`` lists p per basis element."""
    from .linalg import block_matrix
    cells = sorted(B.ranks)
    if not cells:
        T = FinComplex(B.ring, {})
        T.filtration = {}
        return T
    lo = min(p + q for p, q in cells)
    hi = max(p + q for p, q in cells)
    blocks = {n: [(p, q) for p, q in cells if p + q == n] for n in range(lo - 1, hi + 1)}
    ranks = {n: sum(B.rank(*c) for c in blocks[n]) for n in range(lo, hi + 1)}
    diff = {}
    for n in range(lo + 1, hi + 1):
        src, tgt = blocks[n], blocks[n - 1]
        mats = {}
        for j, (p, q) in enumerate(src):
            for i, (p2, q2) in enumerate(tgt):
                if p2 == p and q2 == q - 1:
                    mats[(i, j)] = B.d0(p, q)
                elif p2 == p - 1 and q2 == q:
                    mats[(i, j)] = B.d1(p, q)
        diff[n] = block_matrix(B.ring, [B.rank(*c) for c in tgt], [B.rank(*c) for c in src], mats)
    T = FinComplex(B.ring, ranks, diff, lo=lo, hi=hi, check=False)
    T.filtration = {n: [p for p, q in blocks[n] for _ in range(B.rank(p, q))]
                    for n in range(lo, hi + 1)}
    return T


# ---------------------------------------------------------------- Moore / Cartan-Eilenberg

def _kernel_in(C, q, mat, gens):
    """Generators of {k in span(gens) : mat k = 0 modulo the relations of C in the target}."""
    ring = C.ring
    if not gens:
        return []
    G = Matrix.from_columns(ring, gens, len(gens[0]))
    img = mat @ G
    rel = C.relations(q) if C is not None else []
    if img.rows == 0:
        combos = [_unit_vec(len(gens), j) for j in range(len(gens))]
    else:
        A = Matrix.from_columns(ring, img.columns() + rel, img.rows)
        combos = [v[:len(gens)] for v in LinearSolver(A).kernel_vectors()]
    out = [G.apply(c) for c in combos]
    return [v for v in out if any(v)]


class _Column:
    """One column A (x) Q_p of a Moore resolution, grown degree by degree."""

    def __init__(self, A, target, kernel):
        self.A = A
        self.target = target          # DGModule receiving the column
        self.kernel = kernel          # q -> generators of the submodule to be covered
        self.phi = {}                 # q -> images of generators in the target
        self.bottom = {}              # q -> {top index: bottom index in degree q - 1}

    def module(self):
        A = self.A
        ranks = {q: len(v) for q, v in self.phi.items() if v}
        probe = RelFreeModule(A, ranks, {}, check=False)
        diff = {}
        for q, tops in self.bottom.items():
            vecs = []
            for t in range(len(self.phi.get(q, []))):
                v = [0] * probe._layout[q - 1][1]
                if t in tops:
                    v[probe.index(q - 1, 0, A.unit, tops[t])] = 1
                vecs.append(v)
            diff[q] = vecs
        return RelFreeModule(A, ranks, diff, check=False)

    def phi_matrix(self, col, q):
        """Matrix of the A-linear extension of phi on the carrier in degree q."""
        A, T = self.A, self.target
        cols = []
        for idx in range(col.rank(q)):
            i, a, g = col.decompose(q, idx)
            cols.append(T.act(i, _unit_vec(A.rank(i), a), q - i, self.phi[q - i][g]))
        return Matrix.from_columns(A.ring, cols, T.rank(q))

    def add(self, q, vec):
        self.phi.setdefault(q, []).append(list(vec))
        return len(self.phi[q]) - 1

    def grow(self, q, allow_disks=True):
        A, T = self.A, self.target
        C = T.carrier
        ring = A.ring
        rel = C.relations(q)
        col = self.module()
        Kq1 = self.kernel(q + 1) if allow_disks else []
        bK = [C.d(q + 1).apply(k) for k in Kq1] if C.rank(q) else []
        # boundaries already hit by A_{>0} (x) Q
        imB = []
        if C.rank(q) and col.rank(q + 1):
            Phi1 = self.phi_matrix(col, q + 1)
            imB = [C.d(q + 1).apply(v) for v in Phi1.columns()]
        if allow_disks and any(any(v) for v in bK):
            sq = Subquotient(ring, C.rank(q), bK + rel, imB + rel)
            if sq.reps:
                D = Matrix.from_columns(ring, bK + rel, C.rank(q))
                solver = LinearSolver(D)
                for r in sq.reps:
                    x = solver.solve(r)
                    k = [0] * C.rank(q + 1)
                    for j, c in enumerate(x[:len(Kq1)]):
                        if c:
                            for t, e in enumerate(Kq1[j]):
                                k[t] += c * e
                    k = [ring.reduce(t) for t in k]
                    top = self.add(q + 1, k)
                    bot = self.add(q, C.d(q + 1).apply(k))
                    self.bottom.setdefault(q + 1, {})[top] = bot
                col = self.module()
        # cycles
        Kq = self.kernel(q)
        if not Kq or not C.rank(q):
            return
        zK = _kernel_in(C, q - 1, C.d(q), Kq) if C.rank(q - 1) else list(Kq)
        imZ = []
        if col.rank(q):
            Phi = self.phi_matrix(col, q)
            if col.rank(q - 1):
                zP = LinearSolver(col.carrier.d(q)).kernel_vectors()
            else:
                zP = [_unit_vec(col.rank(q), j) for j in range(col.rank(q))]
            imZ = [Phi.apply(z) for z in zP]
        bq = [C.d(q + 1).apply(k) for k in self.kernel(q + 1)] if C.rank(q + 1) else []
        sq = Subquotient(ring, C.rank(q), zK + rel + bq, imZ + bq + rel)
        for r in sq.reps:
            self.add(q, r)


def _moore_columns(A: DGAlgebra, M: DGModule, pmax, top):
    if A.lo < 0:
        raise ValueError("algebras must be concentrated in nonnegative degrees")
    cut = top + 2
    columns, phis = [], []
    C = M.carrier
    full = {q: [_unit_vec(C.rank(q), j) for j in range(C.rank(q))] for q in C.degrees()}
    target, kernel = M, (lambda q, full=full: full.get(q, []))
    qlo = C.lo
    for p in range(pmax + 1):
        qtop = cut - p
        colb = _Column(A, target, kernel)
        for q in range(qlo, qtop + 1):
            colb.grow(q, allow_disks=q + 1 <= qtop)
        col = colb.module()
        mats = {q: colb.phi_matrix(col, q) for q in col.degrees()}
        columns.append((colb, col))
        phis.append(mats)
        # kernel of this column's map, for the next column
        ker = {}
        for q in col.degrees():
            if q > qtop or not col.rank(q):
                continue
            gens = [_unit_vec(col.rank(q), j) for j in range(col.rank(q))]
            ker[q] = _kernel_in(target.carrier, q, mats[q], gens)
        if not any(ker.values()):
            break
        target, kernel = col, (lambda q, ker=ker: ker.get(q, []))
        qlo = min(q for q, v in ker.items() if v)
    return columns, phis


def _assemble(A, columns, top, pmax):
    """Split module and generator maps from Moore columns, keeping total degree <= top + 1."""
    gens, where = {}, {}
    for p, (colb, col) in enumerate(columns):
        for q in sorted(colb.phi):
            for g in range(len(colb.phi[q])):
                n = p + q
                if n > top + 1:
                    continue
                gens.setdefault(n, []).append((p, q))
                where[(p, q, g)] = (n, len(gens[n]) - 1)
    probe = SplitModule(A, gens, {}, check=False)
    gen_diff = {}
    for (p, q, g), (n, G) in where.items():
        colb, col = columns[p]
        v = [0] * probe._layout[n - 1][1]
        tops = colb.bottom.get(q, {})
        if g in tops:
            v[probe.index(n - 1, 0, A.unit, where[(p, q - 1, tops[g])][1])] += 1
        if p >= 1:
            _, prev = columns[p - 1]
            image = colb.phi[q][g]
            for i, a, g2, c in prev.entries(q, image):
                v[probe.index(n - 1, i, a, where[(p - 1, q - i, g2)][1])] += _sign(q) * c
        gen_diff.setdefault(n, [None] * len(gens[n]))[G] = v
    return gens, gen_diff, where


def moore_resolution(M: DGModule, pmax=None, top=8, A=None):
    """Moore resolution of M; returns (Bicomplex, ResolutionMap).

    The columns are A (x) Q_p with Q_p a sum of spheres and disks chosen
    canonically from homology and boundary generators.
    """
    A = A or M.algebra
    if M.side != "left":
        raise ValueError("resolutions are built for left modules")
    pmax = top + 1 if pmax is None else pmax
    columns, phis = _moore_columns(A, M, pmax, top)
    gens, gen_diff, where = _assemble(A, columns, top, pmax)
    X = SplitModule(A, gens, gen_diff, name="moore", kind="moore")
    X.where = where
    alpha = _alpha_from_column0(X, M, columns[0][0], where)
    cols = {p: col.carrier for p, (_, col) in enumerate(columns)}
    horiz = {p: dict(phis[p]) for p in range(1, len(columns))}
    B = Bicomplex(A.ring, cols, horiz, algebra=A)
    res = ResolutionMap(X, M, alpha, "moore", top)
    return B, res


def _alpha_from_column0(X, M, colb0, where):
    A = X.algebra
    mats = {}
    for n in X.degrees():
        cols = []
        for idx in range(X.rank(n)):
            i, a, G = X.decompose(n, idx)
            p, q = X.bidegrees[n - i][G]
            v = [0] * M.rank(n)
            if p == 0:
                g = next(g for (pp, qq, g), (nn, GG) in where.items()
                         if pp == 0 and qq == q and GG == G and nn == n - i)
                v = M.act(i, _unit_vec(A.rank(i), a), q, colb0.phi[q][g])
            cols.append(v)
        mats[n] = Matrix.from_columns(A.ring, cols, M.rank(n))
    return ChainMap(X.carrier, M.carrier, mats, check=False)


def ce_resolution(M: FinComplex, pmax=None, top=8):
    """Cartan-Eilenberg resolution of an R-complex; returns (Bicomplex, ResolutionMap)."""
    R = ground_algebra(M.ring)
    return moore_resolution(as_module(R, M), pmax=pmax, top=top, A=R)


# ---------------------------------------------------------------- bar construction

def _ja_basis(A):
    """Basis (degree, index) of JA = A / R.1."""
    return [(i, a) for i in A.degrees() for a in range(A.rank(i)) if (i, a) != (0, A.unit)]


def _to_ja(A, i, v):
    """Terms (index, coeff) of a degree-i vector projected to JA."""
    return [(a, c) for a, c in enumerate(v) if c and (i, a) != (0, A.unit)]


def bar_resolution(M: DGModule, pmax=None, top=8, A=None):
    """Normalized two-sided bar construction B(A, A, M) -> M with its splitting data.

    ``notes['section']`` is the R-linear section m -> 1[ ]m and
    ``notes['homotopy']`` the contraction a0[a1|...]m -> [a0|a1|...]m.
    """
    A = A or M.algebra
    if M.carrier.is_presented:
        raise ValueError("the bar construction needs a free carrier")
    pmax = top + 1 if pmax is None else pmax
    ja = _ja_basis(A)
    mb = [(j, m) for j in M.degrees() for m in range(M.rank(j))]
    # enumerate generators [a1|...|ap]m by total degree
    keys = []
    frontier = [((), mm) for mm in mb if mm[0] <= top + 1]
    p = 0
    while frontier and p <= pmax:
        keys.extend(frontier)
        nxt = []
        for word, mm in frontier:
            base = sum(d + 1 for d, _ in word) + mm[0]
            for x in ja:
                if base + x[0] + 1 <= top + 1:
                    nxt.append(((x,) + word, mm))
        frontier = sorted(set(nxt))
        p += 1
    keys.sort(key=lambda k: (sum(d + 1 for d, _ in k[0]) + k[1][0], len(k[0]), k))
    gens, where = {}, {}
    for k in keys:
        word, (j, m) = k
        n = sum(d + 1 for d, _ in word) + j
        gens.setdefault(n, []).append((len(word), n - len(word)))
        where[k] = (n, len(gens[n]) - 1)
    probe = SplitModule(A, gens, {}, check=False)
    gen_diff = {n: [None] * len(v) for n, v in gens.items()}
    red = A.ring.reduce
    for k, (n, G) in where.items():
        word, (j, m) = k
        v = [0] * probe._layout[n - 1][1]

        def put(i, a, key, c):
            if c:
                v[probe.index(n - 1, i, a, where[key][1])] += c

        p = len(word)
        pre = [0]
        for d_, _ in word:
            pre.append(pre[-1] + d_ + 1)
        # internal part
        for t, (d_, a) in enumerate(word):
            if d_ - 1 < A.lo or not A.rank(d_ - 1):
                continue
            da = A.d(d_).column(a)
            for b, c in _to_ja(A, d_ - 1, da):
                w = word[:t] + ((d_ - 1, b),) + word[t + 1:]
                put(0, A.unit, (w, (j, m)), -_sign(pre[t]) * c)
        if M.rank(j - 1):
            for m2, c in enumerate(M.carrier.d(j).column(m)):
                put(0, A.unit, (word, (j - 1, m2)), _sign(pre[p]) * c)
        # simplicial part
        if p >= 1:
            d1, a1 = word[0]
            put(d1, a1, (word[1:], (j, m)), 1)
            for t in range(1, p):
                (di, ai), (dk, ak) = word[t - 1], word[t]
                prod = A.basis_product(di, ai, dk, ak)
                for b, c in _to_ja(A, di + dk, prod):
                    w = word[:t - 1] + ((di + dk, b),) + word[t + 1:]
                    put(0, A.unit, (w, (j, m)), _sign(pre[t]) * c)
            dl, al = word[-1]
            am = M.act(dl, _unit_vec(A.rank(dl), al), j, _unit_vec(M.rank(j), m))
            for m2, c in enumerate(am):
                put(0, A.unit, (word[:-1], (j + dl, m2)), -_sign(pre[p - 1]) * c)
        gen_diff[n][G] = [red(x) for x in v]
    X = SplitModule(A, gens, gen_diff, name="bar", kind="bar")
    X.where = where
    X.bar_keys = {v: k for k, v in where.items()}
    mats = {}
    for n in X.degrees():
        cols = []
        for idx in range(X.rank(n)):
            i, a, G = X.decompose(n, idx)
            word, (j, m) = X.bar_keys[(n - i, G)]
            if word:
                cols.append([0] * M.rank(n))
            else:
                cols.append(M.act(i, _unit_vec(A.rank(i), a), j, _unit_vec(M.rank(j), m)))
        mats[n] = Matrix.from_columns(A.ring, cols, M.rank(n))
    eps = ChainMap(X.carrier, M.carrier, mats, check=False)
    sec = {}
    for j in M.degrees():
        cols = []
        for m in range(M.rank(j)):
            w = [0] * X.rank(j)
            if ((), (j, m)) in where:
                w[X.index(j, 0, A.unit, where[((), (j, m))][1])] = 1
            cols.append(w)
        sec[j] = Matrix.from_columns(A.ring, cols, X.rank(j))
    iota = ChainMap(M.carrier, X.carrier, sec, check=False)
    hmats = {}
    for n in X.degrees():
        if n + 1 > top + 1:
            continue
        cols = []
        for idx in range(X.rank(n)):
            i, a, G = X.decompose(n, idx)
            word, mm = X.bar_keys[(n - i, G)]
            w = [0] * X.rank(n + 1)
            key = (((i, a),) + word, mm)
            if (i, a) != (0, A.unit) and key in where:
                w[X.index(n + 1, 0, A.unit, where[key][1])] = 1
            cols.append(w)
        hmats[n] = Matrix.from_columns(A.ring, cols, X.rank(n + 1))
    s = Homotopy(X.carrier, X.carrier, hmats)
    res = ResolutionMap(X, M, eps, "bar", top)
    res.notes.update(section=iota, homotopy=s, pmax=pmax)
    return res


def verify_bar_witness(res: ResolutionMap, through=None):
    """Failures of eps.iota = 1 and ds + sd = 1 - iota.eps (degrees with a complete contraction)."""
    X, M = res.X, res.M
    iota, s = res.notes["section"], res.notes["homotopy"]
    through = res.top - 1 if through is None else through
    bad = []
    if iota.commutation_violations():
        bad.append("section is not a chain map")
    for j in M.degrees():
        if j <= through and (res.alpha.at(j) @ iota.at(j)) != Matrix.identity(M.ring, M.rank(j)):
            bad.append(f"eps . section != 1 in degree {j}")
    pmax = res.notes.get("pmax", res.top + 1)
    for n in X.degrees():
        if n > through:
            continue
        lhs = s.boundary_at(n)
        rhs = Matrix.identity(X.ring, X.rank(n)) - iota.at(n) @ res.alpha.at(n)
        if lhs != rhs:
            # columns whose contraction leaves the filtration bound are exempt
            filt = X.basis_filtration(n)
            for c in range(X.rank(n)):
                if lhs.column(c) != rhs.column(c) and filt[c] < pmax:
                    bad.append(f"ds + sd != 1 - iota eps in degree {n}, column {c}")
                    break
    return bad


# ---------------------------------------------------------------- distinguished resolutions

def _stacked_solve(ring, blocks, rhs):
    """Solve the system whose rows are the concatenated row-blocks."""
    data = [r for blk in blocks for r in blk]
    if not data:
        return []
    m = Matrix.from_rows(ring, data, len(data[0]))
    return LinearSolver(m).solve(rhs)


def _module_relations(M, n):
    C = M.carrier
    return list(C.relations(n)) if C.is_presented else []


def distinguished_resolution(M: DGModule, HAres: ResolutionMap | None = None, pmax=None, top=8):
    """Distinguished resolution of M lifted from a free resolution of H(M) over H(A).

    The generators and the d^1 component copy ``HAres`` with cycle
    representatives substituted for homology classes; the higher components
    and alpha are then solved for generator by generator.
    """
    A = M.algebra
    if A.lo < 0:
        raise ValueError("the algebra must be connective")
    HA = HAres.X.algebra if HAres is not None else homology_algebra(A)
    if HAres is None:
        HM = homology_module(M, HA)
        _, HAres = moore_resolution(HM, pmax=pmax, top=top)
    HM = HAres.M
    XH = HAres.X
    if classify(XH) != "distinguished":
        raise ValueError("the H(A)-resolution must have zero internal differential")
    if not hasattr(HA, "reps") or not hasattr(HM, "reps"):
        raise MissingStructure("HAres must be built over homology_algebra(A) and homology_module(M)")
    ring = A.ring
    red = ring.reduce
    top = min(top, HAres.top)
    gens = {n: list(bs) for n, bs in XH.bidegrees.items() if n <= top + 1}
    gen_diff = {n: [None] * len(bs) for n, bs in gens.items()}
    alpha_gen = {}
    probe = SplitModule(A, gens, {}, check=False)

    def lift(n, vH):
        """Substitute cycle representatives into a vector of XH in degree n."""
        out = [0] * probe.rank(n)
        for i, a, g, c in XH.entries(n, vH):
            for b, x in enumerate(HA.reps[i][a]):
                if x:
                    out[probe.index(n, i, b, g)] += c * x
        return [red(x) for x in out]

    for n in sorted(gens):
        for G, (p, q) in enumerate(gens[n]):
            if p == 0:
                gen_diff[n][G] = [0] * probe.rank(n - 1)
                cls = HAres.alpha.at(n).column(XH.index(n, 0, HA.unit, G))
                m = [0] * M.rank(n)
                for k, c in enumerate(cls):
                    for j, x in enumerate(HM.reps[n][k]):
                        m[j] += c * x
                alpha_gen[(n, G)] = [red(x) for x in m]
                continue
            D1 = lift(n - 1, XH.gen_diff[n][G])
            filt = probe.basis_filtration(n - 1)
            free = [k for k, f in enumerate(filt) if f <= p - 2]
            # unknowns: y (free coords), m in M_n, relation multipliers in M_{n-1}
            rels1 = _module_relations(M, n - 1)
            dX = probe.carrier.d(n - 1) if probe.rank(n - 2) else None
            aX = _alpha_matrix(probe, M, alpha_gen, n - 1)
            nm = M.rank(n)
            nu = len(free) + nm + len(rels1)
            blocks, rhs = [], []
            if dX is not None:
                rows = [[dX.data[r][k] for k in free] + [0] * (nm + len(rels1))
                        for r in range(dX.rows)]
                blocks.append(rows)
                rhs += [-x for x in dX.apply(D1)]
            if M.rank(n - 1):
                dM = M.carrier.d(n) if nm else None
                rows = []
                for r in range(M.rank(n - 1)):
                    row = [aX.data[r][k] for k in free]
                    row += [-dM.data[r][j] for j in range(nm)] if dM is not None else []
                    row += [rel[r] for rel in rels1]
                    rows.append(row)
                blocks.append(rows)
                rhs += [-x for x in aX.apply(D1)]
            sol = _stacked_solve(ring, blocks, [red(x) for x in rhs]) if blocks else [0] * nu
            if sol is None:
                raise WindowTooSmall(f"no lift for generator ({p}, {q}) in total degree {n}")
            y = list(D1)
            for k, c in zip(free, sol[:len(free)]):
                y[k] += c
            gen_diff[n][G] = [red(x) for x in y]
            alpha_gen[(n, G)] = [red(x) for x in sol[len(free):len(free) + nm]] if nm else []
        probe = SplitModule(A, gens, _fill_partial(gens, gen_diff, probe), check=False)
    X = SplitModule(A, gens, gen_diff, name="dist", kind="distinguished")
    mats = {n: _alpha_matrix(X, M, alpha_gen, n) for n in X.degrees()}
    alpha = ChainMap(X.carrier, M.carrier, mats, check=False)
    res = ResolutionMap(X, M, alpha, "distinguished", top)
    res.notes.update(HAres=HAres)
    return res


def _fill_partial(gens, gen_diff, probe):
    return {n: [v if v is not None else [0] * probe._layout[n - 1][1] for v in vs]
            for n, vs in gen_diff.items()}


def _alpha_matrix(X, M, alpha_gen, n):
    """A-linear extension of alpha from generators, as a matrix X_n -> M_n."""
    A = X.algebra
    cols = []
    for idx in range(X.rank(n)):
        i, a, G = X.decompose(n, idx)
        m = alpha_gen.get((n - i, G))
        if m is None or not any(m):
            cols.append([0] * M.rank(n))
        else:
            cols.append(M.act(i, _unit_vec(A.rank(i), a), n - i, m))
    return Matrix.from_columns(A.ring, cols, M.rank(n))


# ---------------------------------------------------------------- Koszul resolutions

def _is_polynomial_on(HA, classes, through):
    """Whether the monomials in the given classes form a basis of HA in degrees <= through."""
    ring = HA.ring
    degs = [d for d, _ in classes]
    mons = {0: [HA.unit_vector()]}
    frontier = {(0,) * len(classes): (0, HA.unit_vector())}
    seen = dict(frontier)
    while frontier:
        nxt = {}
        for e, (n, v) in frontier.items():
            last = max((k for k, x in enumerate(e) if x), default=0)
            for k in range(last, len(classes)):
                m = n + degs[k]
                if m > through:
                    continue
                f = e[:k] + (e[k] + 1,) + e[k + 1:]
                if f in seen:
                    continue
                w = HA.product(n, v, degs[k], classes[k][1]) if HA.rank(m) else []
                seen[f] = nxt[f] = (m, w)
                mons.setdefault(m, []).append(w)
        frontier = nxt
    for n in range(0, through + 1):
        vs = [v for v in mons.get(n, []) if HA.rank(n)]
        if len(vs) != HA.rank(n):
            return False
        if not vs:
            continue
        solver = LinearSolver(Matrix.from_columns(ring, vs, HA.rank(n)))
        if any(solver.solve(_unit_vec(HA.rank(n), j)) is None for j in range(HA.rank(n))):
            return False
    return True


def koszul_resolution(A: DGAlgebra, cycles, top=None):
    """K(A) = A (x) E{y_i} -> R for cycles a_i whose classes make H(A) polynomial.

    d(y_S) = sum over U + V = S, U nonempty, of sigma(U, V) a_U (x) y_V, where
    a_U is the iterated cup-1 product a_i cup_1 a_T (i = min U).  The signs
    of the linear terms come from the Koszul complex of H(A); the others are
    found by search so that d o d = 0.
    """
    if A.aug is None:
        raise MissingStructure("Koszul resolutions need an augmentation")
    cert = validate_cup1(A)
    if not cert.valid:
        raise ValueError(f"cup-1 product is invalid: {cert.violations[:3]}")
    ring = A.ring
    red = ring.reduce
    char2 = getattr(ring, "p", None) == 2 or getattr(ring, "n", None) == 2
    cycles = [(int(d), [red(x) for x in v]) for d, v in cycles]
    for d, v in cycles:
        if d < 1:
            raise ValueError("Koszul generators must have positive degree")
        if A.rank(d - 1) and any(A.d(d).apply(v)):
            raise ValueError(f"degree-{d} element is not a cycle")
        if d % 2 and not char2:
            raise ValueError("odd-degree polynomial generators need characteristic 2")
    HA = homology_algebra(A)
    top = A.hi if top is None else top
    classes = [(d, list(HA.class_of[d](v))) for d, v in cycles]
    if not _is_polynomial_on(HA, classes, A.hi):
        raise ValueError("H(A) is not polynomial on the given classes")
    k = len(cycles)
    dg = [d for d, _ in cycles]
    subsets = sorted((S for r in range(k + 1) for S in itertools.combinations(range(k), r)),
                     key=lambda S: (len(S), S))
    total = {S: len(S) + sum(dg[i] for i in S) for S in subsets}
    subsets = [S for S in subsets if total[S] <= top + 1]
    gens, where = {}, {}
    for S in subsets:
        n = total[S]
        gens.setdefault(n, []).append((len(S), n - len(S)))
        where[S] = (n, len(gens[n]) - 1)

    cup_cache = {}

    def a_of(U):
        if U not in cup_cache:
            if len(U) == 1:
                cup_cache[U] = cycles[U[0]]
            else:
                i, rest = U[0], a_of(U[1:])
                cup_cache[U] = (dg[i] + rest[0] + 1,
                                A.cup1_product(dg[i], cycles[i][1], rest[0], rest[1]))
        return cup_cache[U]

    probe = SplitModule(A, gens, {}, check=False)
    gen_diff = {n: [[0] * probe._layout[n - 1][1] for _ in bs] for n, bs in gens.items()}
    signs = {}
    for S in subsets:
        n, G = where[S]
        if not S:
            continue
        probe = SplitModule(A, gens, gen_diff, check=False)

        def term(U):
            V = tuple(x for x in S if x not in U)
            deg, a = a_of(U)
            v = [0] * probe.rank(n - 1)
            if V not in where:
                if any(a):
                    raise WindowTooSmall(f"y_{V} lies outside the window")
                return v
            for b, c in enumerate(a):
                if c:
                    v[probe.index(n - 1, deg, b, where[V][1])] += c
            return v

        fixed = [0] * probe.rank(n - 1)
        for j, i in enumerate(S):
            s = _sign((1 + dg[i]) * sum(dg[l] + 1 for l in S[:j]))
            signs[(S, (i,))] = s
            fixed = [x + s * y for x, y in zip(fixed, term((i,)))]
        multi = [U for r in range(2, len(S) + 1) for U in itertools.combinations(S, r)]
        parts = [term(U) for U in multi]
        live = [t for t, p in enumerate(parts) if any(p)]
        dmat = probe.carrier.d(n - 1) if probe.rank(n - 2) else None

        def dd(v):
            return [red(x) for x in dmat.apply(v)] if dmat is not None else []

        dfixed = dd(fixed)
        dparts = {t: dd(parts[t]) for t in live}
        choice = None
        for combo in itertools.product((1, -1), repeat=0 if char2 else len(live)):
            signed = dict(zip(live, combo))
            tot = list(dfixed)
            for t in live:
                tot = [x + signed.get(t, 1) * y for x, y in zip(tot, dparts[t])]
            if not any(red(x) for x in tot):
                choice = signed
                break
        if choice is None:
            raise SignDerivationFailed(f"no signs make d o d = 0 on y_{S}")
        v = fixed
        for t, U in enumerate(multi):
            s = choice.get(t, 1)
            signs[(S, U)] = s
            v = [x + s * y for x, y in zip(v, parts[t])]
        gen_diff[n][G] = [red(x) for x in v]
    X = SplitModule(A, gens, gen_diff, name="K", kind="koszul")
    X.where = where
    M = trivial_module(A)
    mats = {}
    for n in X.degrees():
        cols = []
        for idx in range(X.rank(n)):
            i, a, G = X.decompose(n, idx)
            c = A.aug[a] if (n == 0 and i == 0 and (n - i, G) == where[()]) else 0
            cols.append([c] if M.rank(n) else [])
        mats[n] = Matrix.from_columns(ring, cols, M.rank(n))
    alpha = ChainMap(X.carrier, M.carrier, mats, check=False)
    valid = -1
    for n in range(0, top + 1):
        if not is_quasi_iso(alpha, [n]):
            break
        valid = n
    res = ResolutionMap(X, M, alpha, "koszul", valid)
    res.notes.update(signs=signs, cycles=cycles, classes=classes, HA=HA)
    return res


def koszul_e1_violations(res: ResolutionMap):
    """Generators whose d^1, read in H(A), differs from the Koszul complex of H(A)."""
    X, HA = res.X, res.notes["HA"]
    dg = [d for d, _ in res.notes["cycles"]]
    bad = []
    for S, (n, G) in X.where.items():
        expect = {}
        for j, i in enumerate(S):
            V = S[:j] + S[j + 1:]
            if V in X.where:
                expect[(dg[i], V)] = _sign((1 + dg[i]) * sum(dg[l] + 1 for l in S[:j]))
        got = {}
        for i, a, g, c in X.entries(n - 1, X.component(1, n, G)):
            V = next(T for T, w in X.where.items() if w == (n - 1 - i, g))
            cls = HA.class_of[i](_unit_vec(X.algebra.rank(i), a))
            for b, x in enumerate(cls):
                if x:
                    got[(i, V, b)] = X.ring.reduce(got.get((i, V, b), 0) + c * x)
        want = {}
        for j, i in enumerate(S):
            V = S[:j] + S[j + 1:]
            if (dg[i], V) not in expect:
                continue
            for b, x in enumerate(res.notes["classes"][i][1]):
                if x:
                    key = (dg[i], V, b)
                    want[key] = X.ring.reduce(want.get(key, 0) + expect[(dg[i], V)] * x)
        got = {k: v for k, v in got.items() if v}
        want = {k: v for k, v in want.items() if v}
        if got != want:
            bad.append(S)
    return bad


# ---------------------------------------------------------------- comparison maps

def compare_resolutions(res: ResolutionMap, res2: ResolutionMap, k: ChainMap | None = None):
    """A filtered map K: X -> X' of DG A-modules and t with dt + td = alpha' K - k alpha.

    X must be distinguished.  Returns (K, t); both are defined on X through
    the smaller of the two windows, which is recorded as ``K.window``.
    """
    X, X2 = res.X, res2.X
    M, M2 = res.M, res2.M
    if classify(X) != "distinguished":
        raise ValueError("the source resolution must be distinguished")
    if X.algebra is not X2.algebra and X.algebra.carrier.ranks != X2.algebra.carrier.ranks:
        raise ValueError("resolutions over different algebras")
    A, ring = X.algebra, X.ring
    red = ring.reduce
    if k is None:
        k = ChainMap.identity(M.carrier)
    top = min(res.top, res2.top)
    Kg, tg = {}, {}

    for n in sorted(d for d in X.bidegrees if d <= top):
        # K and t on everything of degree n - 1 are known
        K_prev = _extend_matrix(X, n - 1, Kg, lambda i, a, m, v: X2.left_multiply(
            i, _unit_vec(A.rank(i), a), m, v), X2.rank(n - 1), ring, odd=False)
        t_prev = _extend_matrix(X, n - 1, tg, lambda i, a, m, v: M2.act(
            i, _unit_vec(A.rank(i), a), m + 1, v), M2.rank(n), ring, odd=True)
        d2 = X2.carrier.d(n) if X2.rank(n - 1) else None
        a2 = res2.alpha.at(n)
        dM2 = M2.carrier.d(n + 1) if M2.rank(n) and M2.rank(n + 1) else None
        filt2 = X2.basis_filtration(n)
        for G, (p, q) in enumerate(X.bidegrees[n]):
            dg = X.gen_diff[n][G]
            free = [c for c, f in enumerate(filt2) if f <= p]
            nt = M2.rank(n + 1)
            blocks, rhs = [], []
            if d2 is not None:
                blocks.append([[d2.data[r][c] for c in free] + [0] * nt for r in range(d2.rows)])
                rhs += K_prev.apply(dg) if X.rank(n - 1) else [0] * d2.rows
            if M2.rank(n):
                rows = []
                for r in range(M2.rank(n)):
                    row = [a2.data[r][c] for c in free]
                    row += [-dM2.data[r][j] for j in range(nt)] if dM2 is not None else [0] * nt
                    rows.append(row)
                blocks.append(rows)
                kag = k.at(n).apply(res.alpha.at(n).column(X.index(n, 0, A.unit, G)))
                tdg = t_prev.apply(dg) if X.rank(n - 1) else [0] * M2.rank(n)
                rhs += [x + y for x, y in zip(kag, tdg)]
            sol = _stacked_solve(ring, blocks, [red(x) for x in rhs]) if blocks else []
            if sol is None:
                raise WindowTooSmall(f"no comparison for generator ({p}, {q})")
            v = [0] * X2.rank(n)
            for c, x in zip(free, sol):
                v[c] = x
            Kg[(n, G)] = [red(x) for x in v]
            tg[(n, G)] = [red(x) for x in sol[len(free):]] if nt else []
    Kmats, tmats = {}, {}
    for n in X.degrees():
        if n > top:
            continue
        Kmats[n] = _extend_matrix(X, n, Kg, lambda i, a, m, v: X2.left_multiply(
            i, _unit_vec(A.rank(i), a), m, v), X2.rank(n), ring, odd=False)
        tmats[n] = _extend_matrix(X, n, tg, lambda i, a, m, v: M2.act(
            i, _unit_vec(A.rank(i), a), m + 1, v), M2.rank(n + 1), ring, odd=True)
    K = ChainMap(X.carrier, X2.carrier, Kmats, check=False)
    t = Homotopy(X.carrier, M2.carrier, tmats)
    K.window = t.window = top
    return K, t


def _extend_matrix(X, n, table, act, rows, ring, odd):
    """A-linear (odd: Koszul-signed) extension of generator images to X_n."""
    cols = []
    for idx in range(X.rank(n)):
        i, a, G = X.decompose(n, idx)
        v = table.get((n - i, G))
        if v is None or not any(v) or not rows:
            cols.append([0] * rows)
            continue
        w = act(i, a, n - i, v)
        if odd and i % 2:
            w = [-x for x in w]
        cols.append(w)
    return Matrix.from_columns(ring, cols, rows)


def comparison_violations(res, res2, k, K, t):
    """Degrees (within K.window) where K fails to be a chain map or dt + td != alpha' K - k alpha."""
    bad = []
    X, X2, M2 = res.X, res2.X, res2.M
    for n in range(X.carrier.lo, K.window + 1):
        if n - 1 >= X.carrier.lo and X2.carrier.d(n) @ K.at(n) != K.at(n - 1) @ X.carrier.d(n):
            bad.append(("chain", n))
        lhs = M2.carrier.d(n + 1) @ t.at(n) + t.at(n - 1) @ X.carrier.d(n)
        if lhs != res2.alpha.at(n) @ K.at(n) - k.at(n) @ res.alpha.at(n):
            bad.append(("homotopy", n))
    for n in range(X.carrier.lo, K.window + 1):
        f1, f2 = X.basis_filtration(n), X2.basis_filtration(n)
        Kn = K.at(n)
        for c in range(X.rank(n)):
            if any(Kn.data[r][c] and f2[r] > f1[c] for r in range(Kn.rows)):
                bad.append(("filtration", n))
                break
    return bad


# ---------------------------------------------------------------- split extensions, filtrations

def split_extension(res: ResolutionMap) -> DGModule:
    """X^alpha: carrier (Upsilon M) + X with d(w, x) = (-dw + alpha(x), dx).

    (Upsilon M)_n = M_{n+1}; A acts there by a.w = (-1)^|a| a w.  The
    result carries ``filtration[n]`` (Upsilon M in filtration -1) and the
    offsets ``upsilon_rank[n]`` of the X summand.
    """
    X, M = res.X, res.M
    if classify(X) != "distinguished":
        raise ValueError("split extensions need a cell-like split module")
    A, ring = X.algebra, X.ring
    lo = min(X.carrier.lo, M.carrier.lo - 1)
    hi = max(X.carrier.hi, M.carrier.hi - 1)
    up = {n: M.rank(n + 1) for n in range(lo - 1, hi + 2)}
    ranks = {n: up[n] + X.rank(n) for n in range(lo, hi + 1)}
    diff = {}
    for n in range(lo + 1, hi + 1):
        rows, cols = ranks.get(n - 1, 0), ranks[n]
        D = [[0] * cols for _ in range(rows)]
        if M.rank(n + 1) and M.rank(n):
            dM = M.carrier.d(n + 1)
            for r in range(up[n - 1]):
                for c in range(up[n]):
                    D[r][c] = -dM.data[r][c]
        if X.rank(n) and M.rank(n):
            a = res.alpha.at(n)
            for r in range(up[n - 1]):
                for c in range(X.rank(n)):
                    D[r][up[n] + c] = a.data[r][c]
        if X.rank(n) and X.rank(n - 1):
            dX = X.carrier.d(n)
            for r in range(X.rank(n - 1)):
                for c in range(X.rank(n)):
                    D[up[n - 1] + r][up[n] + c] = dX.data[r][c]
        diff[n] = Matrix(ring, rows, cols, D)
    carrier = FinComplex(ring, ranks, diff, lo=lo, hi=hi, check=False)
    action = {}
    for i in A.degrees():
        for a in range(A.rank(i)):
            ea = _unit_vec(A.rank(i), a)
            for n in range(lo, hi + 1):
                if not ranks.get(n + i):
                    continue
                for w in range(up[n]):
                    v = M.act(i, ea, n + 1, _unit_vec(M.rank(n + 1), w))
                    out = [0] * ranks[n + i]
                    for j, c in enumerate(v):
                        out[j] = _sign(i) * c
                    if any(out):
                        action[(i, a, n, w)] = out
                for x in range(X.rank(n)):
                    v = X.left_multiply(i, ea, n, _unit_vec(X.rank(n), x))
                    out = [0] * up[n + i] + list(v)
                    if any(out):
                        action[(i, a, n, up[n] + x)] = out
    E = DGModule(A, carrier, action, "left", name="X^alpha")
    E.upsilon_rank = up
    E.filtration = {n: [-1] * up[n] + X.basis_filtration(n) for n in range(lo, hi + 1)}
    return E


FILTRATION_STRENGTH = ("q-split", "r-split", "neither")


def filtration_implies(verdict, target):
    """Whether a verdict of check_filtration certifies ``target`` (q-split implies r-split)."""
    return FILTRATION_STRENGTH.index(verdict) <= FILTRATION_STRENGTH.index(target) < 2


def check_filtration(X):
    """Strongest split property exhibited by the filtration of a split module.

    q-split: every quotient F_p / F_{p-1} is A (x) K_p with K_p R-free, i.e.
    d^0 of each generator is a scalar combination of generators of the same
    filtration.  q-split filtrations are r-split.  'neither' only means no
    witness was found.
    """
    if isinstance(X, ResolutionMap):
        X = X.X
    if not isinstance(X, SplitModule) or X.carrier.is_presented:
        return "neither"
    if any(msg.startswith("differential raises") for _, msg in validate_split(X)):
        return "neither"
    A = X.algebra
    for n, bs in X.bidegrees.items():
        for g in range(len(bs)):
            for i, a, _, c in X.entries(n - 1, X.component(0, n, g)):
                if (i, a) != (0, A.unit):
                    return "neither"
    return "q-split"
