"""Differential Tor and Ext, spectral sequences of filtered complexes and the
Eilenberg-Moore spectral sequence, with the comparison maps around them.

Tor^A(N, M) is H(N (x)_A X) for a resolution X -> M built by one of the
constructions in :mod:`dghomalg.resolutions`.  Everything is computed in a
finite window, recorded on each result.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .complexes import (ChainMap, FinComplex, PresentedComplex, cycles_and_boundaries,
                        homology_at, induced_map, is_quasi_iso, tensor_maps,
                        tensor_offsets)
from .dg_algebra import (DGModule, MissingStructure, RelFreeModule, _sign, _unit_vec,
                         homology_algebra, homology_module, tensor_over_A)
from .linalg import LinearSolver, Matrix, Subquotient, coord_map_is_iso
from .resolutions import (ResolutionMap, SplitModule, WindowTooSmall, bar_resolution,
                          classify, distinguished_resolution, koszul_resolution,
                          moore_resolution)

METHODS = ("moore", "ce", "distinguished", "bar", "koszul")


# ---------------------------------------------------------------- tables

@dataclass
class TorTable:
    """Graded homology groups computed by a named method, valid on ``window``."""
    method: str
    groups: dict
    window: tuple
    complex: FinComplex | None = None
    resolution: ResolutionMap | None = None
    filtration: dict | None = None

    def at(self, n):
        g = self.groups.get(n)
        return g if g is not None else Subquotient(_ring_of(self), 0, [], [])

    def factors(self, n):
        return self.at(n).factors

    def degrees(self):
        lo, hi = self.window
        return range(lo, hi + 1)

    def table(self):
        return {n: str(self.at(n).presentation) for n in self.degrees()}

    def ranks(self):
        return {n: len(self.factors(n)) for n in self.degrees()}

    def disagreements(self, other):
        """Degrees in the common window where the invariant factors differ."""
        lo = max(self.window[0], other.window[0])
        hi = min(self.window[1], other.window[1])
        return [n for n in range(lo, hi + 1)
                if sorted(self.factors(n)) != sorted(other.factors(n))]


def _ring_of(t):
    if t.complex is not None:
        return t.complex.ring
    return next(iter(t.groups.values())).ring


def resolve(M: DGModule, method="moore", top=8, pmax=None, **kw) -> ResolutionMap:
    """Build a resolution of M by the named construction."""
    if method in ("moore", "ce"):
        return moore_resolution(M, pmax=pmax, top=top)[1]
    if method == "bar":
        return bar_resolution(M, pmax=pmax, top=top)
    if method == "distinguished":
        return distinguished_resolution(M, HAres=kw.get("HAres"), pmax=pmax, top=top)
    if method == "koszul":
        if "cycles" not in kw:
            raise MissingStructure("the Koszul route needs the polynomial generators (cycles=)")
        res = koszul_resolution(M.algebra, kw["cycles"], top=kw.get("algebra_top"))
        if res.M.carrier.ranks != M.carrier.ranks:
            raise ValueError("the Koszul route resolves the trivial module only")
        return res
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def shortcut_filtration(N: DGModule, X: SplitModule):
    """Filtration degree of each basis vector of N (x)_A X (computed as N (x) Xbar)."""
    C, G = N.carrier, X.generators
    out = {}
    for t in range(C.lo + G.lo, C.hi + G.hi + 1):
        offs, size = tensor_offsets(C, G, t)
        f = [0] * size
        for p, start in offs.items():
            rg = G.rank(t - p)
            for m in range(C.rank(p)):
                for g in range(rg):
                    f[start + m * rg + g] = X.bidegrees[t - p][g][0]
        out[t] = f
    return out


def tor(N: DGModule, M: DGModule, method="moore", top=8, pmax=None, resolution=None, **kw):
    """Tor^A(N, M) = H(N (x)_A X) through total degree ``top``."""
    res = resolution or resolve(M, method, top=top, pmax=pmax, **kw)
    T = tensor_over_A(N, res.X)
    # beyond T.hi the groups vanish: a finite resolution is still valid through res.top
    hi = min(top, res.top + N.carrier.lo) if res.top >= 0 else -1
    groups = {n: homology_at(T, n) for n in range(T.lo, hi + 1)}
    return TorTable(res.kind if resolution is not None else method, groups, (T.lo, hi),
                    complex=T, resolution=res, filtration=shortcut_filtration(N, res.X))


# ---------------------------------------------------------------- Ext

def hom_shortcut(X: RelFreeModule, N: DGModule) -> FinComplex:
    """Hom_A(A (x) Xbar, N) computed as Hom(Xbar, N) with the twisted differential.

    A degree-n map is determined by f(g) in N_{|g|+n}; (Df)(g) = d f(g) - (-1)^n f(dg)
    with f(a g') = (-1)^{n|a|} a f(g').  Basis vectors are ordered by generator
    degree q, generator g, then the basis of N_{q+n}.
    """
    if N.side != "left":
        raise ValueError("Hom needs a left module")
    A, G, C = X.algebra, X.generators, N.carrier
    ring = X.ring
    lo, hi = C.lo - G.hi, C.hi - G.lo

    def layout(n):
        offs, pos = {}, 0
        for q in G.degrees():
            offs[q] = pos
            pos += G.rank(q) * C.rank(q + n)
        return offs, pos

    lay = {n: layout(n) for n in range(lo - 1, hi + 2)}
    ranks = {n: lay[n][1] for n in range(lo, hi + 1)}
    diff = {}
    for n in range(lo + 1, hi + 1):
        offs, size = lay[n]
        toffs, tsize = lay[n - 1]
        D = [[0] * size for _ in range(tsize)]
        for q in G.degrees():
            rn = C.rank(q + n)
            for g in range(G.rank(q)):
                for e in range(rn):
                    col = offs[q] + g * rn + e
                    if C.rank(q + n - 1):
                        for e2, c in enumerate(C.d(q + n).column(e)):
                            if c:
                                D[toffs[q] + g * C.rank(q + n - 1) + e2][col] += c
        # the f(dh) part: h of degree q' with dh containing a (x) g
        for qh in G.degrees():
            for h in range(G.rank(qh)):
                rt = C.rank(qh + n - 1)
                if not rt:
                    continue
                for i, a, g, c in X.entries(qh - 1, X.gen_diff[qh][h]):
                    q = qh - 1 - i
                    rn = C.rank(q + n)
                    for e in range(rn):
                        col = offs[q] + g * rn + e
                        ae = N.act(i, _unit_vec(A.rank(i), a), q + n, _unit_vec(rn, e))
                        s = -_sign(n) * _sign(n * i) * c
                        for e2, x in enumerate(ae):
                            if x:
                                D[toffs[qh] + h * rt + e2][col] += s * x
        diff[n] = Matrix(ring, tsize, size, D)
    if not C.is_presented:
        return FinComplex(ring, ranks, diff, lo=lo, hi=hi, check=False)
    rels = {}
    for n in range(lo, hi + 1):
        offs, size = lay[n]
        vecs = []
        for q in G.degrees():
            rn = C.rank(q + n)
            for g in range(G.rank(q)):
                for rel in C.relations(q + n):
                    v = [0] * size
                    for e, c in enumerate(rel):
                        v[offs[q] + g * rn + e] = c
                    vecs.append(v)
        rels[n] = vecs
    return PresentedComplex(ring, ranks, diff, rels, lo=lo, hi=hi, check=False)


def ext(M: DGModule, N: DGModule, method="moore", top=8, pmax=None, resolution=None, **kw):
    """Ext_A(M, N) = H^* Hom_A(X, N), regraded so that Ext^k = H_{-k}.

    The table is keyed by the cohomological degree k.
    """
    res = resolution or resolve(M, method, top=top, pmax=pmax, **kw)
    H = hom_shortcut(res.X, N)
    kmax = res.top - N.carrier.hi
    klo = -H.hi
    groups = {k: homology_at(H, -k) for k in range(klo, kmax + 1) if H.lo <= -k <= H.hi}
    return TorTable(method, groups, (klo, kmax), complex=H, resolution=res)


# ---------------------------------------------------------------- spectral sequences

@dataclass
class SpectralPage:
    """E^r with modules at (p, q) and the differential d_r: (p, q) -> (p - r, q + r - 1)."""
    r: int
    modules: dict
    dr: dict = field(default_factory=dict)

    def factors(self, p, q):
        m = self.modules.get((p, q))
        return m.factors if m is not None else ()

    def ranks(self):
        return {k: len(m.factors) for k, m in self.modules.items() if m.factors}

    def table(self):
        return {f"{p},{q}": str(m.presentation) for (p, q), m in sorted(self.modules.items())
                if m.factors}


class SpectralSequence:
    """Spectral sequence of a complex filtered by its basis.

    ``filtration[n][k]`` is the filtration degree of basis vector k of C_n;
    the differential must not raise it and relation vectors must be
    compatible with it.
    """

    def __init__(self, C: FinComplex, filtration: dict, degrees=None):
        self.C, self.ring = C, C.ring
        self.filt = {n: list(filtration.get(n, [])) for n in C.degrees()}
        for n in C.degrees():
            if len(self.filt[n]) != C.rank(n):
                raise ValueError(f"filtration of degree {n} has the wrong length")
        self.degrees = list(C.degrees()) if degrees is None else list(degrees)
        vals = [p for v in self.filt.values() for p in v]
        self.pmin = min(vals, default=0)
        self.pmax = max(vals, default=0)
        self._z = {}
        for n in C.degrees():
            d = C.d(n)
            if C.rank(n - 1):
                for c in range(C.rank(n)):
                    for r in range(d.rows):
                        if d.data[r][c] and self.filt[n - 1][r] > self.filt[n][c]:
                            raise ValueError("the differential raises the filtration")
        self.r_inf = self.pmax - self.pmin + 2

    def _rank(self, n):
        return self.C.rank(n) if n in self.filt else 0

    def _rels(self, n):
        return list(self.C.relations(n)) if n in self.filt else []

    def _rels_in(self, n, p):
        """Generators of Rel_n intersected with F_p."""
        rels = self._rels(n)
        if not rels:
            return []
        rows = [k for k, f in enumerate(self.filt[n]) if f > p]
        if not rows:
            return rels
        m = Matrix.from_rows(self.ring, [[rel[k] for rel in rels] for k in rows], len(rels))
        out = []
        for w in LinearSolver(m).kernel_vectors():
            out.append([self.ring.reduce(sum(c * rel[k] for c, rel in zip(w, rels)))
                        for k in range(self._rank(n))])
        return [v for v in out if any(v)]

    def Z(self, r, p, n):
        """Pairs (x, f): x in F_p C_n with dx = f mod relations, f in F_{p-r}."""
        key = (r, p, n)
        if key in self._z:
            return self._z[key]
        ring, C = self.ring, self.C
        cols = [k for k, f in enumerate(self.filt.get(n, [])) if f <= p]
        if not cols:
            self._z[key] = []
            return []
        if not self._rank(n - 1):
            out = [(_unit_vec(self._rank(n), k), []) for k in cols]
            self._z[key] = out
            return out
        d = C.d(n)
        rels = self._rels(n - 1)
        rows = [k for k, f in enumerate(self.filt[n - 1]) if f > p - r]
        if not rows:
            out = [(_unit_vec(self._rank(n), k), d.column(k)) for k in cols]
            self._z[key] = out
            return out
        data = [[d.data[i][k] for k in cols] + [rel[i] for rel in rels] for i in rows]
        m = Matrix.from_rows(ring, data, len(cols) + len(rels))
        out = []
        for w in LinearSolver(m).kernel_vectors():
            x = [0] * self._rank(n)
            for k, c in zip(cols, w):
                x[k] = c
            if not any(ring.reduce(v) for v in x):
                continue
            f = d.apply(x)
            for rel, c in zip(rels, w[len(cols):]):
                f = [a + c * b for a, b in zip(f, rel)]
            out.append(([ring.reduce(v) for v in x], [ring.reduce(v) for v in f]))
        self._z[key] = out
        return out

    def E(self, r, p, n):
        """E^r_{p, n-p} as a subquotient of C_n."""
        dim = self._rank(n)
        relp = self._rels_in(n, p)
        z = [x for x, _ in self.Z(r, p, n)] + relp
        b = [x for x, _ in self.Z(r - 1, p - 1, n)]
        b += [f for _, f in self.Z(r - 1, p + r - 1, n + 1) if f]
        return Subquotient(self.ring, dim, z, b + relp)

    def push(self, r, p, n, v):
        """d_r of a representative v in Z^r_p C_n: a vector of F_{p-r} C_{n-1}."""
        ring, C = self.ring, self.C
        f = C.d(n).apply(v)
        rows = [k for k, g in enumerate(self.filt[n - 1]) if g > p - r]
        rels = self._rels(n - 1)
        if rows and any(f[k] for k in rows):
            m = Matrix.from_rows(ring, [[rel[k] for rel in rels] for k in rows], len(rels))
            sol = LinearSolver(m).solve([-f[k] for k in rows]) if rels else None
            if sol is None:
                raise ValueError("representative is not in Z^r")
            for rel, c in zip(rels, sol):
                f = [a + c * b for a, b in zip(f, rel)]
        return [ring.reduce(x) for x in f]

    def page(self, r, with_differential=True):
        mods = {}
        for n in self.degrees:
            for p in range(self.pmin, self.pmax + 1):
                E = self.E(r, p, n)
                if E.factors:
                    mods[(p, n - p)] = E
        page = SpectralPage(r, mods)
        if with_differential:
            for (p, q), E in mods.items():
                n = p + q
                tgt = mods.get((p - r, q + r - 1))
                if tgt is None or not self._rank(n - 1):
                    continue
                cols = [list(tgt.coords(self.push(r, p, n, rep))) for rep in E.reps]
                page.dr[(p, q)] = Matrix.from_columns(self.ring, cols, len(tgt.factors))
        return page

    def pages(self, rmax):
        return [self.page(r) for r in range(rmax + 1)]

    def infinity(self):
        return self.page(self.r_inf, with_differential=False)

    def associated_graded(self, n, p):
        """gr_p H_n(C) = F_p H / F_{p-1} H, computed from cycles and all boundaries."""
        _, bnd = cycles_and_boundaries(self.C, n)
        zp = [x for x, _ in self.Z(self.r_inf, p, n)]
        zp1 = [x for x, _ in self.Z(self.r_inf, p - 1, n)]
        return Subquotient(self.ring, self._rank(n), zp + bnd, zp1 + bnd)

    def convergence_failures(self):
        """(p, q) where E^infinity differs from the associated graded of H."""
        einf = self.infinity()
        bad = []
        for n in self.degrees:
            for p in range(self.pmin, self.pmax + 1):
                if sorted(einf.factors(p, n - p)) != sorted(self.associated_graded(n, p).factors):
                    bad.append((p, n - p))
        return bad

    def page_failures(self, r):
        """(p, q) where d_r o d_r != 0 or E^{r+1} differs from H(E^r, d_r)."""
        cur, nxt = self.page(r), self.page(r + 1, with_differential=False)
        bad = []
        for (p, q), E in cur.modules.items():
            dout = cur.dr.get((p, q))
            tgt = cur.modules.get((p - r, q + r - 1))
            if dout is not None and tgt is not None:
                after = cur.dr.get((p - r, q + r - 1))
                if after is not None:
                    twice = after @ dout
                    far = cur.modules[(p - 2 * r, q + 2 * r - 2)]
                    if any(_reduce_mod(x, m) for col in twice.columns()
                           for x, m in zip(col, far.moduli)):
                        bad.append((p, q))
                        continue
        inner = [n for n in self.degrees if n + 1 in self.degrees
                 and (n - 1 in self.degrees or n - 1 < self.C.lo)]
        for n in inner:
            for p in range(self.pmin, self.pmax + 1):
                q = n - p
                H = _page_homology(cur, p, q, r)
                if sorted(H) != sorted(nxt.factors(p, q)):
                    bad.append((p, q))
        return sorted(set(bad))


def _reduce_mod(x, m):
    return x % m if m else x


def _page_homology(page, p, q, r):
    """Invariant factors of the homology of E^r at (p, q) under d_r."""
    mid = page.modules.get((p, q))
    if mid is None:
        return ()
    ring = mid.ring
    src = page.modules.get((p + r, q - r + 1))
    tgt = page.modules.get((p - r, q + r - 1))
    ranks = {1: len(src.factors) if src else 0, 0: len(mid.factors), -1: len(tgt.factors) if tgt else 0}
    diff = {}
    if src is not None and (p + r, q - r + 1) in page.dr:
        diff[1] = page.dr[(p + r, q - r + 1)]
    if tgt is not None and (p, q) in page.dr:
        diff[0] = page.dr[(p, q)]
    mod_n = getattr(ring, "n", None)

    def rels(sq):
        if sq is None:
            return []
        k = len(sq.factors)
        return [[m * (i == j) for i in range(k)] for j, m in enumerate(sq.moduli)
                if m and m != mod_n]

    S = PresentedComplex(ring, ranks, diff, {1: rels(src), 0: rels(mid), -1: rels(tgt)},
                         lo=-1, hi=1, check=False)
    return homology_at(S, 0).factors


def spectral_sequence(C: FinComplex, filtration: dict, rmax=3):
    """Pages E^0 .. E^rmax of a basis-filtered complex, plus E^infinity on demand."""
    ss = SpectralSequence(C, filtration)
    ss.computed = ss.pages(rmax)
    return ss


# ---------------------------------------------------------------- Eilenberg-Moore spectral sequence

def _strand_homology(T, filt, lo, hi):
    """Bigraded homology of a complex whose differential lowers filtration by exactly one."""
    out = {}
    for n in range(lo, hi + 1):
        cols = [k for k, f in enumerate(filt.get(n, [])) if True]
        for p in sorted(set(filt.get(n, []))):
            here = [k for k in cols if filt[n][k] == p]
            dim = len(here)
            if T.rank(n - 1):
                d = T.d(n)
                sub = Matrix.from_rows(T.ring, [[d.data[r][k] for k in here] for r in range(d.rows)],
                                       dim)
                z = LinearSolver(sub).kernel_vectors()
            else:
                z = [_unit_vec(dim, j) for j in range(dim)]
            b = []
            if T.rank(n + 1):
                d = T.d(n + 1)
                for c in range(d.cols):
                    col = d.column(c)
                    if any(col):
                        b.append([col[k] for k in here])
            rels = []
            for rel in T.relations(n):
                rels.append([rel[k] for k in here])
            sq = Subquotient(T.ring, dim, z + rels, b + rels)
            if sq.factors:
                out[(p, n - p)] = sq
    return out


def classical_tor(HN: DGModule, HM: DGModule, top=8, pmax=None, resolution=None):
    """Bigraded Tor^{HA}_{p,q}(HN, HM) over a graded algebra (zero differentials).

    Uses a free resolution of HM whose differential is pure d^1, so the
    homology splits by filtration degree.
    """
    res = resolution or moore_resolution(HM, pmax=pmax, top=top)[1]
    if classify(res.X) != "distinguished":
        raise ValueError("classical Tor needs a resolution with zero internal differential")
    T = tensor_over_A(HN, res.X)
    filt = shortcut_filtration(HN, res.X)
    hi = min(top, res.top + HN.carrier.lo)
    return _strand_homology(T, filt, T.lo, hi), hi


@dataclass
class EMSSReport:
    pages: list
    einf: SpectralPage
    classical: dict
    window: int
    e2_mismatches: list
    total_mismatches: list
    e2_is_einf: bool
    tor_table: TorTable
    sequence: SpectralSequence


def _total_invariant(factors_list):
    free = sum(1 for fs in factors_list for f in fs if f == 0)
    order = 1
    for fs in factors_list:
        for f in fs:
            if f:
                order *= f
    return free, order


def emss(N: DGModule, res: ResolutionMap, rmax=3, top=8, classical_resolution=None):
    """Spectral sequence of N (x)_A X under the homological filtration, with E^2 identified.

    E^2 is compared with Tor^{HA}(HN, HM) computed independently, and the
    E^infinity totals with the Tor table.
    """
    T = tor(N, res.M, resolution=res, top=top)
    hi = T.window[1]
    ss = SpectralSequence(T.complex, T.filtration, degrees=range(T.window[0], hi + 2))
    pages = ss.pages(max(rmax, 2))
    HA = homology_algebra(res.M.algebra)
    HM = homology_module(res.M, HA)
    HN = homology_module(N, HA)
    classical, chi = classical_tor(HN, HM, top=top + 1, resolution=classical_resolution)
    window = min(hi, chi)
    e2 = pages[2]
    keys = {k for k in list(e2.modules) + list(classical) if k[0] + k[1] <= window}
    mism = sorted(k for k in keys
                  if sorted(e2.factors(*k)) != sorted(classical[k].factors if k in classical else ()))
    einf = ss.infinity()
    tot = []
    for n in range(T.window[0], window + 1):
        fs = [einf.factors(p, n - p) for p in range(ss.pmin, ss.pmax + 1)]
        if _total_invariant(fs) != _total_invariant([T.factors(n)]):
            tot.append(n)
    later = [ss.page(r) for r in range(2, ss.r_inf)]
    quiet = all(not any(m.data[i][j] and _reduce_mod(m.data[i][j], pg.modules[_target(k, pg.r)].moduli[i])
                        for i in range(m.rows) for j in range(m.cols))
                for pg in later for k, m in pg.dr.items()
                if k[0] + k[1] <= window)
    return EMSSReport(pages[:rmax + 1], einf, classical, window, mism, tot, quiet, T, ss)


def _target(k, r):
    return (k[0] - r, k[1] + r - 1)


# ---------------------------------------------------------------- Kunneth property

@dataclass
class Verdict:
    """Battery-relative yes, or a definite no with a witness."""
    holds: bool
    label: str = ""
    witness: object = None
    degree: int | None = None

    def __bool__(self):
        return self.holds


def filtration_quotient(X: SplitModule, p):
    """F_p X / F_{p-1} X = A (x) Xbar_p with differential d^0, and the generator reindexing."""
    keep = {n: [g for g, b in enumerate(bs) if b[0] == p] for n, bs in X.bidegrees.items()}
    keep = {n: gs for n, gs in keep.items() if gs}
    new = {(n, g): k for n, gs in keep.items() for k, g in enumerate(gs)}
    probe = RelFreeModule(X.algebra, {n: len(gs) for n, gs in keep.items()}, {}, check=False)
    diff = {}
    for n, gs in keep.items():
        vecs = []
        for g in gs:
            v = [0] * probe._layout[n - 1][1]
            for i, a, g2, c in X.entries(n - 1, X.component(0, n, g)):
                v[probe.index(n - 1, i, a, new[(n - 1 - i, g2)])] += c
            vecs.append(v)
        diff[n] = vecs
    Q = RelFreeModule(X.algebra, {n: len(gs) for n, gs in keep.items()}, diff, name=f"Q{p}")
    return Q, new


def _kappa(N, HN, Q, E1):
    """HN (x)_{HA} E^1 -> H(N (x)_A Q) on representatives, as a chain map."""
    S = tensor_over_A(HN, E1, route="coequalizer")
    T = tensor_over_A(N, Q)
    A = N.algebra
    mats = {}
    for t in S.degrees():
        if not T.rank(t) or not S.rank(t):
            continue
        offs, _ = tensor_offsets(HN.carrier, E1.carrier, t)
        toffs, _ = tensor_offsets(N.carrier, Q.generators, t)
        cols = []
        for s, start in sorted(offs.items()):
            for k in range(HN.rank(s)):
                for l in range(E1.rank(t - s)):
                    v = [0] * T.rank(t)
                    n_rep, x_rep = HN.reps[s][k], E1.reps[t - s][l]
                    for i, a, g, c in Q.entries(t - s, x_rep):
                        na = N.act(i, _unit_vec(A.rank(i), a), s, n_rep)
                        rg = Q.generators.rank(t - s - i)
                        for m, e in enumerate(na):
                            if e:
                                v[toffs[s + i] + m * rg + g] += c * e
                    cols.append([T.ring.reduce(x) for x in v])
        mats[t] = Matrix.from_columns(T.ring, cols, T.rank(t))
    return ChainMap(S, T, mats, check=False)


def is_kunneth(X: SplitModule, battery=(), top=None):
    """Whether each E^1_p X is H(A)-flat and the Kunneth map is an isomorphism.

    Flatness is tested through Tor_1 over H(A) against the trivial module
    (and Z/2, Z/3 over the integers); the Kunneth map against the trivial
    module, A itself and ``battery``.  A yes is relative to those tests.
    """
    from .dg_algebra import NotFree, restricted_module, trivial_module, algebra_module
    from .corpus import z_mod
    A = X.algebra
    top = max(X.degrees()) - 1 if top is None else top
    try:
        HA = homology_algebra(A)
    except NotFree as e:
        return Verdict(False, "H(A) is not R-free", str(e))
    tests = []
    if A.aug is not None:
        tests.append(("R", trivial_module(A, "right")))
    tests.append(("A", algebra_module(A, "right")))
    tests += [(getattr(N, "name", f"N{k}"), N) for k, N in enumerate(battery)]
    flat_tests = []
    if HA.aug is not None:
        flat_tests.append(("R", trivial_module(HA, "right")))
        if not A.ring.is_field and not hasattr(A.ring, "n"):
            for ell in (2, 3):
                flat_tests.append((f"Z/{ell}", restricted_module(HA, z_mod(ell, A.ring), "right")))
    for p in range(0, X.pmax + 1):
        Q, _ = filtration_quotient(X, p)
        try:
            E1 = homology_module(Q, HA)
        except NotFree:
            n = _first_torsion(Q, top)
            return Verdict(False, f"E^1_{p} is not R-flat", witness=f"Z/{n[1]}", degree=n[0])
        for name, T in flat_tests:
            bigraded, _ = classical_tor(T, E1, top=top)
            bad = sorted(k for k in bigraded if k[0] == 1 and sum(k) <= top)
            if bad:
                return Verdict(False, f"E^1_{p} is not H(A)-flat", witness=name,
                               degree=sum(bad[0]))
        for name, N in tests:
            try:
                HN = homology_module(N, HA)
            except NotFree:
                continue
            kap = _kappa(N, HN, Q, E1)
            for n in range(kap.source.lo, top + 1):
                if not is_quasi_iso(kap, [n]):
                    return Verdict(False, f"Kunneth map fails on E^1_{p}", witness=name, degree=n)
    names = [name for name, _ in tests]
    return Verdict(True, "battery", witness={"kunneth": names, "flatness": [n for n, _ in flat_tests],
                                             "through": top})


def _first_torsion(C, top):
    for n in C.degrees():
        fs = [f for f in homology_at(C.carrier, n).factors if f]
        if fs:
            return n, fs[0]
    return None, 0


def kunneth_map(N: DGModule, X: SplitModule, p=0):
    """The Kunneth map HN (x)_{HA} E^1_p X -> E^1_p (N (x)_A X) as a chain map."""
    HA = homology_algebra(X.algebra)
    Q, _ = filtration_quotient(X, p)
    return _kappa(N, homology_module(N, HA), Q, homology_module(Q, HA))


# ---------------------------------------------------------------- semi-flatness and gamma

def tensor_map_over_A(f: ChainMap, X: DGModule):
    """f (x)_A 1: P (x)_A X -> Q (x)_A X on the coequalizer presentations."""
    P, Q = f.source_module, f.target_module
    S = tensor_over_A(P, X, route="coequalizer")
    T = tensor_over_A(Q, X, route="coequalizer")
    g = tensor_maps(f, ChainMap.identity(X.carrier))
    return ChainMap(S, T, {n: g.at(n) for n in S.degrees()}, check=False)


def module_map(f: ChainMap, P: DGModule, Q: DGModule):
    """Attach module structures to a chain map between carriers."""
    f.source_module, f.target_module = P, Q
    return f


@dataclass
class SemiflatReport:
    verdict: Verdict
    failures: list
    checked: list


def semiflat_probe(X: DGModule, tests, degrees):
    """Check that f (x)_A X is a quasi-isomorphism for each q-equivalence f in ``tests``.

    Each test is a ChainMap with ``source_module``/``target_module`` (right
    modules), see :func:`module_map`.  Only a failure is definitive.
    """
    failures, checked = [], []
    for k, f in enumerate(tests):
        name = getattr(f, "name", f"test{k}")
        g = tensor_map_over_A(f, X)
        for n in degrees:
            if not is_quasi_iso(g, [n]):
                failures.append((name, n))
        checked.append(name)
    if failures:
        return SemiflatReport(Verdict(False, "not semi-flat", witness=failures[0][0],
                                      degree=failures[0][1]), failures, checked)
    return SemiflatReport(Verdict(True, "battery", witness=checked), [], checked)


@dataclass
class GammaReport:
    matrices: dict
    source: dict
    target: dict
    iso_degrees: list
    cokernel: dict


def gamma(N: DGModule, M: DGModule, res: ResolutionMap | None = None, top=8):
    """gamma: Tor^A(N, M) -> H(N (x)_A M), induced by 1 (x) alpha."""
    res = res or resolve(M, "moore", top=top)
    X = res.X
    S = tensor_over_A(N, X)
    T = tensor_over_A(N, M, route="coequalizer")
    A = X.algebra
    mats = {}
    for t in S.degrees():
        if not T.rank(t) or not S.rank(t):
            continue
        offs, _ = tensor_offsets(N.carrier, X.generators, t)
        toffs, _ = tensor_offsets(N.carrier, M.carrier, t)
        cols = []
        for s, start in sorted(offs.items()):
            q = t - s
            for m in range(N.rank(s)):
                for g in range(X.generators.rank(q)):
                    v = [0] * T.rank(t)
                    ag = res.alpha.at(q).column(X.index(q, 0, A.unit, g)) if M.rank(q) else []
                    for e, c in enumerate(ag):
                        if c:
                            v[toffs[s] + m * M.rank(q) + e] += c
                    cols.append(v)
        mats[t] = Matrix.from_columns(T.ring, cols, T.rank(t))
    f = ChainMap(S, T, mats, check=False)
    hi = min(top, res.top + N.carrier.lo)
    out = GammaReport({}, {}, {}, [], {})
    for n in range(S.lo, hi + 1):
        Mx, hs, ht = induced_map(f, n)
        out.matrices[n] = Mx
        out.source[n], out.target[n] = hs.factors, ht.factors
        if coord_map_is_iso(f.ring, Mx, hs.moduli, ht.moduli):
            out.iso_degrees.append(n)
        z, b = cycles_and_boundaries(T, n)
        img = [f.at(n).apply(r) for r in hs.reps]
        out.cokernel[n] = Subquotient(T.ring, T.rank(n), z, b + img).factors if T.rank(n) else ()
    return out


# ---------------------------------------------------------------- triple Massey products

@dataclass
class MasseyProduct:
    """<x, y, z> as a representative class plus indeterminacy generators."""
    degree: int
    representative: list
    classes: Subquotient
    indeterminacy: list
    bounding: tuple

    def coset_coords(self, v):
        """Coordinates of a cycle in H_degree modulo the indeterminacy."""
        return self.classes.coords(v)

    @property
    def contains_zero(self):
        return not any(self.coset_coords(self.representative))


@dataclass
class Undefined:
    reason: str

    def __bool__(self):
        return False


def _bar(A, i, v):
    """abar = (-1)^{1+|a|} a."""
    return [A.ring.reduce(-c if i % 2 == 0 else c) for c in v]


def _boundary_preimage(A, n, v):
    """Some u in A_{n+1} with du = v, or None."""
    if not A.rank(n):
        return []
    if not any(A.ring.reduce(c) for c in v):
        return [0] * A.rank(n + 1)
    if not A.rank(n + 1):
        return None
    return LinearSolver(A.d(n + 1)).solve(list(v))


def triple_massey(A, x, y, z, bounding=None):
    """<x, y, z> for cycles given as (degree, vector).

    With du = xbar y and dv = ybar z (abar = (-1)^{1+|a|} a) the product is
    the class of xbar v + ubar z, defined up to x H + H z.  ``bounding``
    may supply (u, v); otherwise the solver's choice is used.
    """
    (i, xv), (j, yv), (k, zv) = x, y, z
    for deg, v in (x, y, z):
        if A.rank(deg - 1) and any(A.d(deg).apply(v)):
            raise ValueError(f"degree-{deg} entry is not a cycle")
    xy = A.product(i, _bar(A, i, xv), j, yv)
    yz = A.product(j, _bar(A, j, yv), k, zv)
    if bounding is None:
        u = _boundary_preimage(A, i + j, xy)
        v = _boundary_preimage(A, j + k, yz)
        if u is None or v is None:
            return Undefined("a product does not vanish in homology")
    else:
        u, v = bounding
        if A.d(i + j + 1).apply(u) != [A.ring.reduce(c) for c in xy] if A.rank(i + j) else False:
            raise ValueError("u does not bound xbar y")
        if A.d(j + k + 1).apply(v) != [A.ring.reduce(c) for c in yz] if A.rank(j + k) else False:
            raise ValueError("v does not bound ybar z")
    n = i + j + k + 1
    rep = [0] * A.rank(n)
    if rep:
        rep = [a + b for a, b in zip(A.product(i, _bar(A, i, xv), j + k + 1, v),
                                     A.product(i + j + 1, _bar(A, i + j + 1, u), k, zv))]
        rep = [A.ring.reduce(c) for c in rep]
    zs, bs = cycles_and_boundaries(A.carrier, n) if A.rank(n) else ([], [])
    ind = []
    for cyc in cycles_and_boundaries(A.carrier, j + k + 1)[0] if A.rank(j + k + 1) else []:
        ind.append(A.product(i, xv, j + k + 1, cyc))
    for cyc in cycles_and_boundaries(A.carrier, i + j + 1)[0] if A.rank(i + j + 1) else []:
        ind.append(A.product(i + j + 1, cyc, k, zv))
    ind = [w for w in ind if any(w)]
    classes = Subquotient(A.ring, A.rank(n), zs, bs + ind)
    return MasseyProduct(n, rep, classes, ind, (u, v))


# ---------------------------------------------------------------- edge and suspension maps

@dataclass
class EdgeReport:
    pi: dict
    pi_kernel: dict
    sigma: dict
    sigma_kernel: dict
    decomposables: dict
    tor_RM: TorTable
    tor_RR: TorTable


def edge_and_suspension(A, M=None, top=6):
    """pi: HM -> Tor^A(R, M) and sigma: IHA -> Tor^A(R, R) (filtration 1 of the bar construction).

    Kernels are reported as coordinate vectors in the homology bases;
    ``decomposables[n]`` spans (IHA . IHA)_n for comparison with ker sigma.
    """
    from .dg_algebra import trivial_module
    if A.aug is None:
        raise MissingStructure("edge maps need an augmentation")
    M = M or trivial_module(A)
    R = trivial_module(A, "right")
    HA = homology_algebra(A)
    HM = homology_module(M, HA)
    # pi through a resolution: H(M) = H(X) -> H(R (x)_A X)
    resM = bar_resolution(M, top=top)
    TM = tor(R, M, resolution=resM, top=top)
    pi, pik = {}, {}
    X = resM.X
    for n in range(M.carrier.lo, min(top, TM.window[1]) + 1):
        if not HM.rank(n):
            continue
        cols = []
        for m in HM.reps[n]:
            x = _alpha_preimage(resM, n, m)
            cols.append(list(TM.at(n).coords(_augment_cycle(X, n, x))))
        pi[n] = cols
        pik[n] = _coord_kernel(A.ring, cols, TM.at(n).moduli)
    resR = bar_resolution(trivial_module(A), top=top + 1)
    TR = tor(R, trivial_module(A), resolution=resR, top=top + 1)
    B = resR.X
    sig, sigk, dec = {}, {}, {}
    for n in range(1, top + 1):
        if not HA.rank(n):
            continue
        cols = []
        for a in HA.reps[n]:
            v = [0] * TR.complex.rank(n + 1)
            for b, c in enumerate(a):
                key = (((n, b),), (0, 0))
                if c and key in B.where:
                    v[B.where[key][1]] += c
            cols.append(list(TR.at(n + 1).coords(v)))
        sig[n] = cols
        sigk[n] = _coord_kernel(A.ring, cols, TR.at(n + 1).moduli)
        prods = []
        for i in range(1, n):
            for ai in range(HA.rank(i)):
                for bj in range(HA.rank(n - i)):
                    w = HA.basis_product(i, ai, n - i, bj)
                    if any(w):
                        prods.append(w)
        dec[n] = prods
    return EdgeReport(pi, pik, sig, sigk, dec, TM, TR)


def _alpha_preimage(res, n, m):
    """A cycle x of X_n with alpha(x) homologous to the cycle m."""
    X, M = res.X, res.M
    bnd = M.carrier.d(n + 1).columns() if M.rank(n + 1) else []
    dX = X.carrier.d(n) if X.rank(n - 1) else None
    nx = X.rank(n)
    rows = []
    for r in range(M.rank(n)):
        rows.append([res.alpha.at(n).data[r][c] for c in range(nx)] + [b[r] for b in bnd])
    if dX is not None:
        for r in range(dX.rows):
            rows.append([dX.data[r][c] for c in range(nx)] + [0] * len(bnd))
    rhs = list(m) + ([0] * dX.rows if dX is not None else [])
    sol = LinearSolver(Matrix.from_rows(X.ring, rows, nx + len(bnd))).solve(rhs)
    if sol is None:
        raise WindowTooSmall(f"alpha is not onto homology in degree {n}")
    return sol[:nx]


def _augment_cycle(X, n, x):
    """Image of x under X = A (x)_A X -> R (x)_A X, in shortcut coordinates."""
    A = X.algebra
    out = [0] * X.generators.rank(n)
    for i, a, g, c in X.entries(n, x):
        if i == 0:
            out[g] += c * A.aug[a]
    return [X.ring.reduce(v) for v in out]


def _coord_kernel(ring, cols, moduli):
    """Kernel of a coordinate matrix between cyclic decompositions, as generating vectors."""
    k = len(cols)
    rows = len(moduli)
    data = [[cols[c][r] for c in range(k)] + [m * (r == s) for s in range(rows) if moduli[s]]
            for r, m in enumerate(moduli)]
    extra = sum(1 for m in moduli if m)
    if not rows:
        return [_unit_vec(k, c) for c in range(k)]
    ker = LinearSolver(Matrix.from_rows(ring, data, k + extra)).kernel_vectors()
    return [v[:k] for v in ker if any(ring.reduce(x) for x in v[:k])]


# ---------------------------------------------------------------- long exact sequence

@dataclass
class LESReport:
    tables: tuple
    exact: dict
    connecting: dict

    @property
    def all_exact(self):
        return all(self.exact.values())


def _span_contains(ring, dim, gens, v):
    return Subquotient(ring, dim, gens, []).contains(v) if dim else True


def _same_span(ring, dim, U, V):
    if not dim:
        return True
    su, sv = Subquotient(ring, dim, U, []), Subquotient(ring, dim, V, [])
    return all(sv.contains(u) for u in U) and all(su.contains(v) for v in V)


def _preimage_mod(ring, f_cols, rels, v, dim_src):
    """x with f(x) = v modulo the relation vectors, or None."""
    if not v:
        return [0] * dim_src
    cols = f_cols + rels
    if not cols:
        return [0] * dim_src if not any(v) else None
    sol = LinearSolver(Matrix.from_columns(ring, cols, len(v))).solve(v)
    return None if sol is None else sol[:dim_src]


def _check_ses(i: ChainMap, j: ChainMap):
    """Raise ValueError unless 0 -> N' -> N -> N'' -> 0 is exact on carriers."""
    ring = i.ring
    for n in i.target.degrees():
        a, b, c = i.source, i.target, j.target
        ra, rb, rc = list(a.relations(n)), list(b.relations(n)), list(c.relations(n))
        icols = i.at(n).columns() if a.rank(n) else []
        jcols = j.at(n).columns() if b.rank(n) else []
        for col in icols:
            if c.rank(n) and not _span_contains(ring, c.rank(n), rc, j.at(n).apply(col)):
                raise ValueError(f"j o i != 0 in degree {n}")
        for k in range(c.rank(n)):
            if not _span_contains(ring, c.rank(n), jcols + rc, _unit_vec(c.rank(n), k)):
                raise ValueError(f"j is not onto in degree {n}")
        if b.rank(n):
            if c.rank(n):
                m = Matrix.from_columns(ring, jcols + rc, c.rank(n))
                ker = [v[:b.rank(n)] for v in LinearSolver(m).kernel_vectors()]
            else:
                ker = [_unit_vec(b.rank(n), k) for k in range(b.rank(n))]
            for v in ker:
                if not _span_contains(ring, b.rank(n), icols + rb, v):
                    raise ValueError(f"ker j is not im i in degree {n}")
        if a.rank(n):
            m = Matrix.from_columns(ring, icols + rb, b.rank(n)) if b.rank(n) else None
            ker = ([v[:a.rank(n)] for v in LinearSolver(m).kernel_vectors()] if m is not None
                   else [_unit_vec(a.rank(n), k) for k in range(a.rank(n))])
            for v in ker:
                if not _span_contains(ring, a.rank(n), ra, v):
                    raise ValueError(f"i is not injective in degree {n}")


def _tensor_with_gens(f: ChainMap, P, Q, X):
    """f (x) 1 on shortcut tensors P (x) Xbar -> Q (x) Xbar."""
    S, T = tensor_over_A(P, X), tensor_over_A(Q, X)
    G = X.generators
    mats = {}
    for t in S.degrees():
        if not S.rank(t) or not T.rank(t):
            continue
        so, _ = tensor_offsets(P.carrier, G, t)
        to, _ = tensor_offsets(Q.carrier, G, t)
        cols = []
        for s, start in sorted(so.items()):
            rg = G.rank(t - s)
            for m in range(P.rank(s)):
                for g in range(rg):
                    v = [0] * T.rank(t)
                    if Q.rank(s):
                        for e, c in enumerate(f.at(s).column(m)):
                            if c:
                                v[to[s] + e * rg + g] += c
                    cols.append(v)
        mats[t] = Matrix.from_columns(S.ring, cols, T.rank(t))
    return S, T, ChainMap(S, T, mats, check=False)


def tor_les(i: ChainMap, j: ChainMap, modules, M: DGModule, method="moore", top=6,
            resolution=None):
    """Long exact Tor sequence of 0 -> N' -> N -> N'' -> 0 (right modules) against M.

    ``modules`` is (N', N, N'') and i, j are chain maps between their
    carriers.  Exactness is checked at every node in the window.
    """
    N1, N2, N3 = modules
    _check_ses(i, j)
    res = resolution or resolve(M, method, top=top)
    X = res.X
    S1, S2, fi = _tensor_with_gens(i, N1, N2, X)
    _, S3, fj = _tensor_with_gens(j, N2, N3, X)
    tables = tuple(tor(N, M, resolution=res, top=top) for N in (N1, N2, N3))
    lo = min(t.window[0] for t in tables)
    hi = min(t.window[1] for t in tables)
    ring = X.ring
    exact, conn = {}, {}

    def data(C, n):
        if not C.rank(n):
            return [], [], []
        z, b = cycles_and_boundaries(C, n)
        return z, b, list(C.relations(n))

    def delta(n, z3):
        """Connecting map on a cycle of N'' (x) X in degree n."""
        y = _preimage_mod(ring, fj.at(n).columns(), list(S3.relations(n)), z3, S2.rank(n))
        if y is None:
            raise ValueError("cycle does not lift")
        dy = S2.d(n).apply(y) if S2.rank(n - 1) else []
        w = _preimage_mod(ring, fi.at(n - 1).columns(), list(S2.relations(n - 1)), dy,
                          S1.rank(n - 1))
        if w is None:
            raise ValueError("boundary does not pull back")
        return w

    for n in range(lo, hi + 1):
        z1, b1, r1 = data(S1, n)
        z2, b2, r2 = data(S2, n)
        z3, b3, r3 = data(S3, n)
        # at Tor(N'): ker i_* = im delta
        ker_i = _homology_kernel(ring, z1, fi.at(n), b2 + r2, S1.rank(n), S2.rank(n))
        im_d = [delta(n + 1, z) for z in data(S3, n + 1)[0]] if S3.rank(n + 1) else []
        exact[("Tor(N')", n)] = _same_span(ring, S1.rank(n), ker_i + b1 + r1, im_d + b1 + r1)
        # at Tor(N): ker j_* = im i_*
        ker_j = _homology_kernel(ring, z2, fj.at(n), b3 + r3, S2.rank(n), S3.rank(n))
        im_i = [fi.at(n).apply(z) for z in z1] if S1.rank(n) else []
        exact[("Tor(N)", n)] = _same_span(ring, S2.rank(n), ker_j + b2 + r2, im_i + b2 + r2)
        # at Tor(N''): ker delta = im j_*
        if S3.rank(n):
            dz = [delta(n, z) for z in z3]
            ker_d = _kernel_of_values(ring, z3, dz, data(S1, n - 1)[1] + data(S1, n - 1)[2],
                                      S1.rank(n - 1))
            im_j = [fj.at(n).apply(z) for z in z2] if S2.rank(n) else []
            exact[("Tor(N'')", n)] = _same_span(ring, S3.rank(n), ker_d + b3 + r3, im_j + b3 + r3)
            hs = tables[2].at(n)
            ht = tables[0].at(n - 1)
            conn[n] = [list(ht.coords(delta(n, rep))) if ht.dim else [] for rep in hs.reps]
        else:
            exact[("Tor(N'')", n)] = True
    return LESReport(tables, exact, conn)


def _homology_kernel(ring, zs, f, target_sub, dsrc, dtgt):
    """Cycles (as combinations of zs) whose image under f lies in target_sub."""
    if not zs:
        return []
    if not dtgt:
        return list(zs)
    imgs = [f.apply(z) for z in zs]
    return _kernel_of_values(ring, zs, imgs, target_sub, dtgt)


def _kernel_of_values(ring, zs, vals, sub, dim):
    """Combinations of zs whose values (vals, linear in zs) lie in span(sub)."""
    if not zs:
        return []
    if not dim:
        return list(zs)
    m = Matrix.from_columns(ring, vals + sub, dim)
    out = []
    for w in LinearSolver(m).kernel_vectors():
        c = w[:len(zs)]
        if any(ring.reduce(x) for x in c):
            v = [ring.reduce(sum(a * z[k] for a, z in zip(c, zs))) for k in range(len(zs[0]))]
            out.append(v)
    return out
