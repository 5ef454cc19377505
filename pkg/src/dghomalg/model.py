"""Fibration predicates, enriched lifting, factorizations and lifts in M_R.

All complexes here are degreewise free, so "cofibration" in the q-, r- and
h-structures is tested as "degreewise split monomorphism" and the acyclic
variants add a quasi-isomorphism (q) or homotopy-equivalence (r, h) check.
Every positive answer carries explicit witnesses that ``verify`` re-checks.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .complexes import (ChainMap, FinComplex, Homotopy, cocylinder, cylinder, direct_sum,
                        disk, is_h_equivalence, is_quasi_iso, sum_inclusion)
from .linalg import (LinearSolver, Matrix, Subquotient, block_matrix, coord_in_image,
                     solve_matrix_system, IntegersMod, ZZ)


class PreconditionFailed(ValueError):
    pass


def _solve_columns(A, C):
    """X with A X = C, or None."""
    solver = LinearSolver(A)
    cols = []
    for c in C.columns():
        x = solver.solve(c)
        if x is None:
            return None
        cols.append(x)
    return Matrix.from_columns(A.ring, cols, A.cols)


# ---------------------------------------------------------------- fibrations

def is_q_fibration(p: ChainMap) -> bool:
    """Degreewise surjective."""
    T = p.target
    for n in p.degrees():
        if T.rank(n) == 0:
            continue
        ident = [[int(i == j) for i in range(T.rank(n))] for j in range(T.rank(n))]
        if not Subquotient(p.ring, T.rank(n), ident, p.at(n).columns()).is_zero():
            return False
    return True


@dataclass
class Yes:
    witness: object = None

    def __bool__(self):
        return True


@dataclass
class No:
    degree: int | None = None
    reason: str = ""

    def __bool__(self):
        return False


def is_r_fibration(p: ChainMap):
    """Yes(sections) with p_n s_n = id for graded sections s_n, else No(degree)."""
    sections = {}
    for n in p.degrees():
        s = _solve_columns(p.at(n), Matrix.identity(p.ring, p.target.rank(n)))
        if s is None:
            return No(n, "no module section")
        sections[n] = s
    return Yes(sections)


@dataclass(frozen=True)
class PresentedMap:
    """A map between modules given as sums of cyclic modules R/(m).

    ``matrix`` acts on coordinates; moduli use n for free summands over Z/n
    and 0 for free summands over Z.
    """

    ring: object
    source: tuple
    target: tuple
    matrix: tuple

    def is_epi(self):
        M = [list(r) for r in self.matrix]
        return all(coord_in_image(self.ring, M, list(self.target),
                                  [int(i == j) for i in range(len(self.target))])
                   for j in range(len(self.target)))

    def section(self):
        """Coordinates of a module section, or None when the epi does not split."""
        if not self.is_epi():
            return None
        if self.ring.is_field:
            s = _solve_columns(Matrix(self.ring, len(self.target), len(self.source),
                                      [list(r) for r in self.matrix]),
                               Matrix.identity(self.ring, len(self.target)))
            return None if s is None else s.tolist()
        a, b = len(self.source), len(self.target)
        cols = []
        for j, t in enumerate(self.target):
            # unknowns: x (a), slack for t*x = 0 (a), slack for Px = e_j (b)
            rows, rhs = [], []
            for i, m in enumerate(self.source):
                row = [0] * (2 * a + b)
                row[i] = t
                row[a + i] = m
                rows.append(row)
                rhs.append(0)
            for k, mk in enumerate(self.target):
                row = [int(self.matrix[k][i]) for i in range(a)] + [0] * a + [0] * b
                row[2 * a + k] = mk
                rows.append(row)
                rhs.append(int(j == k))
            x = LinearSolver(Matrix(ZZ, len(rows), 2 * a + b, rows)).solve(rhs)
            if x is None:
                return None
            cols.append([v % m if m else v for v, m in zip(x[:a], self.source)])
        return [[c[i] for c in cols] for i in range(a)]


def is_r_fibration_presented(maps: dict):
    """Degreewise split-epi test for maps of presented (possibly non-free) modules."""
    sections = {}
    for n in sorted(maps):
        s = maps[n].section()
        if s is None:
            return No(n, "no module section")
        sections[n] = s
    return Yes(sections)


def is_q_fibration_presented(maps: dict) -> bool:
    return all(m.is_epi() for m in maps.values())


def enriched_lift_JR(p: ChainMap):
    """Enriched RLP against the disks 0 -> D^n is exactly degreewise splitting."""
    return is_r_fibration(p)


# ---------------------------------------------------------------- enriched lifting against I_R

@dataclass
class PullbackSection:
    """A section eta_n of (p_n, d): E_n -> B_n x_{Z_{n-1}B} Z_{n-1}E."""

    module: Subquotient       # the pullback inside B_n + E_{n-1}
    images: list              # eta of each cyclic generator, vectors in E_n
    b_rank: int
    e_rank: int

    def __call__(self, b, c):
        coords = self.module.coords(list(b) + list(c))
        ring = self.module.ring
        out = [0] * self.e_rank
        for k, x in zip(coords, self.images):
            if k:
                out = [u + k * v for u, v in zip(out, x)]
        return [ring.reduce(v) for v in out]


@dataclass
class IRWitness:
    eta: dict                 # n -> PullbackSection
    sigma: ChainMap           # chain section of p
    kernel_gens: dict         # n -> generators of ker p_n
    contraction: dict         # n -> images s_n(c) of kernel_gens[n]

    def s(self, n, c):
        return _kernel_contraction(self, n, c)


def _pullback_section(p, n, eps_check=True):
    E, B, ring = p.source, p.target, p.ring
    bn, e1 = B.rank(n), E.rank(n - 1)
    # (b, c) with d c = 0 and d b = p c
    cons = block_matrix(ring, [B.rank(n - 1), E.rank(n - 2)], [bn, e1],
                        {(0, 0): B.d(n), (0, 1): -p.at(n - 1), (1, 1): E.d(n - 1)})
    gens = LinearSolver(cons).kernel_vectors() if bn + e1 else []
    module = Subquotient(ring, bn + e1, gens, [])
    eps = block_matrix(ring, [bn, e1], [E.rank(n)], {(0, 0): p.at(n), (1, 0): E.d(n)})
    images = []
    for rep, m in zip(module.reps, module.moduli):
        A, rhs = eps, list(rep)
        if isinstance(ring, IntegersMod) and m != ring.n:
            A = block_matrix(ring, [bn + e1, E.rank(n)], [E.rank(n)],
                             {(0, 0): eps, (1, 0): Matrix.identity(ring, E.rank(n)).scale(m)})
            rhs = rhs + [0] * E.rank(n)
        x = LinearSolver(A).solve(rhs)
        if x is None:
            return None
        images.append(x)
    return PullbackSection(module, images, bn, E.rank(n))


def _kernel_contraction(w, n, c):
    """s_n(c) = eta_{n+1}(0, c - eta_n(0, dc))."""
    E = w.sigma.target
    ring = E.ring
    dc = E.d(n).apply(c)
    inner = w.eta[n]([0] * w.eta[n].b_rank, dc) if n in w.eta else [0] * E.rank(n)
    arg = [ring.reduce(a - b) for a, b in zip(c, inner)]
    if n + 1 not in w.eta:
        return [0] * E.rank(n + 1)
    return w.eta[n + 1]([0] * w.eta[n + 1].b_rank, arg)


def enriched_lift_IR(p: ChainMap):
    """Yes(IRWitness) when every eta_n exists, else No(first failing degree)."""
    E, B, ring = p.source, p.target, p.ring
    lo = min(E.lo, B.lo)
    hi = max(E.hi, B.hi) + 1
    eta = {}
    for n in range(lo, hi + 1):
        sec = _pullback_section(p, n)
        if sec is None:
            return No(n, "pullback map has no section")
        eta[n] = sec
    sig = {}
    for n in range(lo, hi + 1):
        cols = []
        for j in range(B.rank(n)):
            b = [int(i == j) for i in range(B.rank(n))]
            db = B.d(n).apply(b)
            inner = eta[n - 1](db, [0] * E.rank(n - 2)) if n - 1 in eta else [0] * E.rank(n - 1)
            cols.append(eta[n](b, inner))
        sig[n] = Matrix.from_columns(ring, cols, E.rank(n))
    sigma = ChainMap(B, E, sig, check=False)
    w = IRWitness(eta, sigma, {}, {})
    for n in range(lo, hi):
        gens = LinearSolver(p.at(n)).kernel_vectors() if E.rank(n) else []
        w.kernel_gens[n] = gens
        w.contraction[n] = [_kernel_contraction(w, n, c) for c in gens]
    return Yes(w)


def verify_ir_witness(p, w: IRWitness):
    """Failures of p sigma = id, sigma a chain map, ds + sd = id on ker p."""
    bad = []
    if w.sigma.commutation_violations():
        bad.append("sigma is not a chain map")
    for n in p.target.degrees():
        if p.at(n) @ w.sigma.at(n) != Matrix.identity(p.ring, p.target.rank(n)):
            bad.append(f"p sigma != id in degree {n}")
    E = p.source
    for n, gens in w.kernel_gens.items():
        for c, sc in zip(gens, w.contraction[n]):
            if any(p.at(n + 1).apply(sc)):
                bad.append(f"s({n}) leaves ker p")
            ds = E.d(n + 1).apply(sc)
            dc = E.d(n).apply(c)
            sd = _kernel_contraction(w, n - 1, dc) if any(dc) else [0] * E.rank(n)
            tot = [p.ring.reduce(a + b) for a, b in zip(ds, sd)]
            if tot != [p.ring.reduce(x) for x in c]:
                bad.append(f"ds + sd != id on ker p in degree {n}")
    return bad


# ---------------------------------------------------------------- factorizations

@dataclass
class Factorization:
    """f = right o left with optional witnesses.

    ``left_retraction[n] @ left.at(n) = id`` (degreewise split mono),
    ``right.at(n) @ right_section[n] = id`` (degreewise split epi) and
    ``homotopy`` satisfies ds + sd = id - ``homotopy_target``.
    """

    original: ChainMap
    left: ChainMap
    right: ChainMap
    left_retraction: dict = field(default_factory=dict)
    right_section: dict = field(default_factory=dict)
    homotopy: Homotopy | None = None
    homotopy_target: ChainMap | None = None

    @property
    def middle(self):
        return self.left.target

    def verify(self):
        bad = []
        f = self.original
        for n in f.degrees():
            if self.right.at(n) @ self.left.at(n) != f.at(n):
                bad.append(f"right o left != f in degree {n}")
        for name, m in (("left", self.left), ("right", self.right)):
            if m.commutation_violations():
                bad.append(f"{name} is not a chain map")
        for n, r in self.left_retraction.items():
            if r @ self.left.at(n) != Matrix.identity(f.ring, self.left.source.rank(n)):
                bad.append(f"left retraction fails in degree {n}")
        for n, s in self.right_section.items():
            if self.right.at(n) @ s != Matrix.identity(f.ring, self.right.target.rank(n)):
                bad.append(f"right section fails in degree {n}")
        if self.homotopy is not None:
            M = self.homotopy.source
            if not self.homotopy.verifies(ChainMap.identity(M), self.homotopy_target,
                                          M.degrees()):
                bad.append("homotopy equation fails")
        return bad


def _block_retraction(sizes, k, n_size, ring):
    return block_matrix(ring, [n_size], sizes, {(0, k): Matrix.identity(ring, n_size)})


def factor_onestep_J(f: ChainMap) -> Factorization:
    """X -> X + (sum of disks D^n, one per generator of Y_n) -> Y."""
    X, Y, ring = f.source, f.target, f.ring
    disks = [(n, k) for n in Y.degrees() for k in range(Y.rank(n))]
    parts = [X] + [disk(n, ring) for n, _ in disks]
    M = direct_sum(*parts)
    left = sum_inclusion(parts, 0)
    right, ret, sec = {}, {}, {}
    for m in M.degrees():
        sizes = [P.rank(m) for P in parts]
        blocks = {(0, 0): f.at(m)}
        sblocks = {}
        for idx, (n, k) in enumerate(disks, start=1):
            if m == n:
                blocks[(0, idx)] = Matrix.from_columns(
                    ring, [[int(i == k) for i in range(Y.rank(n))]], Y.rank(n))
                sblocks[(idx, 0)] = Matrix(ring, 1, Y.rank(n),
                                           [[int(i == k) for i in range(Y.rank(n))]])
            elif m == n - 1:
                blocks[(0, idx)] = Matrix.from_columns(ring, [Y.d(n).column(k)], Y.rank(m))
        right[m] = block_matrix(ring, [Y.rank(m)], sizes, blocks)
        ret[m] = _block_retraction(sizes, 0, X.rank(m), ring)
        sec[m] = block_matrix(ring, sizes, [Y.rank(m)], sblocks)
    return Factorization(f, left, ChainMap(M, Y, right, check=False), ret, sec)


def factor_cylinder(f: ChainMap) -> Factorization:
    """f = r o j through the mapping cylinder; ds + sd = id - i r."""
    c = cylinder(f)
    X, Y = f.source, f.target
    ret = {n: block_matrix(f.ring, [X.rank(n)], [Y.rank(n), X.rank(n), X.rank(n - 1)],
                           {(0, 1): Matrix.identity(f.ring, X.rank(n))})
           for n in c.middle.degrees()}
    sec = {n: c.i.at(n) for n in c.middle.degrees()}
    return Factorization(f, c.j, c.r, ret, sec, c.homotopy, c.i @ c.r)


def factor_cocylinder(f: ChainMap) -> Factorization:
    """f = rho o nu through the mapping cocylinder; ds + sd = id - nu pi."""
    c = cocylinder(f)
    ret = {n: c.pi.at(n) for n in c.middle.degrees()}
    return Factorization(f, c.nu, c.rho, ret, c.section, c.homotopy, c.nu @ c.pi)


# ---------------------------------------------------------------- lifts

def split_mono_retractions(i: ChainMap):
    """Graded retractions r_n with r_n i_n = id, or None."""
    out = {}
    for n in i.degrees():
        r = _solve_columns(i.at(n).T, Matrix.identity(i.ring, i.source.rank(n)))
        if r is None:
            return None
        out[n] = r.T
    return out


@dataclass
class LiftSquare:
    """p o top = bottom o i."""

    i: ChainMap
    p: ChainMap
    top: ChainMap
    bottom: ChainMap

    def commutes(self):
        return all(self.p.at(n) @ self.top.at(n) == self.bottom.at(n) @ self.i.at(n)
                   for n in self.i.degrees())


def _is_acyclic(m, structure):
    return is_quasi_iso(m) if structure == "q" else bool(is_h_equivalence(m))


def check_lift_hypotheses(sq: LiftSquare, structure, acyclic):
    """Raise PreconditionFailed unless (i, p) is a (cofibration, fibration) pair
    with the named one acyclic in the given structure."""
    if structure not in ("q", "r", "h"):
        raise ValueError(f"unknown structure {structure!r}")
    if not sq.commutes():
        raise PreconditionFailed("square does not commute")
    if split_mono_retractions(sq.i) is None:
        raise PreconditionFailed("i is not a degreewise split monomorphism")
    fib = is_q_fibration(sq.p) if structure == "q" else bool(is_r_fibration(sq.p))
    if not fib:
        raise PreconditionFailed(f"p is not a {structure}-fibration")
    target = sq.i if acyclic == "i" else sq.p
    if not _is_acyclic(target, structure):
        raise PreconditionFailed(f"{acyclic} is not {structure}-acyclic")


def solve_lift(sq: LiftSquare, structure="q", acyclic="p"):
    """A chain map lam with lam i = top and p lam = bottom, or None."""
    check_lift_hypotheses(sq, structure, acyclic)
    return find_lift(sq)


def find_lift(sq: LiftSquare):
    """Solve the lifting equations directly, without checking hypotheses."""
    X, E, ring = sq.i.target, sq.p.source, sq.i.ring
    degs = list(range(min(X.lo, E.lo) - 1, max(X.hi, E.hi) + 2))
    shapes = {n: (E.rank(n), X.rank(n)) for n in degs}
    eqs = []
    for n in degs:
        eqs.append(([(None, n, sq.i.at(n))], sq.top.at(n)))
        eqs.append(([(sq.p.at(n), n, None)], sq.bottom.at(n)))
        if n - 1 in shapes:
            eqs.append(([(E.d(n), n, None), (None, n - 1, -X.d(n))],
                        Matrix.zero(ring, E.rank(n - 1), X.rank(n))))
    sol = solve_matrix_system(ring, shapes, eqs)
    if sol is None:
        return None
    return ChainMap(X, E, sol, check=False)


def verify_lift(sq: LiftSquare, lam: ChainMap):
    bad = []
    if lam.commutation_violations():
        bad.append("lift is not a chain map")
    for n in sq.i.degrees():
        if lam.at(n) @ sq.i.at(n) != sq.top.at(n):
            bad.append(f"lam i != top in degree {n}")
        if sq.p.at(n) @ lam.at(n) != sq.bottom.at(n):
            bad.append(f"p lam != bottom in degree {n}")
    return bad


# ---------------------------------------------------------------- split exact sequences

@dataclass
class SplitNormalization:
    """phi: X + Z -> Y with phi(x, 0) = i(x) and g phi(x, z) = z; psi its inverse."""

    sum: FinComplex
    phi: ChainMap
    psi: ChainMap


def normalize_split_exact(i: ChainMap, g: ChainMap) -> SplitNormalization:
    X, Y, Z, ring = i.source, i.target, g.target, i.ring
    if g.source != Y:
        raise PreconditionFailed("maps are not composable")
    if split_mono_retractions(i) is None:
        raise PreconditionFailed("i is not degreewise split")
    sec = is_r_fibration(g)
    if not sec:
        raise PreconditionFailed("g is not degreewise split")
    for n in Y.degrees():
        if not (g.at(n) @ i.at(n)).is_zero():
            raise PreconditionFailed(f"g i != 0 in degree {n}")
        for v in LinearSolver(g.at(n)).kernel_vectors():
            if LinearSolver(i.at(n)).solve(v) is None:
                raise PreconditionFailed(f"not exact at Y in degree {n}")
    if not (is_h_equivalence(i) or is_h_equivalence(g)):
        raise PreconditionFailed("neither i nor g is a homotopy equivalence")
    sigma = sec.witness
    degs = list(range(min(X.lo, Z.lo) - 1, max(X.hi, Z.hi) + 2))
    tau = {}
    for n in degs:
        defect = Y.d(n) @ sigma.get(n, Matrix.zero(ring, Y.rank(n), Z.rank(n))) - \
            sigma.get(n - 1, Matrix.zero(ring, Y.rank(n - 1), Z.rank(n - 1))) @ Z.d(n)
        tau[n] = _solve_columns(i.at(n - 1), defect)
        if tau[n] is None:
            raise PreconditionFailed("section defect does not lie in X")
    shapes = {n: (X.rank(n), Z.rank(n)) for n in degs}
    eqs = [([(X.d(n), n, None), (None, n - 1, -Z.d(n))] if n - 1 in shapes
            else [(X.d(n), n, None)], -tau[n]) for n in degs]
    theta = solve_matrix_system(ring, shapes, eqs)
    if theta is None:
        raise PreconditionFailed("twisting term is not null-homotopic")
    S = direct_sum(X, Z)
    phi = {}
    for n in S.degrees():
        sig = sigma.get(n, Matrix.zero(ring, Y.rank(n), Z.rank(n)))
        phi[n] = block_matrix(ring, [Y.rank(n)], [X.rank(n), Z.rank(n)],
                              {(0, 0): i.at(n), (0, 1): sig + i.at(n) @ theta[n]})
    phi_map = ChainMap(S, Y, phi, check=False)
    psi = {n: _solve_columns(phi[n], Matrix.identity(ring, Y.rank(n))) for n in S.degrees()}
    return SplitNormalization(S, phi_map, ChainMap(Y, S, psi, check=False))
