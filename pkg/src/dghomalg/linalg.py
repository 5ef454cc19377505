"""Exact matrix algebra over Z, Z/n, F_p and Q.

Matrices are immutable and hold canonical ring representatives: Python ints
for Z, Z/n and F_p, ``fractions.Fraction`` for Q.  Everything here is exact.

Over Z/n we never factor n.  Kernels, solutions and subquotients are computed
by lifting to Z and adjoining the relations ``n * I``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd


class UnsupportedRing(TypeError):
    pass


class ShapeError(ValueError):
    pass


class NotASubmodule(ValueError):
    pass


class RingMismatch(ValueError):
    pass


# ---------------------------------------------------------------- rings

@dataclass(frozen=True)
class Integers:
    is_field = False

    def reduce(self, x):
        if isinstance(x, Fraction):
            if x.denominator != 1:
                raise ValueError(f"{x} is not an integer")
            return int(x.numerator)
        return int(x)

    def is_unit(self, x):
        return x in (1, -1)

    def inverse(self, x):
        if x not in (1, -1):
            raise ZeroDivisionError(f"{x} is not a unit in Z")
        return x

    def to_json(self):
        return {"kind": "Z"}

    def __str__(self):
        return "Z"


@dataclass(frozen=True)
class IntegersMod:
    n: int
    is_field = False

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("modulus must be at least 2")

    def reduce(self, x):
        if isinstance(x, Fraction):
            return (x.numerator * pow(x.denominator, -1, self.n)) % self.n
        return int(x) % self.n

    def is_unit(self, x):
        return gcd(x, self.n) == 1

    def inverse(self, x):
        return pow(x, -1, self.n)

    def to_json(self):
        return {"kind": "Zmod", "n": self.n}

    def __str__(self):
        return f"Z/{self.n}"


def _is_prime(p):
    if p < 2:
        return False
    f = 2
    while f * f <= p:
        if p % f == 0:
            return False
        f += 1
    return True


@dataclass(frozen=True)
class PrimeField:
    p: int
    is_field = True

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    def reduce(self, x):
        if isinstance(x, Fraction):
            return (x.numerator * pow(x.denominator, -1, self.p)) % self.p
        return int(x) % self.p

    def is_unit(self, x):
        return x % self.p != 0

    def inverse(self, x):
        return pow(x, -1, self.p)

    def to_json(self):
        return {"kind": "Fp", "p": self.p}

    def __str__(self):
        return f"F{self.p}"


@dataclass(frozen=True)
class Rationals:
    is_field = True

    def reduce(self, x):
        return Fraction(x)

    def is_unit(self, x):
        return x != 0

    def inverse(self, x):
        return 1 / Fraction(x)

    def to_json(self):
        return {"kind": "Q"}

    def __str__(self):
        return "Q"


ZZ = Integers()
QQ = Rationals()
Ring = Integers | IntegersMod | PrimeField | Rationals


def ring_from_json(obj) -> Ring:
    kind = obj.get("kind")
    if kind == "Z":
        return ZZ
    if kind == "Q":
        return QQ
    if kind == "Zmod":
        return IntegersMod(int(obj["n"]))
    if kind == "Fp":
        return PrimeField(int(obj["p"]))
    raise ValueError(f"unknown ring kind {kind!r}")


def parse_element(ring, text):
    """Decimal string (or "a/b" over Q) to a canonical representative."""
    return ring.reduce(Fraction(str(text)))


def format_element(x):
    return str(x)


# ---------------------------------------------------------------- matrices

class Matrix:
    """Immutable dense matrix with canonical entries."""

    __slots__ = ("ring", "rows", "cols", "data")

    def __init__(self, ring, rows, cols, data=None, *, reduced=False):
        self.ring = ring
        self.rows = rows
        self.cols = cols
        if data is None:
            data = [[0] * cols for _ in range(rows)]
        if len(data) != rows or any(len(r) != cols for r in data):
            raise ShapeError(f"expected {rows}x{cols} entries")
        red = ring.reduce
        if reduced:
            self.data = tuple(tuple(r) for r in data)
        else:
            self.data = tuple(tuple(red(x) for x in r) for r in data)

    @classmethod
    def from_rows(cls, ring, rows, cols=None):
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        return cls(ring, len(rows), cols, rows)

    @classmethod
    def zero(cls, ring, rows, cols):
        z = ring.reduce(0)
        return cls(ring, rows, cols, [[z] * cols for _ in range(rows)], reduced=True)

    @classmethod
    def identity(cls, ring, n):
        return cls(ring, n, n, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_columns(cls, ring, columns, rows):
        columns = [list(c) for c in columns]
        return cls(ring, rows, len(columns), [[c[i] for c in columns] for i in range(rows)])

    @property
    def shape(self):
        return (self.rows, self.cols)

    def tolist(self):
        return [list(r) for r in self.data]

    def column(self, j):
        return [r[j] for r in self.data]

    def columns(self):
        return [self.column(j) for j in range(self.cols)]

    def row(self, i):
        return list(self.data[i])

    def is_zero(self):
        return all(x == 0 for r in self.data for x in r)

    def __eq__(self, other):
        return (isinstance(other, Matrix) and self.ring == other.ring
                and self.shape == other.shape and self.data == other.data)

    def __hash__(self):
        return hash((self.ring, self.rows, self.cols, self.data))

    def __repr__(self):
        return f"Matrix({self.ring}, {self.rows}x{self.cols}, {self.tolist()})"

    def _check(self, other):
        if self.ring != other.ring:
            raise RingMismatch(f"{self.ring} vs {other.ring}")

    def __add__(self, other):
        self._check(other)
        if self.shape != other.shape:
            raise ShapeError(f"cannot add {self.shape} and {other.shape}")
        return Matrix(self.ring, self.rows, self.cols,
                      [[a + b for a, b in zip(r, s)] for r, s in zip(self.data, other.data)])

    def __neg__(self):
        return Matrix(self.ring, self.rows, self.cols, [[-a for a in r] for r in self.data])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return Matrix(self.ring, self.rows, self.cols, [[c * a for a in r] for r in self.data])

    def __matmul__(self, other):
        self._check(other)
        if self.cols != other.rows:
            raise ShapeError(f"cannot multiply {self.shape} by {other.shape}")
        return Matrix(self.ring, self.rows, other.cols, matmul(self.data, other.data, other.cols))

    def apply(self, vec):
        if len(vec) != self.cols:
            raise ShapeError(f"vector of length {len(vec)} for {self.shape} matrix")
        red = self.ring.reduce
        return [red(sum(a * v for a, v in zip(r, vec) if a and v)) for r in self.data]

    @property
    def T(self):
        return Matrix(self.ring, self.cols, self.rows,
                      [list(c) for c in zip(*self.data)] if self.rows else
                      [[] for _ in range(self.cols)], reduced=True)

    def submatrix(self, rows, cols):
        return Matrix(self.ring, len(rows), len(cols),
                      [[self.data[i][j] for j in cols] for i in rows], reduced=True)


def matmul(a, b, bcols):
    """Product of list-of-rows matrices; ``bcols`` handles the empty case."""
    bt = list(zip(*b)) if b else [()] * bcols
    out = []
    for r in a:
        nz = [(k, x) for k, x in enumerate(r) if x]
        out.append([sum(x * col[k] for k, x in nz) for col in bt])
    return out


def hstack(ring, rows, mats):
    if not mats:
        return Matrix.zero(ring, rows, 0)
    for m in mats:
        if m.rows != rows:
            raise ShapeError("hstack row mismatch")
    return Matrix(ring, rows, sum(m.cols for m in mats),
                  [sum((list(m.data[i]) for m in mats), []) for i in range(rows)], reduced=True)


def vstack(ring, cols, mats):
    for m in mats:
        if m.cols != cols:
            raise ShapeError("vstack column mismatch")
    data = [list(r) for m in mats for r in m.data]
    return Matrix(ring, len(data), cols, data, reduced=True)


def block_matrix(ring, row_sizes, col_sizes, blocks):
    """Assemble from a dict {(i, j): Matrix}; missing blocks are zero."""
    data = [[0] * sum(col_sizes) for _ in range(sum(row_sizes))]
    roff = [sum(row_sizes[:i]) for i in range(len(row_sizes))]
    coff = [sum(col_sizes[:j]) for j in range(len(col_sizes))]
    for (i, j), m in blocks.items():
        if m.shape != (row_sizes[i], col_sizes[j]):
            raise ShapeError(f"block {(i, j)} has shape {m.shape}")
        for a, r in enumerate(m.data):
            row = data[roff[i] + a]
            for b, x in enumerate(r):
                row[coff[j] + b] = x
    return Matrix(ring, sum(row_sizes), sum(col_sizes), data)


# ---------------------------------------------------------------- engines

def _rref(ring, rows, ncols):
    """Row reduce over a field, pivoting only in the first ``ncols`` columns.

    All rows are kept (zero rows last) so that trailing augmented columns
    still carry the row transform.
    """
    A = [list(r) for r in rows]
    red, inv = ring.reduce, ring.inverse
    piv = []
    r = 0
    for c in range(ncols):
        if r == len(A):
            break
        p = next((i for i in range(r, len(A)) if A[i][c]), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        iv = inv(A[r][c])
        if iv != 1:
            A[r] = [red(x * iv) for x in A[r]]
        pr = A[r]
        for i in range(len(A)):
            f = A[i][c]
            if i != r and f:
                A[i] = [red(x - f * y) if y else x for x, y in zip(A[i], pr)]
        piv.append(c)
        r += 1
    return A, piv


def _snf_int(A, m, n):
    """Smith form over Z with transforms: returns (U, Uinv, D, V), U*A*V = D."""
    A = [list(r) for r in A]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    Ui = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def row_add(i, j, q):  # row_i += q row_j
        A[i] = [a + q * b for a, b in zip(A[i], A[j])]
        U[i] = [a + q * b for a, b in zip(U[i], U[j])]
        for r in Ui:
            r[j] -= q * r[i]

    def row_swap(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]
        for r in Ui:
            r[i], r[j] = r[j], r[i]

    def row_neg(i):
        A[i] = [-a for a in A[i]]
        U[i] = [-a for a in U[i]]
        for r in Ui:
            r[i] = -r[i]

    def col_add(j, i, q):  # col_j += q col_i
        for r in A:
            r[j] += q * r[i]
        for r in V:
            r[j] += q * r[i]

    def col_swap(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def smallest(t):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                x = A[i][j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
        return best

    def nearest(a, p):
        # symmetric remainder keeps entries small
        q, r = divmod(a, p)
        return q + 1 if 2 * abs(r) > abs(p) else q

    diag = []
    for t in range(min(m, n)):
        # each pass moves the smallest entry of the block to (t, t), so the
        # pivot strictly decreases until it divides its row and column
        while True:
            best = smallest(t)
            if best is None:
                return U, Ui, diag, V
            _, i0, j0 = best
            if i0 != t:
                row_swap(t, i0)
            if j0 != t:
                col_swap(t, j0)
            p = A[t][t]
            for i in range(t + 1, m):
                if A[i][t]:
                    row_add(i, t, -nearest(A[i][t], p))
            for j in range(t + 1, n):
                if A[t][j]:
                    col_add(j, t, -nearest(A[t][j], p))
            if any(A[i][t] for i in range(t + 1, m)) or any(A[t][j] for j in range(t + 1, n)):
                continue
            bad = next((i for i in range(t + 1, m)
                        if any(x % p for x in A[i][t + 1:])), None)
            if bad is None:
                break
            row_add(t, bad, 1)
        if A[t][t] < 0:
            row_neg(t)
        diag.append(A[t][t])
    return U, Ui, diag, V


class LinearSolver:
    """Factor a matrix once, then solve ``m x = b`` for many right-hand sides.

    Free parameters are always set to zero, so solutions are deterministic.
    """

    def __init__(self, m: Matrix):
        self.ring = ring = m.ring
        self.rows, self.cols = m.shape
        if ring.is_field:
            aug = [list(r) + [int(i == j) for j in range(self.rows)]
                   for i, r in enumerate(m.data)]
            R, self._piv = _rref(ring, aug, self.cols)
            self._T = [r[self.cols:] for r in R]
            self._R = [r[:self.cols] for r in R]
            self.rank = len(self._piv)
        else:
            data = [list(r) for r in m.data]
            ncols = self.cols
            if isinstance(ring, IntegersMod):
                data = [r + [ring.n * (i == j) for j in range(self.rows)]
                        for i, r in enumerate(data)]
                ncols += self.rows
            self._ncols = ncols
            self._U, _, self._d, self._V = _snf_int(data, self.rows, ncols)
            self.rank = len(self._d)

    def solve(self, b):
        if len(b) != self.rows:
            raise ShapeError(f"right-hand side of length {len(b)} for {self.rows} rows")
        ring = self.ring
        red = ring.reduce
        b = [red(x) for x in b]
        if ring.is_field:
            y = [red(sum(t * x for t, x in zip(row, b) if t and x)) for row in self._T]
            if any(y[self.rank:]):
                return None
            x = [red(0)] * self.cols
            for i, c in enumerate(self._piv):
                x[c] = y[i]
            return x
        c = [sum(u * x for u, x in zip(row, b) if u and x) for row in self._U]
        y = [0] * self._ncols
        for i, d in enumerate(self._d):
            if c[i] % d:
                return None
            y[i] = c[i] // d
        if any(c[self.rank:]):
            return None
        return [red(sum(v * w for v, w in zip(self._V[i], y) if w)) for i in range(self.cols)]

    def kernel_vectors(self):
        ring = self.ring
        if ring.is_field:
            pivset = set(self._piv)
            out = []
            for f in range(self.cols):
                if f in pivset:
                    continue
                v = [ring.reduce(0)] * self.cols
                v[f] = ring.reduce(1)
                for i, c in enumerate(self._piv):
                    v[c] = ring.reduce(-self._R[i][f])
                out.append(v)
            return out
        vecs = [[self._V[i][j] for i in range(self.cols)] for j in range(self.rank, self._ncols)]
        if isinstance(ring, IntegersMod):
            rows = howell_rows(ring.n, vecs, self.cols)
            return [list(r) for r in rows]
        return vecs


# ---------------------------------------------------------------- Howell

def _unit_normalizer(a, n):
    """A unit u mod n with u*a = gcd(a, n) mod n."""
    g = gcd(a, n)
    m = n // g
    u0 = pow(a // g, -1, m) if m > 1 else 1
    u = u0
    while gcd(u, n) != 1:
        u += m
    return u % n


def _xgcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def howell_rows(n, rows, ncols):
    """Canonical Howell basis (list of rows) of the row span over Z/n."""
    pending = [[x % n for x in r] for r in rows]
    pending = [r for r in pending if any(r)]
    result = []
    for j in range(ncols):
        pivot = None
        rest = []
        for r in pending:
            if r[j] == 0:
                rest.append(r)
            elif pivot is None:
                pivot = r
            else:
                a, b = pivot[j], r[j]
                g, s, t = _xgcd(a, b)
                newp = [(s * x + t * y) % n for x, y in zip(pivot, r)]
                newr = [((a // g) * y - (b // g) * x) % n for x, y in zip(pivot, r)]
                pivot = newp
                if any(newr):
                    rest.append(newr)
        if pivot is not None:
            u = _unit_normalizer(pivot[j], n)
            pivot = [(u * x) % n for x in pivot]
            p = pivot[j]
            ann = [((n // p) * x) % n for x in pivot]
            if any(ann):
                rest.append(ann)
            result.append((j, pivot))
        pending = rest
    for k in range(len(result)):
        j, row = result[k]
        p = row[j]
        for i in range(k):
            other = result[i][1]
            q = other[j] // p
            if q:
                result[i] = (result[i][0], [(x - q * y) % n for x, y in zip(other, row)])
    return [r for _, r in result]


# ---------------------------------------------------------------- public ops

def smith_normal_form(m: Matrix):
    """Return (U, D, V) with U*m*V = D over Z and d1 | d2 | ... on the diagonal."""
    if m.ring != ZZ:
        raise UnsupportedRing(f"Smith normal form needs Z, got {m.ring}")
    U, _, diag, V = _snf_int(m.data, m.rows, m.cols)
    D = [[0] * m.cols for _ in range(m.rows)]
    for i, d in enumerate(diag):
        D[i][i] = d
    return (Matrix(ZZ, m.rows, m.rows, U), Matrix(ZZ, m.rows, m.cols, D),
            Matrix(ZZ, m.cols, m.cols, V))


def howell_form(m: Matrix) -> Matrix:
    """Canonical Howell form over Z/n, padded with zero rows to m.rows."""
    if not isinstance(m.ring, IntegersMod):
        raise UnsupportedRing(f"Howell form needs Z/n, got {m.ring}")
    rows = howell_rows(m.ring.n, m.data, m.cols)
    rows += [[0] * m.cols for _ in range(m.rows - len(rows))]
    return Matrix(m.ring, len(rows), m.cols, rows)


def solve(m: Matrix, b):
    """A solution of m x = b as a list, or None when none exists."""
    if isinstance(b, Matrix):
        if b.cols != 1:
            raise ShapeError("right-hand side must be a column")
        b = b.column(0)
    if len(b) != m.rows:
        raise ShapeError(f"right-hand side of length {len(b)} for {m.rows} rows")
    return LinearSolver(m).solve(b)


def kernel(m: Matrix) -> Matrix:
    """Matrix whose columns span ker m."""
    vecs = LinearSolver(m).kernel_vectors()
    return Matrix.from_columns(m.ring, vecs, m.cols)


def rank(m: Matrix) -> int:
    if isinstance(m.ring, IntegersMod):
        raise UnsupportedRing("rank is not defined over Z/n; use subquotient")
    return LinearSolver(m).rank


# ---------------------------------------------------------------- subquotients

def _int_lattice_basis(cols, dim):
    """Basis (list of columns) of the Z-lattice spanned by ``cols``."""
    if not cols:
        return []
    A = [[c[i] for c in cols] for i in range(dim)]
    _, Ui, diag, _ = _snf_int(A, dim, len(cols))
    return [[Ui[r][i] * d for r in range(dim)] for i, d in enumerate(diag)]


def _to_matrix_cols(ring, cols, dim):
    return Matrix.from_columns(ring, cols, dim)


class Subquotient:
    """The module (span z) / (span b) inside R^dim, with coordinates.

    ``factors`` are the canonical invariant factors; 0 stands for a free
    cyclic summand R.  ``reps[i]`` is an ambient vector representing the
    i-th cyclic generator and ``coords(v)`` expresses a vector of span z in
    those generators (entry i taken modulo ``factors[i]``).
    """

    def __init__(self, ring, dim, z_cols, b_cols):
        self.ring = ring
        self.dim = dim
        red = ring.reduce
        z_cols = [[red(x) for x in c] for c in z_cols]
        b_cols = [[red(x) for x in c] for c in b_cols]
        for c in z_cols + b_cols:
            if len(c) != dim:
                raise ShapeError("generator of wrong length")
        if ring.is_field:
            self._init_field(z_cols, b_cols)
        else:
            self._init_int(z_cols, b_cols)

    def _init_field(self, z_cols, b_cols):
        ring, dim = self.ring, self.dim
        if z_cols:
            _, piv = _rref(ring, [[c[i] for c in z_cols] for i in range(dim)], len(z_cols))
        else:
            piv = []
        L = [z_cols[j] for j in piv]
        self._Lsolver = LinearSolver(_to_matrix_cols(ring, L, dim))
        r = len(L)
        C = []
        for c in b_cols:
            x = self._Lsolver.solve(c)
            if x is None:
                raise NotASubmodule("a relation is not in the span of the generators")
            C.append(x)
        aug = [[C[j][i] for j in range(len(C))] + [int(i == k) for k in range(r)] for i in range(r)]
        # pivots among columns of [C | I] give a basis adapted to span C
        _, cp = _rref(ring, aug, len(C) + r)
        basis = [([C[j][i] for i in range(r)] if j < len(C) else
                  [int(i == j - len(C)) for i in range(r)]) for j in cp]
        s = sum(1 for j in cp if j < len(C))
        self._Psolver = LinearSolver(_to_matrix_cols(ring, basis, r))
        self._keep = list(range(s, r))
        self.factors = tuple(0 for _ in self._keep)
        self._moduli = [0] * len(self._keep)
        Lm = _to_matrix_cols(ring, L, dim)
        self.reps = [Lm.apply(basis[j]) for j in self._keep]
        self._U = None

    def _init_int(self, z_cols, b_cols):
        ring, dim = self.ring, self.dim
        mod = ring.n if isinstance(ring, IntegersMod) else 0
        if mod:
            extra = [[mod * (i == k) for i in range(dim)] for k in range(dim)]
            z_cols = z_cols + extra
            b_cols = b_cols + extra
        L = _int_lattice_basis(z_cols, dim)
        self._Lsolver = LinearSolver(_to_matrix_cols(ZZ, L, dim))
        r = len(L)
        C = []
        for c in b_cols:
            x = self._Lsolver.solve(c)
            if x is None:
                raise NotASubmodule("a relation is not in the span of the generators")
            C.append(x)
        Cm = [[C[j][i] for j in range(len(C))] for i in range(r)]
        U, Ui, diag, _ = _snf_int(Cm, r, len(C))
        full = list(diag) + [0] * (r - len(diag))
        self._keep = [i for i, d in enumerate(full) if d != 1]
        self._U = U
        self._moduli = [full[i] for i in self._keep]
        self.factors = tuple(0 if (mod and d == mod) else d for d in self._moduli)
        reps = []
        for i in self._keep:
            col = [Ui[k][i] for k in range(r)]
            v = [sum(L[k][a] * col[k] for k in range(r)) for a in range(dim)]
            reps.append([ring.reduce(x) for x in v])
        self.reps = reps
        self._mod = mod

    @property
    def moduli(self):
        """Per-generator modulus for coordinate arithmetic (n for free over Z/n)."""
        return list(self._moduli)

    def contains(self, v):
        """Whether v lies in span z."""
        return self._coords_raw(v) is not None

    def _coords_raw(self, v):
        if len(v) != self.dim:
            raise ShapeError("vector of wrong length")
        if self.ring.is_field:
            c = self._Lsolver.solve(v)
            if c is None:
                return None
            w = self._Psolver.solve(c)
            return [w[j] for j in self._keep]
        c = self._Lsolver.solve([int(x) for x in v])
        if c is None:
            return None
        u = [sum(a * b for a, b in zip(self._U[i], c)) for i in self._keep]
        return [x % m if m else x for x, m in zip(u, self._moduli)]

    def coords(self, v):
        c = self._coords_raw(v)
        if c is None:
            raise NotASubmodule("vector is not in the span of the generators")
        return tuple(self.ring.reduce(x) if self.ring.is_field else x for x in c)

    def is_zero_class(self, v):
        return not any(self.coords(v))

    @property
    def presentation(self):
        return ModulePresentation.from_factors(self.ring, self.factors)

    def is_zero(self):
        return not self.factors

    def __len__(self):
        return len(self.factors)


def subquotient(z: Matrix, b: Matrix) -> Subquotient:
    """(column span of z) / (column span of b)."""
    if z.ring != b.ring:
        raise RingMismatch(f"{z.ring} vs {b.ring}")
    if z.rows != b.rows:
        raise ShapeError("z and b live in different ambient modules")
    return Subquotient(z.ring, z.rows, z.columns(), b.columns())


class ModulePresentation:
    """Generators and relators (columns); compares by invariant factors."""

    def __init__(self, ring, generators, relations: Matrix | None = None):
        if relations is None:
            relations = Matrix.zero(ring, generators, 0)
        if relations.rows != generators:
            raise ShapeError("relations must have one row per generator")
        self.ring = ring
        self.generators = generators
        self.relations = relations
        ident = [[int(i == j) for i in range(generators)] for j in range(generators)]
        self.factors = Subquotient(ring, generators, ident, relations.columns()).factors

    @classmethod
    def from_factors(cls, ring, factors):
        k = len(factors)
        cols = [[f * (i == j) for i in range(k)] for j, f in enumerate(factors) if f]
        return cls(ring, k, Matrix.from_columns(ring, cols, k))

    @property
    def invariant_factors(self):
        return self.factors

    def free_rank(self):
        return sum(1 for f in self.factors if f == 0)

    def is_zero(self):
        return not self.factors

    def order(self):
        """Cardinality, or None when infinite."""
        size = 1
        for f in self.factors:
            if f:
                size *= f
            elif isinstance(self.ring, IntegersMod):
                size *= self.ring.n
            elif isinstance(self.ring, PrimeField):
                size *= self.ring.p
            else:
                return None
        return size

    def __eq__(self, other):
        return (isinstance(other, ModulePresentation) and self.ring == other.ring
                and self.factors == other.factors)

    def __hash__(self):
        return hash((self.ring, self.factors))

    def __repr__(self):
        return f"ModulePresentation({self})"

    def __str__(self):
        return describe_factors(self.ring, self.factors)


def describe_factors(ring, factors):
    if not factors:
        return "0"
    free = sum(1 for f in factors if f == 0)
    parts = [f"Z/{f}" for f in factors if f]
    if free:
        base = str(ring)
        parts.append(base if free == 1 else f"{base}^{free}")
    return " + ".join(parts)


# ---------------------------------------------------------------- maps in coordinates
#
# A finitely generated module is handled as a direct sum of cyclic modules
# R/(m_i), listed by its moduli (0 = free over Z or a field; over Z/n a
# free summand has modulus n).  Maps are integer (or field) matrices on
# these coordinates.

def _coord_lift(ring, M, tgt_mod):
    rows = len(M)
    extra = [[m * (i == k) for i in range(rows)] for k, m in enumerate(tgt_mod) if m]
    cols = [[M[i][j] for i in range(rows)] for j in range(len(M[0]) if M else 0)]
    return Matrix.from_columns(ZZ, [[int(x) for x in c] for c in cols] + extra, rows)


def coord_kernel(ring, M, src_mod, tgt_mod, ncols=None):
    """Generators (source coordinates) of the kernel of a coordinate map."""
    ncols = len(src_mod) if ncols is None else ncols
    if ring.is_field:
        vecs = LinearSolver(Matrix(ring, len(M), ncols, M)).kernel_vectors()
        return [v for v in vecs if any(v)]
    if not M:
        return [[int(i == j) for i in range(ncols)] for j in range(ncols)
                if src_mod[j] != 1]
    big = _coord_lift(ring, M, tgt_mod)
    vecs = LinearSolver(big).kernel_vectors()
    out = []
    for v in vecs:
        w = [x % m if m else x for x, m in zip(v[:ncols], src_mod)]
        if any(w):
            out.append(w)
    return out


def coord_in_image(ring, M, tgt_mod, v):
    """Whether target coordinates v lie in the image of M."""
    if not any(v):
        return True
    ncols = len(M[0]) if M else 0
    if ring.is_field:
        return LinearSolver(Matrix(ring, len(v), ncols, M or [[] for _ in v])).solve(v) is not None
    if not M:
        M = [[] for _ in v]
    return LinearSolver(_coord_lift(ring, M, tgt_mod)).solve([int(x) for x in v]) is not None


def coord_is_zero(v, mod):
    return all((x % m == 0) if m else x == 0 for x, m in zip(v, mod))


def coord_map_is_iso(ring, M, src_mod, tgt_mod):
    """Bijectivity of a coordinate map between cyclic decompositions."""
    for j in range(len(tgt_mod)):
        e = [int(i == j) for i in range(len(tgt_mod))]
        if not coord_in_image(ring, M, tgt_mod, e):
            return False
    return all(coord_is_zero(v, src_mod)
               for v in coord_kernel(ring, M, src_mod, tgt_mod))


def solve_matrix_system(ring, shapes, equations):
    """Solve simultaneous equations sum_k A_k U_k B_k = C in matrix unknowns.

    ``shapes`` maps a key to (rows, cols).  Each equation is
    ``(terms, C)`` with terms ``(A, key, B)``; A or B may be None for the
    identity.  Returns {key: Matrix} or None when the system is infeasible.
    """
    offs, pos = {}, 0
    for key, (r, c) in shapes.items():
        offs[key] = pos
        pos += r * c
    rows, rhs = [], []
    for terms, C in equations:
        p, q = C.rows, C.cols
        block = [[0] * pos for _ in range(p * q)]
        for A, key, B in terms:
            r, c = shapes[key]
            base = offs[key]
            Ad = A.data if A is not None else None
            Bd = B.data if B is not None else None
            for i in range(p):
                arow = Ad[i] if Ad is not None else None
                alist = ([(a, x) for a, x in enumerate(arow) if x] if arow is not None
                         else [(i, 1)])
                for j in range(q):
                    row = block[i * q + j]
                    blist = ([(b, Bd[b][j]) for b in range(c) if Bd[b][j]] if Bd is not None
                             else [(j, 1)])
                    for a, x in alist:
                        for b, y in blist:
                            row[base + a * c + b] += x * y
        rows.extend(block)
        rhs.extend(x for r_ in C.data for x in r_)
    if not rows:
        sol = [0] * pos
    else:
        sol = LinearSolver(Matrix(ring, len(rows), pos, rows)).solve(rhs)
        if sol is None:
            return None
    out = {}
    for key, (r, c) in shapes.items():
        s = offs[key]
        out[key] = Matrix(ring, r, c, [sol[s + a * c: s + (a + 1) * c] for a in range(r)])
    return out
