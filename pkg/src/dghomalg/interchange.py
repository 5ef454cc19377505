"""JSON interchange: complexes, DG algebras, modules, chain maps and split modules.

Ring elements travel as decimal strings ("a/b" over Q).  Degrees used as
object keys are strings; matrices are row lists.  Every object carries an
optional ``type`` field; without it the kind is inferred from the keys.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .complexes import ChainMap, FinComplex, PresentedComplex
from .dg_algebra import DGAlgebra, DGModule
from .linalg import Matrix, parse_element, ring_from_json
from .resolutions import SplitModule, validate_split


class SchemaError(ValueError):
    """Malformed input, located by a JSON path like ``$.diff.2[0][1]``."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class InvariantError(ValueError):
    """Well-formed input whose object fails its validator."""

    def __init__(self, kind, violations):
        self.kind = kind
        self.violations = list(violations)
        super().__init__(f"{kind} invalid: " + "; ".join(map(str, self.violations[:5])))


KINDS = ("complex", "algebra", "module", "map", "split")


# ---------------------------------------------------------------- writing

def _el(x):
    return str(x)


def _rows(m: Matrix):
    return [[_el(x) for x in row] for row in m.data]


def _sparse(v):
    return [[k, _el(x)] for k, x in enumerate(v) if x]


def _table(tab):
    return [[*key, _sparse(v)] for key, v in sorted(tab.items()) if any(v)]


def complex_to_json(C) -> dict:
    out = {"type": "complex", "ring": C.ring.to_json(), "lo": C.lo, "hi": C.hi,
           "ranks": {str(n): C.rank(n) for n in C.degrees() if C.rank(n)},
           "diff": {str(n): _rows(C.d(n)) for n in C.degrees()
                    if C.rank(n) and C.rank(n - 1) and not C.d(n).is_zero()}}
    if C.is_presented:
        rel = {str(n): [[_el(x) for x in v] for v in C.relations(n)]
               for n in C.degrees() if C.relations(n)}
        out["relations"] = rel
    return out


def algebra_to_json(A: DGAlgebra) -> dict:
    out = complex_to_json(A.carrier)
    out.update(type="algebra", name=A.name, unit=A.unit, mul=_table(A.mul))
    if A.cup1 is not None:
        out["cup1"] = _table(A.cup1)
    if A.aug is not None:
        out["aug"] = [_el(x) for x in A.aug]
    return out


def module_to_json(M: DGModule) -> dict:
    out = complex_to_json(M.carrier)
    out.update(type="module", name=M.name, side=M.side,
               algebra=algebra_to_json(M.algebra), action=_table(M.action))
    return out


def map_to_json(f: ChainMap) -> dict:
    return {"type": "map", "source": complex_to_json(f.source),
            "target": complex_to_json(f.target),
            "mats": {str(n): _rows(f.at(n)) for n in f.degrees()
                     if f.source.rank(n) and f.target.rank(n) and not f.at(n).is_zero()}}


def split_to_json(X: SplitModule) -> dict:
    comps = {}
    for n, bs in sorted(X.bidegrees.items()):
        for g, (p, _) in enumerate(bs):
            for r in range(p + 2):
                v = X.component(r, n, g)
                if any(v):
                    comps.setdefault(str(r), []).append([n, g, _sparse(v)])
    return {"type": "split", "name": X.name, "algebra": algebra_to_json(X.algebra),
            "barx": {f"{p},{q}": k for (p, q), k in sorted(X.barx().items())},
            "gens": {str(n): [list(b) for b in bs] for n, bs in sorted(X.bidegrees.items())},
            "comps": comps}


def to_json(obj) -> dict:
    if isinstance(obj, SplitModule):
        return split_to_json(obj)
    if isinstance(obj, DGModule):
        return module_to_json(obj)
    if isinstance(obj, DGAlgebra):
        return algebra_to_json(obj)
    if isinstance(obj, ChainMap):
        return map_to_json(obj)
    if isinstance(obj, FinComplex):
        return complex_to_json(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical(obj) -> str:
    """Sorted-key compact JSON: the byte-stable form."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def digest(obj) -> str:
    return hashlib.sha256(canonical(obj).encode()).hexdigest()[:16]


# ---------------------------------------------------------------- reading

def _need(obj, key, path, kind=None):
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    if key not in obj:
        raise SchemaError(f"{path}.{key}", "missing field")
    v = obj[key]
    if kind is not None and not isinstance(v, kind):
        raise SchemaError(f"{path}.{key}", f"expected {kind.__name__}")
    return v


def _int(x, path):
    if isinstance(x, bool) or not isinstance(x, int):
        if isinstance(x, str) and x.lstrip("-").isdigit():
            return int(x)
        raise SchemaError(path, f"expected an integer, got {x!r}")
    return x


def _element(ring, x, path):
    if not isinstance(x, (str, int)) or isinstance(x, bool):
        raise SchemaError(path, "ring elements are decimal strings")
    try:
        return parse_element(ring, x)
    except (ValueError, ZeroDivisionError) as e:
        raise SchemaError(path, f"bad ring element {x!r}: {e}") from None


def _ring(obj, path):
    r = _need(obj, "ring", path, dict)
    try:
        return ring_from_json(r)
    except (ValueError, KeyError, TypeError) as e:
        raise SchemaError(f"{path}.ring", str(e)) from None


def _matrix(ring, rows, nrows, ncols, path):
    if not isinstance(rows, list) or len(rows) != nrows:
        raise SchemaError(path, f"expected {nrows} rows")
    data = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != ncols:
            raise SchemaError(f"{path}[{i}]", f"expected {ncols} entries")
        data.append([_element(ring, x, f"{path}[{i}][{j}]") for j, x in enumerate(row)])
    return Matrix(ring, nrows, ncols, data)


def _degree_map(obj, key, path):
    raw = obj.get(key, {})
    if not isinstance(raw, dict):
        raise SchemaError(f"{path}.{key}", "expected an object keyed by degree")
    return {_int(k, f"{path}.{key}.{k}"): v for k, v in raw.items()}


def parse_complex(obj, path="$", ring=None):
    ring = ring or _ring(obj, path)
    ranks = {n: _int(r, f"{path}.ranks.{n}") for n, r in _degree_map(obj, "ranks", path).items()}
    if any(r < 0 for r in ranks.values()):
        raise SchemaError(f"{path}.ranks", "negative rank")
    lo = _int(obj["lo"], f"{path}.lo") if "lo" in obj else None
    hi = _int(obj["hi"], f"{path}.hi") if "hi" in obj else None
    rank = lambda n: ranks.get(n, 0)
    diff = {}
    for n, rows in _degree_map(obj, "diff", path).items():
        diff[n] = _matrix(ring, rows, rank(n - 1), rank(n), f"{path}.diff.{n}")
    try:
        if "relations" in obj:
            rel = {}
            for n, vs in _degree_map(obj, "relations", path).items():
                rel[n] = [[_element(ring, x, f"{path}.relations.{n}[{k}][{i}]")
                           for i, x in enumerate(v)] for k, v in enumerate(vs)]
            C = PresentedComplex(ring, ranks, diff, rel, lo=lo, hi=hi, check=False)
        else:
            C = FinComplex(ring, ranks, diff, lo=lo, hi=hi, check=False)
    except ValueError as e:
        raise SchemaError(path, str(e)) from None
    bad = C.dd_violations()
    if bad:
        raise InvariantError("complex", [f"d o d != 0 in degree {n}" for n in bad])
    return C


def _sparse_table(ring, entries, path, target_rank):
    if not isinstance(entries, list):
        raise SchemaError(path, "expected a list of sparse entries")
    out = {}
    for e, ent in enumerate(entries):
        p = f"{path}[{e}]"
        if not isinstance(ent, list) or len(ent) != 5:
            raise SchemaError(p, "entries are [i, a, j, b, [[k, coef], ...]]")
        i, a, j, b = (_int(x, f"{p}[{t}]") for t, x in enumerate(ent[:4]))
        size = target_rank(i + j)
        v = [0] * size
        for t, kc in enumerate(ent[4]):
            if not isinstance(kc, list) or len(kc) != 2:
                raise SchemaError(f"{p}[4][{t}]", "expected [index, coefficient]")
            k = _int(kc[0], f"{p}[4][{t}][0]")
            if not 0 <= k < size:
                raise SchemaError(f"{p}[4][{t}][0]", f"index {k} outside rank {size} "
                                  f"in degree {i + j}")
            v[k] = ring.reduce(v[k] + _element(ring, kc[1], f"{p}[4][{t}][1]"))
        out[(i, a, j, b)] = v
    return out


def parse_algebra(obj, path="$", check=True):
    ring = _ring(obj, path)
    C = parse_complex(obj, path, ring)
    unit = _int(obj.get("unit", 0), f"{path}.unit")
    if not 0 <= unit < C.rank(0):
        raise SchemaError(f"{path}.unit", "unit index outside degree 0")
    mul = _sparse_table(ring, obj.get("mul", []), f"{path}.mul", C.rank)
    for (i, a, j, b) in mul:
        if not (0 <= a < C.rank(i) and 0 <= b < C.rank(j)):
            raise SchemaError(f"{path}.mul", f"basis pair ({i},{a}),({j},{b}) out of range")
    cup1 = None
    if "cup1" in obj:
        cup1 = _sparse_table(ring, obj["cup1"], f"{path}.cup1", lambda n: C.rank(n + 1))
    aug = None
    if "aug" in obj:
        raw = _need(obj, "aug", path, list)
        if len(raw) != C.rank(0):
            raise SchemaError(f"{path}.aug", f"expected {C.rank(0)} entries")
        aug = [_element(ring, x, f"{path}.aug[{k}]") for k, x in enumerate(raw)]
    A = DGAlgebra(C, unit, mul, cup1=cup1, aug=aug, name=obj.get("name"))
    if check:
        bad = A.validate()
        if bad:
            raise InvariantError("algebra", bad)
    return A


def parse_module(obj, path="$", base=None, check=True):
    A = _algebra_ref(obj, path, base)
    C = parse_complex(obj, path, A.ring)
    side = obj.get("side", "left")
    if side not in ("left", "right"):
        raise SchemaError(f"{path}.side", "expected 'left' or 'right'")
    action = _sparse_table(A.ring, obj.get("action", []), f"{path}.action", C.rank)
    for (i, a, j, m) in action:
        if not (0 <= a < A.rank(i) and 0 <= m < C.rank(j)):
            raise SchemaError(f"{path}.action", f"pair ({i},{a}),({j},{m}) out of range")
    M = DGModule(A, C, action, side, name=obj.get("name"))
    if check:
        bad = M.validate()
        if bad:
            raise InvariantError("module", bad)
    return M


def parse_map(obj, path="$", base=None):
    S = _complex_ref(obj, "source", path, base)
    T = _complex_ref(obj, "target", path, base)
    if S.ring != T.ring:
        raise SchemaError(path, f"source over {S.ring}, target over {T.ring}")
    mats = {}
    for n, rows in _degree_map(obj, "mats", path).items():
        mats[n] = _matrix(S.ring, rows, T.rank(n), S.rank(n), f"{path}.mats.{n}")
    f = ChainMap(S, T, mats, check=False)
    bad = f.commutation_violations()
    if bad:
        raise InvariantError("map", [f"d f != f d in degree {n}" for n in bad])
    return f


def parse_split(obj, path="$", base=None, check=True):
    A = _algebra_ref(obj, path, base)
    barx = {}
    for key, k in _need(obj, "barx", path, dict).items():
        try:
            p, q = (int(s) for s in key.split(","))
        except ValueError:
            raise SchemaError(f"{path}.barx.{key}", "keys are 'p,q'") from None
        barx[(p, q)] = _int(k, f"{path}.barx.{key}")
    if "gens" in obj:
        gens = {n: [tuple(_int(x, f"{path}.gens.{n}") for x in b) for b in bs]
                for n, bs in _degree_map(obj, "gens", path).items()}
    else:
        gens = {}
        for (p, q), k in sorted(barx.items()):
            gens.setdefault(p + q, []).extend([(p, q)] * k)
    counted = {}
    for bs in gens.values():
        for b in bs:
            counted[b] = counted.get(b, 0) + 1
    if counted != {b: k for b, k in barx.items() if k}:
        raise SchemaError(f"{path}.gens", "generator list disagrees with barx")
    probe = SplitModule(A, gens, {}, check=False)
    diff = {n: [[0] * probe.rank(n - 1) for _ in bs] for n, bs in gens.items()}
    filt = {n: probe.basis_filtration(n - 1) for n in gens}
    for r, entries in _degree_map(obj, "comps", path).items():
        for e, ent in enumerate(entries):
            p = f"{path}.comps.{r}[{e}]"
            if not isinstance(ent, list) or len(ent) != 3:
                raise SchemaError(p, "entries are [n, g, [[index, coef], ...]]")
            n, g = _int(ent[0], f"{p}[0]"), _int(ent[1], f"{p}[1]")
            if n not in gens or not 0 <= g < len(gens[n]):
                raise SchemaError(p, f"no generator {g} in total degree {n}")
            pf = gens[n][g][0]
            for t, kc in enumerate(ent[2]):
                k = _int(kc[0], f"{p}[2][{t}][0]")
                if not 0 <= k < len(filt[n]):
                    raise SchemaError(f"{p}[2][{t}][0]", "index out of range")
                if filt[n][k] != pf - r:
                    raise SchemaError(f"{p}[2][{t}]", f"basis element in filtration "
                                      f"{filt[n][k]}, expected {pf - r}")
                diff[n][g][k] = A.ring.reduce(
                    diff[n][g][k] + _element(A.ring, kc[1], f"{p}[2][{t}][1]"))
    X = SplitModule(A, gens, diff, name=obj.get("name"), check=False)
    if check:
        bad = [f"d o d != 0 in degree {n}" for n in X.carrier.dd_violations()]
        bad += [f"{m} at {rpq}" for rpq, m in validate_split(X)]
        if bad:
            raise InvariantError("split", bad)
    return X


def _load_ref(ref, path, base):
    if isinstance(ref, str):
        p = Path(base or ".") / ref
        try:
            return json.loads(p.read_text()), p.parent
        except OSError as e:
            raise SchemaError(path, f"cannot read {p}: {e.strerror}") from None
        except json.JSONDecodeError as e:
            raise SchemaError(path, f"{p}: invalid JSON ({e.msg} at line {e.lineno})") from None
    return ref, base


def _algebra_ref(obj, path, base):
    ref, _ = _load_ref(_need(obj, "algebra", path), f"{path}.algebra", base)
    return parse_algebra(ref, f"{path}.algebra")


def _complex_ref(obj, key, path, base):
    ref, _ = _load_ref(_need(obj, key, path), f"{path}.{key}", base)
    return parse_complex(ref, f"{path}.{key}")


def infer_kind(obj) -> str:
    if not isinstance(obj, dict):
        raise SchemaError("$", "top level must be an object")
    kind = obj.get("type")
    if kind is not None:
        if kind not in KINDS:
            raise SchemaError("$.type", f"unknown type {kind!r}; expected one of {KINDS}")
        return kind
    if "barx" in obj:
        return "split"
    if "mats" in obj:
        return "map"
    if "action" in obj:
        return "module"
    if "mul" in obj:
        return "algebra"
    return "complex"


def parse_object(obj, base=None):
    kind = infer_kind(obj)
    if kind == "complex":
        return parse_complex(obj)
    if kind == "algebra":
        return parse_algebra(obj)
    if kind == "module":
        return parse_module(obj, base=base)
    if kind == "map":
        return parse_map(obj, base=base)
    return parse_split(obj, base=base)


def parse_and_validate(path):
    """Read a JSON file into a validated FinComplex, DGAlgebra, DGModule, ChainMap or SplitModule."""
    p = Path(path)
    try:
        obj = json.loads(p.read_text())
    except OSError as e:
        raise SchemaError("$", f"cannot read {p}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise SchemaError("$", f"invalid JSON ({e.msg} at line {e.lineno})") from None
    return parse_object(obj, base=p.parent)
