"""Command-line front end: ``dghomalg <command> ...``.

Exit codes: 0 success, 1 a ``check`` predicate is false, 2 input error,
3 the requested window exceeds what the data supports.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import interchange as io
from .complexes import (ChainMap, FinComplex, contracting_homotopy, homology_at,
                        is_h_equivalence, is_quasi_iso)
from .dg_algebra import (DGAlgebra, DGModule, MissingStructure, NoCup1, NotFree,
                         check_relatively_projective, trivial_module)
from .linalg import describe_factors
from .model import (LiftSquare, PreconditionFailed, factor_cocylinder, factor_cylinder,
                    factor_onestep_J, is_q_fibration, is_r_fibration, verify_lift, solve_lift)
from .resolutions import (SplitModule, WindowTooSmall, check_filtration, classify,
                          validate_split)
from .tor import (METHODS, Undefined, edge_and_suspension, emss, ext, is_kunneth, resolve,
                  tor, triple_massey)

PREDICATES = ("q-fibration", "r-fibration", "contractible", "quasi-iso", "h-equivalence",
              "split-valid", "kunneth", "rel-projective")
INPUT_ERRORS = (io.SchemaError, io.InvariantError, MissingStructure, NoCup1, NotFree,
                PreconditionFailed, ValueError, KeyError, TypeError)


class CheckFailed(Exception):
    """A check predicate came out false; carries the finished report."""

    def __init__(self, report):
        super().__init__(report.verdicts)
        self.report = report


@dataclass
class Report:
    command: str
    echo: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    tables: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)
    window: list | None = None
    violations: list = field(default_factory=list)

    def add_table(self, title, columns, rows, empty="0 in all degrees of window"):
        self.tables.append({"title": title, "columns": list(columns),
                            "rows": [[str(c) for c in r] for r in rows], "empty": empty})

    def as_json(self):
        return {"command": self.command, "echo": self.echo, "verdicts": self.verdicts,
                "tables": [{k: t[k] for k in ("title", "columns", "rows")} for t in self.tables],
                "witnesses": self.witnesses, "window": self.window,
                "violations": self.violations}


# ---------------------------------------------------------------- emission

def _render_table(t):
    if not t["rows"]:
        return [f"{t['title']}: {t['empty']}"]
    cols = t["columns"]
    widths = [max(len(c), *(len(r[i]) for r in t["rows"])) for i, c in enumerate(cols)]
    line = lambda cells: "  ".join(c.rjust(w) for c, w in zip(cells, widths)).rstrip()
    return [f"{t['title']}:", line(cols), line(["-" * w for w in widths])] + \
           [line(r) for r in t["rows"]]


def emit(report: Report, fmt="table") -> bytes:
    if fmt == "json":
        return (io.canonical(report.as_json()) + "\n").encode()
    out = [f"command: {report.command}"]
    for k, v in sorted(report.echo.items()):
        out.append(f"{k}: {v}")
    if report.window is not None:
        out.append(f"window: {report.window[0]}..{report.window[1]}")
    for k, v in sorted(report.verdicts.items()):
        out.append(f"{k}: {v}")
    for t in report.tables:
        out.append("")
        out.extend(_render_table(t))
    if report.witnesses:
        out.append("")
        out.append("witness digests:")
        w = max(map(len, report.witnesses))
        out.extend(f"  {k.ljust(w)}  {v}" for k, v in sorted(report.witnesses.items()))
    if report.violations:
        out.append("")
        out.append("violations:")
        out.extend(f"  {v}" for v in report.violations)
    return ("\n".join(out) + "\n").encode()


# ---------------------------------------------------------------- helpers

def _load(path, kinds, check=True):
    """Parse a file and insist on one of the given object types."""
    if check:
        obj = io.parse_and_validate(path)
    else:
        import json
        p = Path(path)
        try:
            raw = json.loads(p.read_text())
        except OSError as e:
            raise io.SchemaError("$", f"cannot read {p}: {e.strerror}") from None
        if io.infer_kind(raw) != "split":
            raise io.SchemaError("$", "expected a split module")
        obj = io.parse_split(raw, base=p.parent, check=False)
    if not isinstance(obj, kinds):
        names = " or ".join(k.__name__ for k in kinds)
        raise io.SchemaError("$", f"{path}: expected {names}, got {type(obj).__name__}")
    return obj


def _left_module(obj):
    if isinstance(obj, DGAlgebra):
        return trivial_module(obj)
    if obj.side != "left":
        raise io.SchemaError("$.side", "a left module is required here")
    return obj


def _right_module(path, A):
    if path is None:
        return trivial_module(A, "right")
    N = _load(path, (DGModule,))
    if N.side != "right":
        raise io.SchemaError("$.side", f"{path}: a right module is required here")
    if io.canonical(io.to_json(N.algebra)) != io.canonical(io.to_json(A)):
        raise io.SchemaError("$.algebra", f"{path}: module is over a different algebra")
    return N


def _vector(text, what):
    """``DEG:c0,c1,...`` to (degree, coefficient list)."""
    try:
        deg, coeffs = text.split(":", 1)
        return int(deg), [int(c) for c in coeffs.split(",") if c.strip()]
    except ValueError:
        raise io.SchemaError(f"--{what}", f"expected DEG:c0,c1,..., got {text!r}") from None


def _groups_table(report, title, groups, lo, hi, ring):
    rows = [(n, describe_factors(ring, groups(n))) for n in range(lo, hi + 1) if groups(n)]
    report.add_table(title, ("degree", "group"), rows)


def _mats_digest(mats):
    return io.digest({str(n): [[str(x) for x in row] for row in m.data]
                      for n, m in sorted(mats.items())})


def _homotopy_digest(h):
    return _mats_digest({n: h.at(n) for n in h.source.degrees()})


def _method_kw(args, A):
    kw = {}
    if args.method == "koszul" or getattr(args, "kind", None) == "koszul":
        if not args.cycle:
            raise MissingStructure("the Koszul route needs --cycle DEG:coeffs for each generator")
        kw["cycles"] = [_vector(c, "cycle") for c in args.cycle]
        kw["algebra_top"] = A.hi
    return kw


# ---------------------------------------------------------------- commands

def cmd_homology(args):
    obj = _load(args.input, (FinComplex, DGAlgebra, DGModule))
    C = obj if isinstance(obj, FinComplex) else obj.carrier
    lo = C.lo if args.lo is None else args.lo
    hi = C.hi if args.hi is None else args.hi
    r = Report("homology", {"input": args.input}, window=[lo, hi])
    _groups_table(r, "H", lambda n: homology_at(C, n).factors, lo, hi, C.ring)
    return r


def _first_bad_degree(f, ok):
    for n in f.degrees():
        if not ok(n):
            return n
    return None


def cmd_check(args):
    pred = args.predicate
    r = Report("check", {"input": args.input, "predicate": pred})
    holds = True
    if pred in ("q-fibration", "r-fibration", "quasi-iso", "h-equivalence"):
        f = _load(args.input, (ChainMap,))
        if pred == "q-fibration":
            holds = is_q_fibration(f)
            if not holds:
                r.verdicts["degree"] = _first_bad_degree(
                    f, lambda n: is_q_fibration(ChainMap(
                        FinComplex(f.ring, {n: f.source.rank(n)}, check=False),
                        FinComplex(f.ring, {n: f.target.rank(n)}, check=False),
                        {n: f.at(n)}, check=False)))
        elif pred == "r-fibration":
            v = is_r_fibration(f)
            holds = bool(v)
            if holds:
                r.witnesses["sections"] = _mats_digest(v.witness)
            else:
                r.verdicts["degree"] = v.degree
        elif pred == "quasi-iso":
            holds = is_quasi_iso(f)
            if not holds:
                r.verdicts["degree"] = _first_bad_degree(f, lambda n: is_quasi_iso(f, [n]))
        else:
            v = is_h_equivalence(f, args.interior)
            holds = bool(v)
            if holds:
                r.witnesses["homotopy"] = _homotopy_digest(v.homotopy)
            else:
                r.verdicts["degree"] = v.degree
                r.verdicts["reason"] = v.reason
    elif pred == "contractible":
        obj = _load(args.input, (FinComplex, DGAlgebra, DGModule))
        C = obj if isinstance(obj, FinComplex) else obj.carrier
        v = contracting_homotopy(C, args.interior)
        holds = bool(v)
        if holds:
            r.witnesses["homotopy"] = _homotopy_digest(v.homotopy)
        else:
            r.verdicts["certificate"] = "NotContractible"
            r.verdicts["degree"] = v.degree
            r.verdicts["reason"] = v.reason
    elif pred == "split-valid":
        X = _load(args.input, (SplitModule,), check=False)
        bad = validate_split(X) + [((None,), f"d o d != 0 in degree {n}")
                                   for n in X.carrier.dd_violations()]
        holds = not bad
        r.violations = [f"{m} at {k}" for k, m in bad]
        r.verdicts["classification"] = classify(X)
        r.verdicts["filtration"] = check_filtration(X)
    elif pred == "kunneth":
        X = _load(args.input, (SplitModule,))
        v = is_kunneth(X)
        holds = bool(v)
        r.verdicts["label"] = v.label
        if not holds:
            r.verdicts["degree"] = v.degree
            r.verdicts["witness"] = str(v.witness)
    else:
        M = _load(args.input, (DGModule,))
        v = check_relatively_projective(M)
        holds = type(v).__name__ == "Projective"
        r.verdicts["result"] = type(v).__name__
        if not holds:
            r.verdicts["reason"] = v.reason
    r.verdicts["holds"] = holds
    if not holds:
        raise CheckFailed(r)
    return r


def cmd_factor(args):
    f = _load(args.input, (ChainMap,))
    fac = {"cylinder": factor_cylinder, "cocylinder": factor_cocylinder,
           "onestep": factor_onestep_J}[args.mode](f)
    r = Report("factor", {"input": args.input, "mode": args.mode})
    mid = fac.middle
    r.add_table("middle object", ("degree", "rank"),
                [(n, mid.rank(n)) for n in mid.degrees() if mid.rank(n)])
    r.witnesses["left"] = _mats_digest({n: fac.left.at(n) for n in mid.degrees()})
    r.witnesses["right"] = _mats_digest({n: fac.right.at(n) for n in mid.degrees()})
    if fac.left_retraction:
        r.witnesses["left_retraction"] = _mats_digest(fac.left_retraction)
    if fac.right_section:
        r.witnesses["right_section"] = _mats_digest(fac.right_section)
    if fac.homotopy is not None:
        r.witnesses["homotopy"] = _homotopy_digest(fac.homotopy)
    r.violations = fac.verify()
    r.verdicts["recomposes"] = not r.violations
    return r


def cmd_lift(args):
    maps = [_load(p, (ChainMap,)) for p in (args.i, args.p, args.top, args.bottom)]
    sq = LiftSquare(*maps)
    r = Report("lift", {"i": args.i, "p": args.p, "top": args.top, "bottom": args.bottom,
                        "structure": args.structure, "acyclic": args.acyclic})
    lam = solve_lift(sq, args.structure, args.acyclic)
    if lam is None:
        r.verdicts["lift"] = "none"
        r.violations.append("no lift found although the hypotheses hold")
        return r
    r.verdicts["lift"] = "found"
    r.witnesses["lift"] = _mats_digest({n: lam.at(n) for n in lam.degrees()})
    r.violations = verify_lift(sq, lam)
    return r


def cmd_resolve(args):
    obj = _load(args.input, (DGAlgebra, DGModule))
    M = _left_module(obj)
    args.method = args.kind
    res = resolve(M, args.kind, top=args.through, pmax=args.pmax,
                  **_method_kw(args, M.algebra))
    X = res.X
    r = Report("resolve", {"input": args.input, "kind": args.kind, "through": args.through},
               window=[X.carrier.lo, res.top])
    r.add_table("generators", ("p", "q", "rank"),
                [(p, q, k) for (p, q), k in sorted(X.barx().items())],
                empty="none in window")
    r.verdicts["classification"] = classify(X)
    r.verdicts["filtration"] = check_filtration(res)
    r.verdicts["quasi_iso"] = res.is_quasi_iso()
    r.violations = [f"{m} at {k}" for k, m in validate_split(X)]
    split = io.to_json(X)
    r.witnesses["split_module"] = io.digest(split)
    r.witnesses["alpha"] = _mats_digest({n: res.alpha.at(n) for n in X.degrees()})
    if args.out:
        Path(args.out).write_text(io.canonical(split) + "\n")
    return r


def cmd_tor(args):
    obj = _load(args.input, (DGAlgebra, DGModule))
    M = _left_module(obj)
    N = _right_module(args.right, M.algebra)
    T = tor(N, M, args.method, top=args.through, pmax=args.pmax,
            **_method_kw(args, M.algebra))
    valid = T.resolution.top + N.carrier.lo
    if valid < args.through:
        raise WindowTooSmall(f"the {args.method} resolution is valid through degree {valid} only")
    r = Report("tor", {"input": args.input, "right": args.right or "R",
                       "method": args.method, "through": args.through},
               window=[T.window[0], args.through])
    _groups_table(r, "Tor", T.factors, T.window[0], args.through, M.ring)
    return r


def cmd_ext(args):
    obj = _load(args.input, (DGAlgebra, DGModule))
    M = _left_module(obj)
    N = M if args.target is None and isinstance(obj, DGAlgebra) else (
        _left_module(_load(args.target, (DGModule,))) if args.target else trivial_module(M.algebra))
    E = ext(M, N, args.method, top=args.through, pmax=args.pmax,
            **_method_kw(args, M.algebra))
    lo, hi = E.window
    if hi < args.through:
        raise WindowTooSmall(f"the {args.method} resolution supports Ext through {hi} only")
    hi = args.through
    r = Report("ext", {"input": args.input, "target": args.target or "R",
                       "method": args.method, "through": args.through}, window=[lo, hi])
    _groups_table(r, "Ext", E.factors, lo, hi, M.ring)
    return r


def cmd_emss(args):
    obj = _load(args.input, (DGAlgebra, DGModule))
    M = _left_module(obj)
    N = _right_module(args.right, M.algebra)
    res = resolve(M, args.method, top=args.through, pmax=args.pmax,
                  **_method_kw(args, M.algebra))
    rep = emss(N, res, rmax=args.pages, top=args.through)
    r = Report("emss", {"input": args.input, "right": args.right or "R",
                        "method": args.method, "pages": args.pages, "through": args.through},
               window=[rep.tor_table.window[0], rep.window])
    ring = M.ring
    for page in rep.pages[2:]:
        rows = [(p, q, describe_factors(ring, page.factors(p, q)))
                for (p, q) in sorted(page.modules) if page.factors(p, q) and p + q <= rep.window]
        r.add_table(f"E{page.r}", ("p", "q", "group"), rows, empty="0 in the window")
    rows = [(p, q, describe_factors(ring, rep.einf.factors(p, q)))
            for (p, q) in sorted(rep.einf.modules)
            if rep.einf.factors(p, q) and p + q <= rep.window]
    r.add_table("Einf", ("p", "q", "group"), rows, empty="0 in the window")
    r.verdicts["e2_matches_classical"] = not rep.e2_mismatches
    r.verdicts["einf_matches_tor"] = not rep.total_mismatches
    r.verdicts["e2_is_einf"] = rep.e2_is_einf
    r.violations = [f"E2 differs from classical Tor at {k}" for k in rep.e2_mismatches] + \
                   [f"E-infinity total differs from Tor in degree {n}"
                    for n in rep.total_mismatches]
    return r


def cmd_massey(args):
    A = _load(args.input, (DGAlgebra,))
    x, y, z = (_vector(v, w) for v, w in ((args.x, "x"), (args.y, "y"), (args.z, "z")))
    for name, (d, v) in zip("xyz", (x, y, z)):
        if len(v) != A.rank(d):
            raise io.SchemaError(f"--{name}", f"expected {A.rank(d)} coefficients in degree {d}")
    m = triple_massey(A, x, y, z)
    r = Report("massey", {"input": args.input, "x": args.x, "y": args.y, "z": args.z})
    if isinstance(m, Undefined):
        r.verdicts["defined"] = False
        r.verdicts["reason"] = m.reason
        return r
    r.verdicts.update(defined=True, degree=m.degree, contains_zero=m.contains_zero,
                      representative=",".join(map(str, m.representative)),
                      coset=",".join(map(str, m.coset_coords(m.representative))))
    r.add_table("indeterminacy generators", ("k", "vector"),
                [(k, ",".join(map(str, w))) for k, w in enumerate(m.indeterminacy)],
                empty="none")
    return r


def cmd_edge(args):
    A = _load(args.input, (DGAlgebra,))
    M = _left_module(_load(args.module, (DGModule,))) if args.module else None
    rep = edge_and_suspension(A, M, top=args.through)
    r = Report("edge", {"input": args.input, "module": args.module or "R",
                        "through": args.through})
    vec = lambda vs: "; ".join(",".join(map(str, v)) for v in vs) or "0"
    r.add_table("pi: H(M) -> Tor(R, M)", ("degree", "kernel"),
                [(n, vec(rep.pi_kernel[n])) for n in sorted(rep.pi)], empty="no classes")
    r.add_table("sigma: IH(A) -> Tor(R, R)", ("degree", "kernel", "decomposables"),
                [(n, vec(rep.sigma_kernel[n]), vec(rep.decomposables.get(n, [])))
                 for n in sorted(rep.sigma)], empty="no classes")
    return r


COMMANDS = {"homology": cmd_homology, "check": cmd_check, "factor": cmd_factor,
            "lift": cmd_lift, "resolve": cmd_resolve, "tor": cmd_tor, "ext": cmd_ext,
            "emss": cmd_emss, "massey": cmd_massey, "edge": cmd_edge}


# ---------------------------------------------------------------- argument parsing

def build_parser():
    ap = argparse.ArgumentParser(prog="dghomalg",
                                 description="Exact homological algebra over DG algebras.")
    ap.add_argument("--format", choices=("table", "json"), default="table")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_, inp=True):
        p = sub.add_parser(name, help=help_)
        if inp:
            p.add_argument("input")
        p.add_argument("--format", choices=("table", "json"), default=argparse.SUPPRESS)
        return p

    def method_args(p, default):
        p.add_argument("--method", choices=METHODS, default=default)
        p.add_argument("--through", type=int, default=6)
        p.add_argument("--pmax", type=int)
        p.add_argument("--cycle", action="append", default=[],
                       help="polynomial generator DEG:c0,c1,... (Koszul route)")

    p = add("homology", "homology of a complex, algebra or module")
    p.add_argument("--lo", type=int)
    p.add_argument("--hi", type=int)

    p = add("check", "evaluate a predicate")
    p.add_argument("--predicate", choices=PREDICATES, required=True)
    p.add_argument("--interior", type=int, nargs=2, metavar=("LO", "HI"))

    p = add("factor", "factor a chain map")
    p.add_argument("--mode", choices=("cylinder", "cocylinder", "onestep"), required=True)

    p = add("lift", "solve a lifting square", inp=False)
    for k in ("i", "p", "top", "bottom"):
        p.add_argument(f"--{k}", required=True)
    p.add_argument("--structure", choices=("q", "r", "h"), default="q")
    p.add_argument("--acyclic", choices=("i", "p"), default="p")

    p = add("resolve", "build a split resolution")
    p.add_argument("--kind", choices=METHODS, required=True)
    p.add_argument("--through", type=int, default=6)
    p.add_argument("--pmax", type=int)
    p.add_argument("--cycle", action="append", default=[])
    p.add_argument("--out")

    p = add("tor", "Tor over a DG algebra")
    method_args(p, "moore")
    p.add_argument("--right")

    p = add("ext", "Ext over a DG algebra")
    method_args(p, "moore")
    p.add_argument("--target")

    p = add("emss", "Eilenberg-Moore spectral sequence")
    method_args(p, "bar")
    p.add_argument("--pages", type=int, default=3)
    p.add_argument("--right")

    p = add("massey", "triple Massey product")
    for k in ("x", "y", "z"):
        p.add_argument(f"--{k}", required=True, help="cycle DEG:c0,c1,...")

    p = add("edge", "edge and suspension maps")
    p.add_argument("--module")
    p.add_argument("--through", type=int, default=6)
    return ap


def run(argv):
    """Parse arguments, run the command, and return (report or None, exit code, message)."""
    args = build_parser().parse_args(argv)
    try:
        report = COMMANDS[args.command](args)
    except CheckFailed as e:
        return e.report, 1, ""
    except WindowTooSmall as e:
        return None, 3, f"window too small: {e}"
    except INPUT_ERRORS as e:
        return None, 2, f"input error: {e}"
    return report, 0, ""


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        report, code, msg = run(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    fmt = build_parser().parse_args(argv).format
    if report is not None:
        sys.stdout.buffer.write(emit(report, fmt))
        sys.stdout.flush()
    if msg:
        print(msg, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
