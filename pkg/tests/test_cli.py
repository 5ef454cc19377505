import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from dghomalg.cli import main
from dghomalg.complexes import ChainMap, FinComplex
from dghomalg.dg_algebra import DGAlgebra, DGModule
from dghomalg.interchange import (InvariantError, SchemaError, canonical, parse_and_validate,
                                  parse_object, to_json)
from dghomalg.resolutions import SplitModule, classify

GOLDEN = Path(__file__).parent / "golden"


def run(capsysbinary, *argv):
    code = main(list(argv))
    out, err = capsysbinary.readouterr()
    return code, out.decode(), err.decode()


@pytest.fixture
def fx(fixture_dir):
    return lambda name: str(fixture_dir / f"{name}.json")


# ---------------------------------------------------------------- parsing

@pytest.mark.parametrize("name,kind", [
    ("sphere", FinComplex), ("z4", FinComplex), ("split_epi", ChainMap),
    ("ext_y", DGAlgebra), ("ext_y_self", DGModule), ("bar_two_gen_z", SplitModule),
])
def test_fixture_types(fx, name, kind):
    assert isinstance(parse_and_validate(fx(name)), kind)


def test_fixture_round_trip(fixture_dir):
    paths = sorted(fixture_dir.glob("*.json"))
    assert len(paths) >= 10
    for p in paths:
        obj = parse_and_validate(p)
        text = canonical(to_json(obj))
        again = parse_object(json.loads(text))
        assert canonical(to_json(again)) == text, p.name


def test_bar_fixture_is_general(fx):
    assert classify(parse_and_validate(fx("bar_two_gen_z"))) == "general"


def _mutated(tmp_path, fx, name, change):
    j = json.loads(open(fx(name)).read())
    change(j)
    p = tmp_path / f"{name}_bad.json"
    p.write_text(json.dumps(j))
    return str(p)


def test_broken_leibniz_names_basis_pair(tmp_path, fx, capsysbinary):
    bad = _mutated(tmp_path, fx, "massey", lambda j: j["mul"].append([2, 0, 1, 0, [[0, "1"]]]))
    with pytest.raises(InvariantError) as e:
        parse_and_validate(bad)
    assert "Leibniz fails on (2,0),(1,0)" in str(e.value)
    code, out, err = run(capsysbinary, "homology", bad)
    assert code == 2 and out == "" and "(2,0),(1,0)" in err


def test_schema_error_has_path(tmp_path, fx):
    bad = _mutated(tmp_path, fx, "z4", lambda j: j["diff"]["2"][0].__setitem__(0, "two"))
    with pytest.raises(SchemaError) as e:
        parse_and_validate(bad)
    assert e.value.path.startswith("$.diff.2")


def test_dd_violation_rejected(tmp_path, fx):
    bad = _mutated(tmp_path, fx, "z4", lambda j: j["diff"].__setitem__("2", [["1"]]))
    with pytest.raises(InvariantError):
        parse_and_validate(bad)


# ---------------------------------------------------------------- exit codes

CASES = [
    (0, ["check", "split_epi", "--predicate", "q-fibration"]),
    (0, ["check", "split_epi", "--predicate", "r-fibration"]),
    (1, ["check", "times_two", "--predicate", "q-fibration"]),
    (1, ["check", "z4", "--predicate", "contractible"]),
    (0, ["check", "disk_to_zero", "--predicate", "quasi-iso"]),
    (1, ["check", "sphere_to_zero", "--predicate", "quasi-iso"]),
    (0, ["check", "disk_to_zero", "--predicate", "h-equivalence"]),
    (0, ["check", "bar_two_gen_z", "--predicate", "split-valid"]),
    (0, ["check", "bar_two_gen_z", "--predicate", "kunneth"]),
    (0, ["check", "ext_y_free", "--predicate", "rel-projective"]),
    (1, ["check", "ext_y_trivial", "--predicate", "rel-projective"]),
    (0, ["homology", "z4"]),
    (0, ["factor", "times_two", "--mode", "cylinder"]),
    (0, ["factor", "times_two", "--mode", "cocylinder"]),
    (0, ["factor", "times_two", "--mode", "onestep"]),
    (0, ["resolve", "ext_y", "--kind", "bar", "--through", "4"]),
    (0, ["resolve", "two_gen_z", "--kind", "distinguished", "--through", "6"]),
    (0, ["tor", "ext_y", "--method", "bar", "--through", "6"]),
    (0, ["tor", "two_gen_z", "--method", "moore", "--through", "6"]),
    (0, ["ext", "ext_y", "--method", "moore", "--through", "4"]),
    (0, ["emss", "ext_y", "--through", "6"]),
    (0, ["massey", "massey", "--x", "1:1", "--y", "1:1", "--z", "1:1"]),
    (0, ["edge", "ext_y", "--through", "4"]),
    (2, ["homology", "no_such_file"]),
    (2, ["check", "sphere", "--predicate", "q-fibration"]),
    (2, ["tor", "ext_y", "--method", "koszul", "--through", "6"]),
    (2, ["frobnicate", "ext_y"]),
]


@pytest.mark.parametrize("code,argv", CASES, ids=[" ".join(a) for _, a in CASES])
def test_exit_codes(fx, capsysbinary, code, argv):
    argv = [argv[0], fx(argv[1])] + argv[2:] if len(argv) > 1 else argv
    got, out, err = run(capsysbinary, *argv)
    assert got == code, err
    if code in (0, 1):
        assert out and not err
    else:
        assert not out


def test_window_too_small_exits_3(tmp_path, capsysbinary):
    from dghomalg.corpus import polynomial
    from dghomalg.linalg import QQ
    p = tmp_path / "poly.json"
    p.write_text(canonical(to_json(polynomial(QQ, (2,), 8))))
    code, out, err = run(capsysbinary, "tor", str(p), "--method", "koszul", "--cycle", "2:1",
                         "--through", "12")
    assert code == 3 and "window too small" in err
    code, out, _ = run(capsysbinary, "tor", str(p), "--method", "koszul", "--cycle", "2:1",
                       "--through", "6")
    assert code == 0


def test_lift_command(fx, capsysbinary):
    code, out, _ = run(capsysbinary, "--format", "json", "lift", "--i", fx("sphere_into_disk"),
                       "--p", fx("disk_to_zero"), "--top", fx("sphere_into_disk"),
                       "--bottom", fx("disk_to_zero"))
    assert code == 0
    rep = json.loads(out)
    assert rep["verdicts"]["lift"] == "found" and rep["violations"] == []


# ---------------------------------------------------------------- reports

def test_contractible_certificate(fx, capsysbinary):
    code, out, _ = run(capsysbinary, "--format", "json", "check", fx("z4"),
                       "--predicate", "contractible", "--interior", "1", "7")
    rep = json.loads(out)
    assert code == 1
    assert rep["verdicts"]["certificate"] == "NotContractible"
    assert rep["verdicts"]["degree"] == 1


def test_tor_rank_one_per_even_degree(fx, capsysbinary):
    code, out, _ = run(capsysbinary, "--format", "json", "tor", fx("ext_y"), "--method", "bar",
                       "--through", "6")
    rows = json.loads(out)["tables"][0]["rows"]
    assert code == 0 and rows == [[str(n), "F2"] for n in (0, 2, 4, 6)]


def test_empty_table_wording(fx, capsysbinary):
    _, out, _ = run(capsysbinary, "homology", fx("z4"), "--lo", "1", "--hi", "7")
    assert "0 in all degrees of window" in out


@pytest.mark.parametrize("fmt", ["table", "json"])
def test_tor_golden(fixture_dir, capsysbinary, monkeypatch, fmt):
    monkeypatch.chdir(fixture_dir)
    code, out, _ = run(capsysbinary, "--format", fmt, "tor", "ext_y.json", "--method", "bar",
                       "--through", "6")
    suffix = "txt" if fmt == "table" else "json"
    assert code == 0
    assert out == (GOLDEN / f"tor_ext_y_bar.{suffix}").read_text()


@pytest.mark.parametrize("argv", [
    ["resolve", "two_gen_z", "--kind", "bar", "--through", "5"],
    ["factor", "times_two", "--mode", "cocylinder"],
    ["emss", "two_gen_z", "--through", "6"],
])
def test_byte_stable(fx, capsysbinary, argv):
    argv = ["--format", "json", argv[0], fx(argv[1])] + argv[2:]
    first = run(capsysbinary, *argv)
    second = run(capsysbinary, *argv)
    assert first == second and first[0] == 0


def test_resolve_writes_parseable_split(fx, tmp_path, capsysbinary):
    out = tmp_path / "x.json"
    code, _, _ = run(capsysbinary, "resolve", fx("two_gen_z"), "--kind", "bar", "--through", "5",
                     "--out", str(out))
    assert code == 0
    assert canonical(to_json(parse_and_validate(out))) == \
        canonical(to_json(parse_and_validate(fx("bar_two_gen_z"))))


@pytest.mark.skipif(shutil.which("dghomalg") is None, reason="console script not installed")
def test_console_script(fx):
    p = subprocess.run(["dghomalg", "check", fx("z4"), "--predicate", "contractible"],
                       capture_output=True)
    assert p.returncode == 1 and b"NotContractible" in p.stdout


def test_module_entry_point(fx):
    p = subprocess.run([sys.executable, "-m", "dghomalg.cli", "homology", fx("sphere")],
                       capture_output=True)
    assert p.returncode == 0 and b"Z" in p.stdout
