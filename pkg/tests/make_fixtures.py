"""Regenerate the JSON fixtures in tests/fixtures from the corpus.

Run ``python tests/make_fixtures.py``; the output is deterministic.
"""

import json
from pathlib import Path

from dghomalg.complexes import ChainMap, FinComplex, disk, sphere, sum_projection
from dghomalg.corpus import exterior, massey_algebra, two_generator_z, z4_truncated
from dghomalg.dg_algebra import algebra_module, trivial_module
from dghomalg.interchange import canonical, to_json
from dghomalg.linalg import ZZ
from dghomalg.resolutions import bar_resolution

HERE = Path(__file__).parent / "fixtures"


def fixtures():
    s0, d1 = sphere(0, ZZ), disk(1, ZZ)
    zero = FinComplex(ZZ, {})
    inc = ChainMap(s0, d1, {0: [[1]]})
    yield "sphere", s0
    yield "z4", z4_truncated(0, 8)
    yield "split_epi", sum_projection([s0, s0], 0)
    yield "times_two", ChainMap(s0, s0, {0: [[2]]})
    yield "disk_to_zero", ChainMap(d1, zero, {})
    yield "sphere_into_disk", inc
    yield "sphere_to_zero", ChainMap(s0, zero, {})
    yield "ext_y", exterior()
    yield "ext_y_self", algebra_module(exterior(), "right")
    yield "ext_y_free", algebra_module(exterior())
    yield "ext_y_trivial", trivial_module(exterior())
    yield "two_gen_z", two_generator_z()
    yield "massey", massey_algebra()
    yield "bar_two_gen_z", bar_resolution(trivial_module(two_generator_z()), top=5).X


def main():
    HERE.mkdir(exist_ok=True)
    for name, obj in fixtures():
        text = json.dumps(json.loads(canonical(to_json(obj))), indent=1, sort_keys=True)
        (HERE / f"{name}.json").write_text(text + "\n")


if __name__ == "__main__":
    main()
