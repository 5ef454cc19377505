"""Exact homological algebra over DG algebras: resolutions, Tor, Ext and spectral sequences."""

from .linalg import (
    Integers, IntegersMod, PrimeField, Rationals, Matrix, Subquotient,
    ring_from_json, parse_element, format_element, smith_normal_form,
    howell_form, solve, kernel, rank, subquotient,
)
from .complexes import (
    FinComplex, PresentedComplex, ChainMap, Homotopy, homology, sphere, disk,
    tensor, hom, cone, cylinder, cocylinder, direct_sum, suspension,
    is_quasi_iso, contracting_homotopy,
)
from .model import (
    Yes, No, PreconditionFailed, is_q_fibration, is_r_fibration,
    factor_onestep_J, factor_cylinder, factor_cocylinder, find_lift, solve_lift,
    verify_lift, LiftSquare,
)
from .dg_algebra import (
    DGAlgebra, DGModule, RelFreeModule, HomologyAlgebra, validate_cup1,
    validate_dga, validate_module, algebra_module, restricted_module,
    trivial_module, free_module, tensor_over_A, hom_over_A, homology_algebra,
    homology_module, MissingStructure, NoCup1, NotFree,
)
from .resolutions import (
    SplitModule, ResolutionMap, moore_resolution, ce_resolution,
    bar_resolution, distinguished_resolution, koszul_resolution,
    compare_resolutions, split_extension, check_filtration, classify,
    validate_split, WindowTooSmall,
)
from .tor import (
    TorTable, resolve, tor, ext, spectral_sequence, emss, is_kunneth,
    kunneth_map, semiflat_probe, gamma, triple_massey, Undefined,
    edge_and_suspension, tor_les,
)

__version__ = "0.1.0"

__all__ = [
    "Integers",
    "IntegersMod",
    "PrimeField",
    "Rationals",
    "Matrix",
    "Subquotient",
    "ring_from_json",
    "parse_element",
    "format_element",
    "smith_normal_form",
    "howell_form",
    "solve",
    "kernel",
    "rank",
    "subquotient",
    "FinComplex",
    "PresentedComplex",
    "ChainMap",
    "Homotopy",
    "homology",
    "sphere",
    "disk",
    "tensor",
    "hom",
    "cone",
    "cylinder",
    "cocylinder",
    "direct_sum",
    "suspension",
    "is_quasi_iso",
    "contracting_homotopy",
    "Yes",
    "No",
    "PreconditionFailed",
    "is_q_fibration",
    "is_r_fibration",
    "factor_onestep_J",
    "factor_cylinder",
    "factor_cocylinder",
    "find_lift",
    "solve_lift",
    "verify_lift",
    "LiftSquare",
    "DGAlgebra",
    "DGModule",
    "RelFreeModule",
    "HomologyAlgebra",
    "validate_cup1",
    "validate_dga",
    "validate_module",
    "algebra_module",
    "restricted_module",
    "trivial_module",
    "free_module",
    "tensor_over_A",
    "hom_over_A",
    "homology_algebra",
    "homology_module",
    "MissingStructure",
    "NoCup1",
    "NotFree",
    "SplitModule",
    "ResolutionMap",
    "moore_resolution",
    "ce_resolution",
    "bar_resolution",
    "distinguished_resolution",
    "koszul_resolution",
    "compare_resolutions",
    "split_extension",
    "check_filtration",
    "classify",
    "validate_split",
    "WindowTooSmall",
    "TorTable",
    "resolve",
    "tor",
    "ext",
    "spectral_sequence",
    "emss",
    "is_kunneth",
    "kunneth_map",
    "semiflat_probe",
    "gamma",
    "triple_massey",
    "Undefined",
    "edge_and_suspension",
    "tor_les",
]
