"""Bonnet deformations, pairs of isometric immersions and their diagnostics."""

from .admissibility import EmptyMaskError, bonnet_admissibility, equivalence_agrees, nonvanishing_mask
from .deformation import DeformationState, NotBonnetError, deform, integrate_pfaff
from .harmonic import (
    NotHarmonicError,
    PeriodError,
    SingularCoordinateError,
    h_ode_residual,
    h_structure_checks,
    holomorphic_completion,
    s_derivative,
)
from .lawson_tribuzy import BranchHolonomyError, LTDiagnostics, ModulusMismatchError, lt_diagnostics, unwrap_phase
from .pairs import (
    NotAPairError,
    PairDecomposition,
    UmbilicPoint,
    UmbilicReport,
    ZeroFieldError,
    expected_divisor_degree,
    pair_compose,
    pair_decompose,
    umbilic_analysis,
)

__all__ = [
    "BranchHolonomyError", "DeformationState", "EmptyMaskError", "LTDiagnostics", "ModulusMismatchError",
    "NotAPairError", "NotBonnetError", "NotHarmonicError", "PairDecomposition", "PeriodError",
    "SingularCoordinateError", "UmbilicPoint", "UmbilicReport", "ZeroFieldError", "bonnet_admissibility",
    "deform", "equivalence_agrees", "expected_divisor_degree", "h_ode_residual", "h_structure_checks",
    "holomorphic_completion", "integrate_pfaff", "lt_diagnostics", "nonvanishing_mask", "pair_compose",
    "pair_decompose", "s_derivative", "umbilic_analysis", "unwrap_phase",
]
