from .errors import (
    BracketError,
    PoleAtA,
    PoleAtB,
    PoleAtInteger,
    PoleError,
    RegimeError,
    SolverError,
    TruncationWarning,
)
from .precision import DOUBLE, NumericContext, context_for, digits_lost, screening_truncation
from .recurrence import (
    TruncationConfig,
    a_space_coeffs,
    b_space_coeffs,
    d_space_coeffs,
    default_truncation,
    eq_coupling_coeffs,
    eq_initial_from_d,
    initial_from_d,
    three_term_coeffs,
)
from .gfunction import GEvaluation, PoleMap, cf_residual, g_det, g_entry, g_equal, pole_map
from .spectrum import (
    EnergyLevel,
    SpectrumResult,
    SpectrumSolver,
    classify_zero,
    default_window,
    detect_dark_states,
    exceptional_candidates,
    refine_zero,
    scan_sign_changes,
    singlet_levels,
    solve_spectrum,
    sweep_coupling,
    track_levels,
)

__all__ = [
    "BracketError",
    "DOUBLE",
    "EnergyLevel",
    "GEvaluation",
    "NumericContext",
    "PoleAtA",
    "PoleAtB",
    "PoleAtInteger",
    "PoleError",
    "PoleMap",
    "RegimeError",
    "SolverError",
    "SpectrumResult",
    "SpectrumSolver",
    "TruncationConfig",
    "TruncationWarning",
    "a_space_coeffs",
    "b_space_coeffs",
    "cf_residual",
    "classify_zero",
    "context_for",
    "d_space_coeffs",
    "default_truncation",
    "default_window",
    "detect_dark_states",
    "digits_lost",
    "eq_coupling_coeffs",
    "eq_initial_from_d",
    "exceptional_candidates",
    "g_det",
    "g_entry",
    "g_equal",
    "initial_from_d",
    "pole_map",
    "refine_zero",
    "scan_sign_changes",
    "screening_truncation",
    "singlet_levels",
    "solve_spectrum",
    "sweep_coupling",
    "three_term_coeffs",
    "track_levels",
]
