"""Symbolic-numeric normal form of the forced oscillator in action-angle variables."""
from .coeffs import CoeffExpr, symbol
from .engine import (
    NormalFormResult,
    TruncationReport,
    convergence_threshold,
    deprit_diagonal,
    evaluate_series,
    hamiltonian_series,
    lie_residual,
    normalize,
    remainder_diagonal,
    required_smoothness,
    solve_homological,
    stage1,
    stage2,
)
from .series import KappaProfile, NFSeries, NFTerm, bracket_lists, merge_terms, poisson_bracket

__all__ = [
    "CoeffExpr",
    "symbol",
    "KappaProfile",
    "NFSeries",
    "NFTerm",
    "bracket_lists",
    "merge_terms",
    "poisson_bracket",
    "NormalFormResult",
    "TruncationReport",
    "convergence_threshold",
    "deprit_diagonal",
    "evaluate_series",
    "hamiltonian_series",
    "lie_residual",
    "normalize",
    "remainder_diagonal",
    "required_smoothness",
    "solve_homological",
    "stage1",
    "stage2",
]
