"""Embezzling-family spectra, streaming optimal fidelities, and analysis."""

from .analysis import (
    LnDeviationRow,
    OrderDivergenceReport,
    OrderEstimate,
    entanglement_entropy,
    entropy_prediction,
    g1_order_estimate,
    gh_ln_deviation,
    h_order_estimate,
    h_ratio_condition,
    mu1_decay,
    order_divergence_check,
    order_ratio,
)
from .families import (
    FamilyKind,
    FamilySpec,
    SpectrumSource,
    build_spectrum,
    check_monotone,
    fdh,
    g,
    gh,
    gh_materialize,
    gh_prefix_norms,
    gh_raw_monotone,
    gh_raw_values,
    gh_spectrum,
    h,
    lambda_eval,
    regular_prefix_norms,
    regular_value,
    sine,
    sine_spectrum,
    spectrum_from_runs,
    spectrum_prefix_norms,
)
from .fidelity import (
    FidelityRecord,
    SweepPointError,
    brute_force_fidelity,
    fidelity_sweep,
    optimal_fidelity,
    ratio_profile,
    sine_matched_fidelity,
    sine_mismatched_fidelity,
)
from .fitting import FitModel, SensitivityScan, crossover, fit_inverse_poly, sensitivity_scan
from .protocol import (
    PermutationIsometry,
    ProtocolReport,
    RankRecursionOutcome,
    SchmidtVector,
    block_fidelity,
    compose_bound,
    isometry_overlap,
    optimal_isometry,
    random_target,
    rank_recursion_suite,
    recursive_rank_m,
    superposed_embezzlement,
    superposition_suite,
)
from .targets import BUILTIN_TARGETS, PHI_CIRC, PHI_PLUS, PHI_STAR, TargetState

__all__ = [
    "BUILTIN_TARGETS",
    "FamilyKind",
    "FamilySpec",
    "FidelityRecord",
    "FitModel",
    "LnDeviationRow",
    "OrderDivergenceReport",
    "OrderEstimate",
    "PHI_CIRC",
    "PHI_PLUS",
    "PHI_STAR",
    "PermutationIsometry",
    "ProtocolReport",
    "RankRecursionOutcome",
    "SchmidtVector",
    "SensitivityScan",
    "SpectrumSource",
    "SweepPointError",
    "TargetState",
    "block_fidelity",
    "brute_force_fidelity",
    "build_spectrum",
    "check_monotone",
    "compose_bound",
    "crossover",
    "entanglement_entropy",
    "entropy_prediction",
    "fdh",
    "fidelity_sweep",
    "fit_inverse_poly",
    "g",
    "g1_order_estimate",
    "gh",
    "gh_ln_deviation",
    "gh_materialize",
    "gh_prefix_norms",
    "gh_raw_monotone",
    "gh_raw_values",
    "gh_spectrum",
    "h",
    "h_order_estimate",
    "h_ratio_condition",
    "isometry_overlap",
    "lambda_eval",
    "mu1_decay",
    "optimal_fidelity",
    "optimal_isometry",
    "order_divergence_check",
    "order_ratio",
    "random_target",
    "rank_recursion_suite",
    "ratio_profile",
    "recursive_rank_m",
    "regular_prefix_norms",
    "regular_value",
    "sensitivity_scan",
    "sine",
    "sine_matched_fidelity",
    "sine_mismatched_fidelity",
    "sine_spectrum",
    "spectrum_from_runs",
    "spectrum_prefix_norms",
    "superposed_embezzlement",
    "superposition_suite",
]
