"""Concave maximization on the simplex and N00N breakdown thresholds."""

from qfi_optics.optimize.simplex import (
    OptimizationResult,
    OptimizerOptions,
    certify_optimum,
    kkt_residual,
    maximize_qfi,
    maximize_two_component,
    project_to_simplex,
)
from qfi_optics.optimize.thresholds import (
    ThresholdFit,
    ThresholdMethod,
    ThresholdResult,
    fit_threshold_exponent,
    noon_perturbation_gain,
    threshold,
    threshold_one_arm,
    threshold_polynomial,
    threshold_two_arm,
)

__all__ = [
    "OptimizationResult",
    "OptimizerOptions",
    "ThresholdFit",
    "ThresholdMethod",
    "ThresholdResult",
    "certify_optimum",
    "fit_threshold_exponent",
    "kkt_residual",
    "maximize_qfi",
    "maximize_two_component",
    "noon_perturbation_gain",
    "project_to_simplex",
    "threshold",
    "threshold_one_arm",
    "threshold_polynomial",
    "threshold_two_arm",
]
