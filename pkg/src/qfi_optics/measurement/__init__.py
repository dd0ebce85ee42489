"""Optimal measurements, classical Fisher information and ML estimation."""

from qfi_optics.measurement.estimation import EstimationRun, likelihood_bracket, simulate_ml
from qfi_optics.measurement.povm import (
    PovmElement,
    check_completeness,
    classical_fisher,
    optimal_povm,
    outcome_probabilities,
)

__all__ = [
    "EstimationRun",
    "PovmElement",
    "check_completeness",
    "classical_fisher",
    "likelihood_bracket",
    "optimal_povm",
    "outcome_probabilities",
    "simulate_ml",
]
