"""Probe states, the loss model and the Fisher-information engine."""

from qfi_optics.core.fisher import (
    BoundObjective,
    Metric,
    OutputBlock,
    QfiReport,
    SldBlock,
    density_qfi,
    output_blocks,
    precision_from_fisher,
    qfi_bound,
    qfi_bound_gradient,
    qfi_bound_hessian,
    qfi_bound_many,
    qfi_exact,
    qfi_mixture,
    qfi_one_arm,
    qfi_pure,
    qfi_report,
    sld_blocks,
    symmetric_log_derivative,
)
from qfi_optics.core.fock import (
    ConditionalBranch,
    LossMode,
    LossModel,
    ProbeState,
    decompose_output,
    fock_component,
    loss_coefficient,
    loss_phase_commutation_check,
    loss_tensor,
    noon_state,
    output_density_matrix,
)

__all__ = [
    "BoundObjective",
    "ConditionalBranch",
    "LossMode",
    "LossModel",
    "Metric",
    "OutputBlock",
    "ProbeState",
    "QfiReport",
    "SldBlock",
    "decompose_output",
    "density_qfi",
    "fock_component",
    "loss_coefficient",
    "loss_phase_commutation_check",
    "loss_tensor",
    "noon_state",
    "output_blocks",
    "output_density_matrix",
    "precision_from_fisher",
    "qfi_bound",
    "qfi_bound_gradient",
    "qfi_bound_hessian",
    "qfi_bound_many",
    "qfi_exact",
    "qfi_mixture",
    "qfi_one_arm",
    "qfi_pure",
    "qfi_report",
    "sld_blocks",
    "symmetric_log_derivative",
]
