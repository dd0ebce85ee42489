"""Distinguishable-photon probes and the symmetrization argument."""

from qfi_optics.qubits.distinguishable import (
    QubitProbe,
    embed_symmetric,
    from_fock,
    ghz_probe,
    hamming_weights,
    is_symmetric,
    permute_qubits,
    qfi_bound_qubits,
    qfi_bound_qubits_naive,
    qfi_exact_qubits,
    symmetrize,
)

__all__ = [
    "QubitProbe",
    "embed_symmetric",
    "from_fock",
    "ghz_probe",
    "hamming_weights",
    "is_symmetric",
    "permute_qubits",
    "qfi_bound_qubits",
    "qfi_bound_qubits_naive",
    "qfi_exact_qubits",
    "symmetrize",
]
