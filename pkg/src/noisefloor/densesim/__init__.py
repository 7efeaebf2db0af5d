"""Dense state-vector and density-matrix simulation on a handful of qubits."""

from .circuit import (
    NOISELESS,
    Circuit,
    Gate,
    NoiseModel,
    NoiseSpec,
    apply_gate,
    circuit_unitary,
    compile_circuit,
    compile_pauli_exp,
    depolarize,
    format_circuit,
    parse_circuit,
    product_formula,
    run_circuit,
    run_statevector,
)
from .linalg import (
    as_density_matrix,
    basis_state,
    check_density_matrix,
    hermitian_eig,
    n_qubits_of,
    partial_trace,
    projector,
)

__all__ = [
    "NOISELESS",
    "Circuit",
    "Gate",
    "NoiseModel",
    "NoiseSpec",
    "apply_gate",
    "as_density_matrix",
    "basis_state",
    "check_density_matrix",
    "circuit_unitary",
    "compile_circuit",
    "compile_pauli_exp",
    "depolarize",
    "format_circuit",
    "hermitian_eig",
    "n_qubits_of",
    "parse_circuit",
    "partial_trace",
    "product_formula",
    "projector",
    "run_circuit",
    "run_statevector",
]
