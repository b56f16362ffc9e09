"""Statevector VQE engine for the alternating Heisenberg chain."""

from .ansatz import AnsatzSpec, Family, InitKind, build_ansatz, build_initialization, evaluate
from .circuit import Circuit, GateOp
from .spectra import Boundary, HamiltonianSpec, SpectrumResult, build_hamiltonian, eigensolve, gaps
from .statevector import DensityMatrix, StateVector, apply_gate, inner_product, new_zero_state, partial_trace, sample_bitstrings

__all__ = [
    "AnsatzSpec", "Family", "InitKind", "build_ansatz", "build_initialization", "evaluate",
    "Circuit", "GateOp",
    "Boundary", "HamiltonianSpec", "SpectrumResult", "build_hamiltonian", "eigensolve", "gaps",
    "DensityMatrix", "StateVector", "apply_gate", "inner_product", "new_zero_state",
    "partial_trace", "sample_bitstrings",
]
