"""Gate-list circuit representation with optional parameter slots.

A circuit is an ordered list of gate applications. Fixed gates carry their
matrix; parameterized gates carry parameter slot ids plus a maker callable
that builds the matrix from the bound values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .statevector import StateVector, apply_gate_inplace, new_zero_state


@dataclass(frozen=True)
class GateOp:
    targets: tuple[int, ...]
    matrix: np.ndarray | None = None
    params: tuple[int, ...] = ()
    maker: Callable[..., np.ndarray] | None = None

    def bound_matrix(self, theta: np.ndarray | None) -> np.ndarray:
        if not self.params:
            return self.matrix
        if theta is None:
            raise ValueError("circuit has parameter slots but no values were bound")
        return self.maker(*(float(theta[p]) for p in self.params))


@dataclass
class Circuit:
    """Ordered gate applications over n_qubits, with n_params free slots.

    depth_boundaries marks op-list positions at the end of the initialization
    layer and after each variational depth unit (used to position inserted
    gates); empty for hand-built fragments.
    """

    n_qubits: int
    ops: list[GateOp] = field(default_factory=list)
    n_params: int = 0
    depth_boundaries: tuple[int, ...] = ()

    def add(self, targets, matrix=None, params=(), maker=None) -> None:
        targets = tuple(targets)
        for t in targets:
            if not 0 <= t < self.n_qubits:
                raise IndexError(f"target {t} out of range for {self.n_qubits} qubits")
        self.ops.append(GateOp(targets, matrix, tuple(params), maker))

    def gate_count(self) -> int:
        return len(self.ops)

    def extend(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise ValueError("cannot extend circuits with different qubit counts")
        if other.n_params:
            raise ValueError("extend only supports parameter-free fragments")
        self.ops.extend(other.ops)
        return self

    def run_inplace(self, amps: np.ndarray, theta: np.ndarray | None = None) -> None:
        n = self.n_qubits
        for op in self.ops:
            apply_gate_inplace(amps, op.bound_matrix(theta), op.targets, n)

    def apply(self, state: StateVector, theta: np.ndarray | None = None) -> StateVector:
        """Return the circuit applied to `state` (pure; input untouched)."""
        out = state.amplitudes.copy()
        self.run_inplace(out, theta)
        return StateVector(self.n_qubits, out)

    def run(self, theta: np.ndarray | None = None) -> StateVector:
        """Apply to |0...0>."""
        return self.apply(new_zero_state(self.n_qubits), theta)

    def inverse(self) -> "Circuit":
        """Reversed circuit of daggered gates; fixed-gate circuits only."""
        if self.n_params or any(op.params for op in self.ops):
            raise ValueError("inverse is only defined for parameter-free circuits")
        inv = Circuit(self.n_qubits)
        for op in reversed(self.ops):
            inv.add(op.targets, op.matrix.conj().T)
        return inv

    def with_inserted(self, position: int, op: GateOp) -> "Circuit":
        """New circuit with `op` inserted at the given op-list position."""
        if not 0 <= position <= len(self.ops):
            raise ValueError(f"insert position {position} out of range")
        ops = self.ops[:position] + [op] + self.ops[position:]
        return replace(self, ops=ops, depth_boundaries=tuple(
            b + 1 if b >= position else b for b in self.depth_boundaries
        ))


def unitary_of(circuit: Circuit, theta: np.ndarray | None = None) -> np.ndarray:
    """Dense matrix of a small circuit (column-by-column application)."""
    dim = 1 << circuit.n_qubits
    if dim > 1 << 10:
        raise ValueError("unitary_of is intended for small circuits")
    mats = [op.bound_matrix(theta) for op in circuit.ops]
    u = np.eye(dim, dtype=np.complex128)
    for col in range(dim):
        amps = u[:, col].copy()
        for op, m in zip(circuit.ops, mats):
            apply_gate_inplace(amps, m, op.targets, circuit.n_qubits)
        u[:, col] = amps
    return u
