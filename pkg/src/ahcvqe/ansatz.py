"""Two-layer circuit construction: fixed-point initialization layers followed
by brick-wall variational layers of eSWAP (or SO(4)) gates.

Parameter layout is depth-major, then brick position in sub-layer order
(first the pairs not holding an initialization singlet, left to right, then
the complementary pairs). Each eSWAP brick owns one slot, each SO(4) brick
six consecutive slots.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import gates
from .circuit import Circuit, GateOp
from .statevector import StateVector


class InitKind(enum.Enum):
    S = "s"
    E00 = "e00"
    E01 = "e01"
    E10 = "e10"
    E11 = "e11"
    D = "d"


class Family(enum.Enum):
    ESWAP = "eswap"
    SO4 = "so4"


@dataclass(frozen=True)
class AnsatzSpec:
    """L sites (multiple of 4), initialization kind, depth D, gate family.

    init=None skips the initialization layer entirely (the generic SO(4)
    brick-wall baseline acts on |0...0> directly).
    """

    L: int
    init: InitKind | None
    depth: int
    family: Family = Family.ESWAP

    def __post_init__(self):
        if self.L % 4 != 0:
            raise ValueError(f"L must be a multiple of 4, got {self.L}")
        if self.depth < 0:
            raise ValueError(f"depth must be >= 0, got {self.depth}")
        if self.family is Family.ESWAP and self.init is None:
            raise ValueError("the eSWAP family requires an initialization kind")

    @property
    def n_parameters(self) -> int:
        per_brick = 1 if self.family is Family.ESWAP else 6
        return per_brick * (self.L - 1) * self.depth


def singlet_pairs(kind: InitKind, L: int) -> list[tuple[int, int]]:
    """Qubit pairs hosting an initialization singlet, in gate order."""
    if kind is InitKind.D:
        return [(q, q + 1) for q in range(0, L, 2)]
    pairs = [(q, q + 1) for q in range(1, L - 2, 2)]
    if kind is InitKind.S:
        pairs.append((L - 1, 0))
    return pairs


def build_initialization(kind: InitKind, L: int) -> Circuit:
    """Fixed-point initialization circuit of the requested kind.

    S covers (1,2),(3,4),...,(L-1,0); the four E kinds cover
    (1,2)...(L-3,L-2) with boundary qubits 0 and L-1 set by the two flag
    bits; D covers (0,1),(2,3),...,(L-2,L-1)."""
    if L % 4 != 0:
        raise ValueError(f"L must be a multiple of 4, got {L}")
    circ = Circuit(L)
    if kind in (InitKind.E10, InitKind.E11):
        circ.add((0,), gates.X)
    if kind in (InitKind.E01, InitKind.E11):
        circ.add((L - 1,), gates.X)
    for (i, j) in singlet_pairs(kind, L):
        circ.extend(gates.singlet_prep(i, j, L))
    return circ


def brick_pairs(kind: InitKind | None, L: int) -> list[tuple[int, int]]:
    """Bricks of one depth unit, first sub-layer first. The first sub-layer
    acts on the pairs where the initialization holds no singlet."""
    even = [(q, q + 1) for q in range(0, L - 1, 2)]
    odd = [(q, q + 1) for q in range(1, L - 1, 2)]
    return odd + even if kind is InitKind.D else even + odd


def _so4_maker(a, b, c, d, e, f):
    return gates.so4_matrix(np.array([a, b, c, d, e, f]))


def build_variational_layer(spec: AnsatzSpec) -> Circuit:
    """D repetitions of the L-1 brick unit, with unbound parameter slots."""
    circ = Circuit(spec.L, n_params=spec.n_parameters)
    slot = 0
    for _ in range(spec.depth):
        for (i, j) in brick_pairs(spec.init, spec.L):
            if spec.family is Family.ESWAP:
                circ.add((i, j), params=(slot,), maker=gates.eswap)
                slot += 1
            else:
                circ.add((i, j), params=tuple(range(slot, slot + 6)), maker=_so4_maker)
                slot += 6
    return circ


def build_ansatz(spec: AnsatzSpec) -> Circuit:
    """Initialization followed by the variational layer; depth_boundaries
    marks the end of the initialization and of every depth unit."""
    init_ops: list[GateOp] = []
    if spec.init is not None:
        init_ops = build_initialization(spec.init, spec.L).ops
    var = build_variational_layer(spec)
    ops_per_unit = len(var.ops) // spec.depth if spec.depth else 0
    boundaries = tuple(len(init_ops) + d * ops_per_unit for d in range(spec.depth + 1))
    return Circuit(spec.L, init_ops + var.ops, spec.n_parameters, boundaries)


def evaluate(spec: AnsatzSpec, theta: np.ndarray) -> StateVector:
    """|Psi(theta)> = C(theta) C_0 |0>."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.n_parameters,):
        raise ValueError(f"theta has shape {theta.shape}, expected ({spec.n_parameters},)")
    return build_ansatz(spec).run(theta)


def connecting_circuit(L: int) -> Circuit:
    """C' = C_0^d (C_0^00)^{-1}: maps |phi_00> to the dimer state |phi_d>
    with a layer depth independent of L."""
    undo = build_initialization(InitKind.E00, L).inverse()
    redo = build_initialization(InitKind.D, L)
    return Circuit(L, undo.ops + redo.ops)


def insert_cnot(circuit: Circuit, control: int, target: int, after_depth: int) -> Circuit:
    """New circuit with one CX (given control) inserted after the requested
    depth unit (0 = right after the initialization layer)."""
    if not circuit.depth_boundaries:
        raise ValueError("circuit carries no depth boundaries to position against")
    if not 0 <= after_depth < len(circuit.depth_boundaries):
        raise ValueError(f"after_depth {after_depth} out of range")
    if control == target:
        raise IndexError("control and target must differ")
    pos = circuit.depth_boundaries[after_depth]
    return circuit.with_inserted(pos, GateOp((control, target), gates.CX))
