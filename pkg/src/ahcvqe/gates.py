"""Gate constructors: Pauli/H/CX/SWAP, singlet preparation, the eSWAP gate
and its CNOT decomposition, the global spin flip, and the SO(4) rotation.

Two-qubit matrices follow the simulator's local convention: for a gate on
targets (i, j), qubit i is the low bit of the 4x4 basis index. CX below has
its control on the first target.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)

# control = first target (low bit): flips the second target when the first is 1
CX = np.array([[1, 0, 0, 0],
               [0, 0, 0, 1],
               [0, 0, 1, 0],
               [0, 1, 0, 0]], dtype=np.complex128)

SWAP = np.array([[1, 0, 0, 0],
                 [0, 0, 1, 0],
                 [0, 1, 0, 0],
                 [0, 0, 0, 1]], dtype=np.complex128)


def rx(angle: float) -> np.ndarray:
    """exp(-i angle X / 2)."""
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def rz(angle: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * angle), 0], [0, np.exp(0.5j * angle)]])


def phase_gate(angle: float) -> np.ndarray:
    """diag(1, e^{i angle})."""
    return np.array([[1, 0], [0, np.exp(1j * angle)]], dtype=np.complex128)


def eswap(theta: float) -> np.ndarray:
    """exp(-i theta SWAP / 2) = cos(theta/2) I - i sin(theta/2) SWAP."""
    return np.cos(theta / 2) * np.eye(4, dtype=np.complex128) - 1j * np.sin(theta / 2) * SWAP


_SO4_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


@dataclass(frozen=True)
class So4Params:
    """Six angles of the generic two-qubit real rotation, in radians."""

    psi: float
    theta: float
    phi: float
    alpha: float
    beta: float
    gamma: float

    def as_array(self) -> np.ndarray:
        return np.array([self.psi, self.theta, self.phi, self.alpha, self.beta, self.gamma])


def so4_matrix(angles: np.ndarray) -> np.ndarray:
    """SO(4) element exp(sum_a angles[a] * A_a) over the six elementary
    antisymmetric generators, one per index pair of the 4x4 in the order
    (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).

    The exponential is evaluated through the eigendecomposition of the
    Hermitian matrix iA (norm-independent cost, exact up to roundoff); the
    result is real orthogonal, so the imaginary dirt is dropped."""
    gen = np.zeros((4, 4))
    for lam, (i, j) in zip(angles, _SO4_PAIRS):
        gen[i, j] += lam
        gen[j, i] -= lam
    w, u = np.linalg.eigh(1j * gen)
    v = (u * np.exp(-1j * w)) @ u.conj().T
    return v.real.astype(np.complex128)


def so4_gate(p: So4Params) -> np.ndarray:
    return so4_matrix(p.as_array())


def singlet_prep(i: int = 0, j: int = 1, n_qubits: int = 2) -> Circuit:
    """Fragment turning |0>_i |0>_j into (|01> - |10>)/sqrt(2): X on both,
    Hadamard on i, then CX with control i."""
    frag = Circuit(n_qubits)
    frag.add((i,), X)
    frag.add((j,), X)
    frag.add((i,), H)
    frag.add((i, j), CX)
    return frag


def global_flip(L: int) -> Circuit:
    """X on every qubit."""
    if L < 1:
        raise ValueError("L must be >= 1")
    frag = Circuit(L)
    for q in range(L):
        frag.add((q,), X)
    return frag


S = np.array([[1, 0], [0, 1j]], dtype=np.complex128)
SDG = S.conj().T


def eswap_decomposed(theta: float, i: int = 0, j: int = 1, n_qubits: int = 2) -> Circuit:
    """eSWAP(theta) as 8 one-qubit gates and 3 CX, equal to eswap(theta) up
    to a global phase.

    The CNOTs alternate control qubits; the constant Clifford frame and the
    affine angle map were solved numerically against the matrix definition
    (a Hadamard-free variant of the canonical three-CNOT form) and are pinned
    by the phase-equivalence tests.
    """
    m = np.pi / 2 - theta / 2
    frag = Circuit(n_qubits)
    frag.add((i,), X)
    frag.add((j,), SDG)
    frag.add((j, i), CX)
    frag.add((i,), rz(-theta / 2))
    frag.add((j,), ry(m))
    frag.add((i, j), CX)
    frag.add((i,), rz(np.pi / 2))
    frag.add((j,), ry(m))
    frag.add((j, i), CX)
    frag.add((i,), S)
    frag.add((j,), X)
    return frag


def phase_aligned(candidate: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """candidate divided by the unit phase aligning it to reference, read off
    the first reference entry with modulus > 1e-8."""
    flat_ref = reference.ravel()
    k = int(np.argmax(np.abs(flat_ref) > 1e-8))
    ph = candidate.ravel()[k] / flat_ref[k]
    if abs(ph) < 1e-8:
        raise ValueError("candidate vanishes where reference does not; no phase alignment")
    return candidate * (abs(ph) / ph)
