"""Dense statevector storage and kernels: gate application, inner products,
partial trace, and bitstring sampling.

Convention: basis index bit i is the computational state of qubit i
(little-endian), and qubit i corresponds to lattice site i. With this
convention ``format(index, f"0{n}b")`` prints sites right-to-left; reverse
the string to read in site order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

MAX_QUBITS = 24

# Unitarity checks on apply_gate are skipped on the release path for kernel
# speed; the test suite flips this on (see tests/conftest.py).
VALIDATE_UNITARY = False


@dataclass
class StateVector:
    """Pure state over 2**n_qubits complex amplitudes."""

    n_qubits: int
    amplitudes: np.ndarray

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass
class DensityMatrix:
    """Reduced density matrix over a subset of qubits."""

    n_qubits: int
    elements: np.ndarray

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues in descending order."""
        return np.linalg.eigvalsh(self.elements)[::-1]


def new_zero_state(n_qubits: int) -> StateVector:
    """All-registers-zero state |0...0>."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


@numba.njit(cache=True)
def _kernel_1q(amps, gate, t, n):
    half = 1 << (n - 1)
    s = 1 << t
    g00, g01, g10, g11 = gate[0, 0], gate[0, 1], gate[1, 0], gate[1, 1]
    for m in range(half):
        i0 = ((m >> t) << (t + 1)) | (m & (s - 1))
        i1 = i0 | s
        a0 = amps[i0]
        a1 = amps[i1]
        amps[i0] = g00 * a0 + g01 * a1
        amps[i1] = g10 * a0 + g11 * a1


@numba.njit(cache=True)
def _kernel_2q(amps, gate, t0, t1, n):
    # Pairwise amplitude gathering via stride arithmetic on the index bits.
    # Local basis order: first target is the low bit of the 4x4 index.
    lo, hi = (t0, t1) if t0 < t1 else (t1, t0)
    quarter = 1 << (n - 2)
    s0 = 1 << t0
    s1 = 1 << t1
    mlo = (1 << lo) - 1
    mhi = (1 << hi) - 1
    for m in range(quarter):
        t = ((m >> lo) << (lo + 1)) | (m & mlo)
        i00 = ((t >> hi) << (hi + 1)) | (t & mhi)
        i10 = i00 | s0
        i01 = i00 | s1
        i11 = i10 | s1
        a0, a1, a2, a3 = amps[i00], amps[i10], amps[i01], amps[i11]
        amps[i00] = gate[0, 0] * a0 + gate[0, 1] * a1 + gate[0, 2] * a2 + gate[0, 3] * a3
        amps[i10] = gate[1, 0] * a0 + gate[1, 1] * a1 + gate[1, 2] * a2 + gate[1, 3] * a3
        amps[i01] = gate[2, 0] * a0 + gate[2, 1] * a1 + gate[2, 2] * a2 + gate[2, 3] * a3
        amps[i11] = gate[3, 0] * a0 + gate[3, 1] * a1 + gate[3, 2] * a2 + gate[3, 3] * a3


def _check_targets(targets: tuple[int, ...], n: int) -> None:
    if len(set(targets)) != len(targets):
        raise IndexError(f"duplicate targets {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise IndexError(f"target {t} out of range for {n} qubits")


def is_unitary(gate: np.ndarray, tol: float = 1e-10) -> bool:
    d = gate.shape[0]
    return bool(np.allclose(gate @ gate.conj().T, np.eye(d), atol=tol))


def apply_gate_inplace(amps: np.ndarray, gate: np.ndarray, targets: tuple[int, ...], n: int) -> None:
    """Apply a 2x2 or 4x4 gate to the raw amplitude array, mutating it.

    Internal fast path shared by circuit execution; callers wanting the pure
    contract use apply_gate.
    """
    if len(targets) == 1:
        _kernel_1q(amps, np.ascontiguousarray(gate, dtype=np.complex128), targets[0], n)
    elif len(targets) == 2:
        _kernel_2q(amps, np.ascontiguousarray(gate, dtype=np.complex128), targets[0], targets[1], n)
    else:
        raise IndexError(f"gates act on 1 or 2 qubits, got targets {targets}")


def apply_gate(state: StateVector, gate: np.ndarray, targets: tuple[int, ...] | list[int]) -> StateVector:
    """Return the state transformed by `gate` embedded on `targets`.

    For a 4x4 gate on targets (i, j), qubit i is the low bit of the gate's
    basis index and qubit j the high bit.
    """
    targets = tuple(targets)
    _check_targets(targets, state.n_qubits)
    gate = np.asarray(gate, dtype=np.complex128)
    if gate.shape != (2 ** len(targets),) * 2:
        raise ValueError(f"gate shape {gate.shape} does not match {len(targets)} targets")
    if VALIDATE_UNITARY and not is_unitary(gate):
        raise ValueError("gate is not unitary within 1e-10")
    out = state.amplitudes.copy()
    apply_gate_inplace(out, gate, targets, state.n_qubits)
    return StateVector(state.n_qubits, out)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"size mismatch: {a.n_qubits} vs {b.n_qubits} qubits")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def bipartition_matrix(state: StateVector, keep) -> np.ndarray:
    """Amplitudes reshaped to a (2^|keep|, 2^rest) matrix whose row index is
    little-endian over the sorted kept qubits."""
    n = state.n_qubits
    kept = sorted(set(keep))
    if not kept or len(kept) >= n:
        raise ValueError("keep must be a nonempty proper subset of qubits")
    _check_targets(tuple(kept), n)
    # numpy axis for qubit q under C-order reshape is n-1-q; order kept axes
    # so the largest kept qubit is the most significant bit of the row index.
    kept_axes = [n - 1 - q for q in reversed(kept)]
    rest_axes = [ax for ax in range(n) if ax not in kept_axes]
    psi = state.amplitudes.reshape((2,) * n).transpose(kept_axes + rest_axes)
    return np.ascontiguousarray(psi).reshape(1 << len(kept), -1)


def partial_trace(state: StateVector, keep) -> DensityMatrix:
    """Reduced density matrix over the kept qubits (ordered ascending).

    The reduced matrix basis index is little-endian over the sorted kept
    qubits: bit k of the index is the state of the k-th smallest kept qubit.
    """
    psi = bipartition_matrix(state, keep)
    rho = psi @ psi.conj().T
    return DensityMatrix(int(np.log2(psi.shape[0])), rho)


def schmidt_eigenvalues(state: StateVector, keep) -> np.ndarray:
    """Squared Schmidt values across the (keep | rest) cut, descending.

    Identical to the eigenvalues of partial_trace(state, keep) but computed
    through an SVD, whose relative accuracy on small values is set by the
    singular value rather than its square."""
    sig = np.linalg.svd(bipartition_matrix(state, keep), compute_uv=False)
    return sig ** 2


def sample_bitstrings(state: StateVector, shots: int, seed: int) -> np.ndarray:
    """Draw i.i.d. basis indices from |amplitude|^2; same seed, same samples."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    rng = np.random.default_rng(seed)
    probs = state.probabilities()
    probs = probs / probs.sum()
    return rng.choice(probs.size, size=shots, p=probs)
