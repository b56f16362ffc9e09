"""Measured quantities: energy, string operator, on-site magnetization, spin
correlations, fidelity, and entanglement spectra."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .spectra import SparseOperator
from .statevector import (
    DensityMatrix,
    StateVector,
    inner_product,
    partial_trace,
    schmidt_eigenvalues,
)

log = logging.getLogger(__name__)

IMAG_TOL = 1e-10
ZERO_EIGENVALUE_CUTOFF = 1e-12


def energy(state: StateVector, H: SparseOperator) -> float:
    """<psi|H|psi>, asserting the imaginary residue is below 1e-10."""
    if state.n_qubits != H.n_qubits:
        raise ValueError(f"state has {state.n_qubits} qubits, operator {H.n_qubits}")
    val = H.expectation(state.amplitudes)
    if abs(val.imag) > IMAG_TOL:
        raise ValueError(f"energy has imaginary residue {val.imag:.2e}")
    return val.real


@dataclass(frozen=True)
class StringOperatorSpec:
    """String operator between unitcells k and k+d; unitcell l covers sites
    (2l, 2l+1)."""

    d: int
    k: int = 0

    def validate(self, L: int) -> None:
        n_cells = L // 2
        if self.k < 0 or self.d < 1 or self.k + self.d > n_cells - 1:
            raise ValueError(f"string operator (k={self.k}, d={self.d}) out of range for {n_cells} cells")


def _site_sz(z: np.ndarray, site: int) -> np.ndarray:
    return 0.5 - ((z >> site) & 1)


def string_values(L: int, spec: StringOperatorSpec) -> np.ndarray:
    """Diagonal values of the string operator over all basis states: the end
    cells contribute their total S^z, each interior cell exp(i pi S^z_cell),
    which equals -Z_{2l} Z_{2l+1}."""
    spec.validate(L)
    z = np.arange(1 << L, dtype=np.int64)
    vals = _site_sz(z, 2 * spec.k) + _site_sz(z, 2 * spec.k + 1)
    for cell in range(spec.k + 1, spec.k + spec.d):
        za = 1.0 - 2.0 * ((z >> (2 * cell)) & 1)
        zb = 1.0 - 2.0 * ((z >> (2 * cell + 1)) & 1)
        vals *= -za * zb
    last = spec.k + spec.d
    vals *= _site_sz(z, 2 * last) + _site_sz(z, 2 * last + 1)
    return vals


def string_expectation(state: StateVector, spec: StringOperatorSpec) -> float:
    """<O_str(d)> evaluated as a diagonal function over bit strings."""
    return float(np.dot(state.probabilities(), string_values(state.n_qubits, spec)))


def string_operator_matrix(L: int, spec: StringOperatorSpec) -> sp.csr_matrix:
    """The string operator assembled from per-site 2x2 factors (independent
    code path used to cross-check string_expectation): S^z_cell at both ends,
    exp(i pi S^z_site) = i Z on every interior site."""
    spec.validate(L)
    sz = sp.csr_matrix(np.diag([0.5, -0.5]))
    iz = sp.csr_matrix(np.diag([1j, -1j]))
    one = sp.identity(2, format="csr")

    def embed(factors: dict[int, sp.csr_matrix]) -> sp.csr_matrix:
        out = sp.identity(1, format="csr")
        for site in range(L):
            out = sp.kron(factors.get(site, one), out, format="csr")
        return out

    interior = {}
    for cell in range(spec.k + 1, spec.k + spec.d):
        interior[2 * cell] = iz
        interior[2 * cell + 1] = iz
    total = sp.csr_matrix((1 << L, 1 << L), dtype=complex)
    for end_a in (2 * spec.k, 2 * spec.k + 1):
        for end_b in (2 * (spec.k + spec.d), 2 * (spec.k + spec.d) + 1):
            total = total + embed({end_a: sz, end_b: sz, **interior})
    return total


def onsite_magnetization(state: StateVector) -> np.ndarray:
    """<S^z_i> for every site."""
    probs = state.probabilities()
    z = np.arange(probs.size, dtype=np.int64)
    return np.array([np.dot(probs, _site_sz(z, i)) for i in range(state.n_qubits)])


def spin_correlation(state: StateVector, i: int, j: int) -> float:
    """<S^z_i S^z_j>."""
    if i == j:
        raise ValueError("spin_correlation needs two distinct sites")
    probs = state.probabilities()
    z = np.arange(probs.size, dtype=np.int64)
    return float(np.dot(probs, _site_sz(z, i) * _site_sz(z, j)))


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|."""
    return abs(inner_product(a, b))


@dataclass
class EntanglementSpectrum:
    """Levels xi(i) = -ln(lambda_i) of a reduced density matrix.

    eigenvalues holds the full descending spectrum; levels holds -ln of the
    eigenvalues above the numerical-zero cutoff, ascending. n_dropped counts
    eigenvalues at or below the cutoff (excluded from degeneracy analysis).
    """

    eigenvalues: np.ndarray
    levels: np.ndarray
    keep: tuple[int, ...]
    n_dropped: int

    @property
    def nonzero_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues[: self.eigenvalues.size - self.n_dropped]


def _spectrum_from_eigenvalues(lams: np.ndarray, keep, cutoff: float) -> EntanglementSpectrum:
    positive = lams[lams > cutoff]
    n_dropped = lams.size - positive.size
    if n_dropped and lams.min() < -10 * cutoff:
        log.info("dropped %d non-positive eigenvalue(s), lowest %.3e",
                 n_dropped, lams.min())
    return EntanglementSpectrum(
        eigenvalues=lams,
        levels=np.sort(-np.log(positive)),
        keep=tuple(keep),
        n_dropped=n_dropped,
    )


def spectrum_of_density(rho: np.ndarray, keep: tuple[int, ...] = (),
                        cutoff: float = ZERO_EIGENVALUE_CUTOFF) -> EntanglementSpectrum:
    """Entanglement spectrum of an explicit (Hermitian) density matrix;
    eigenvalues at or below `cutoff` are dropped from the levels."""
    return _spectrum_from_eigenvalues(np.linalg.eigvalsh(rho)[::-1], keep, cutoff)


def entanglement_spectrum(state: StateVector, keep) -> EntanglementSpectrum:
    """Entanglement spectrum across the bipartition (keep | rest), computed
    from the Schmidt values of the pure state (the well-conditioned route to
    the reduced-density-matrix eigenvalues)."""
    lams = schmidt_eigenvalues(state, keep)
    return _spectrum_from_eigenvalues(lams, tuple(sorted(set(keep))), ZERO_EIGENVALUE_CUTOFF)


def half_cut(L: int) -> tuple[int, ...]:
    """Kept qubits {0 .. L/2-1}: bipartition exactly at the chain center."""
    return tuple(range(L // 2))


def reduced_density(state: StateVector, keep) -> DensityMatrix:
    return partial_trace(state, keep)
