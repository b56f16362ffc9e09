"""Natural-gradient-descent VQE.

Gradients and the metric tensor are assembled from derivative states. For
the eSWAP family the derivative state is exact via the parameter-shift rule
|dPsi/dtheta_i> = |Psi(theta + pi e_i)> / 2 (the eSWAP generator has a +-1
spectrum); the SO(4) family uses central finite differences of the gate
matrix instead. Both reuse a forward sweep with cached prefix states so one
iteration costs O(gates^2) kernel calls rather than O(params * gates^2).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from . import gates
from .ansatz import AnsatzSpec, Family, build_ansatz
from .circuit import Circuit
from .spectra import SparseOperator
from .statevector import StateVector, apply_gate_inplace, new_zero_state

log = logging.getLogger(__name__)

ENERGY_INCREASE_TOL = 1e-9
MAX_HALVINGS = 5
MAX_RIDGE = 1e-2


class SingularMetricError(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimizerConfig:
    alpha: float = 0.01
    max_iters: int = 1000
    ridge: float = 1e-6
    grad_tol: float = 0.0
    seed: int = 0
    method: str = "ngd"  # "ngd" or plain "gd"
    fd_step: float = 1e-5

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")
        if self.method not in ("ngd", "gd"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass
class TraceRecord:
    iteration: int
    theta: np.ndarray
    energy: float
    grad_norm: float
    halvings: int = 0


@dataclass
class OptimizationTrace:
    records: list[TraceRecord] = field(default_factory=list)

    @property
    def final_theta(self) -> np.ndarray:
        return self.records[-1].theta

    @property
    def final_energy(self) -> float:
        return self.records[-1].energy

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])


def shifted_state(spec: AnsatzSpec, theta: np.ndarray, i: int) -> StateVector:
    """|Psi(theta + pi e_i)>; twice the derivative state (eSWAP family only)."""
    if spec.family is not Family.ESWAP:
        raise ValueError("the parameter-shift rule applies to the eSWAP family only")
    shifted = np.asarray(theta, dtype=float).copy()
    shifted[i] += np.pi
    return build_ansatz(spec).run(shifted)


def _run_suffix(circuit: Circuit, mats: list[np.ndarray], amps: np.ndarray, start: int) -> np.ndarray:
    n = circuit.n_qubits
    for op, mat in zip(circuit.ops[start:], mats[start:]):
        apply_gate_inplace(amps, mat, op.targets, n)
    return amps


def derivative_states(circuit: Circuit, theta: np.ndarray, family: Family,
                      fd_step: float = 1e-5):
    """(psi, D) with D[k] = |dPsi/dtheta_k> for every parameter slot.

    Gate matrices are bound once per call; each derivative reuses the cached
    prefix state of its gate and replays the shared suffix."""
    theta = np.asarray(theta, dtype=float)
    n = circuit.n_qubits
    mats = [op.bound_matrix(theta) for op in circuit.ops]
    amps = new_zero_state(n).amplitudes
    snaps, positions = [], []
    for pos, (op, mat) in enumerate(zip(circuit.ops, mats)):
        if op.params:
            snaps.append(amps.copy())
            positions.append(pos)
        apply_gate_inplace(amps, mat, op.targets, n)
    psi = amps

    D = np.empty((circuit.n_params, psi.size), dtype=np.complex128)
    for snap, pos in zip(snaps, positions):
        op = circuit.ops[pos]
        if family is Family.ESWAP:
            k = op.params[0]
            amps = snap.copy()
            # U(theta_k + pi) = -i SWAP U(theta_k): derivative = shifted / 2
            apply_gate_inplace(amps, gates.eswap(theta[k] + np.pi), op.targets, n)
            D[k] = _run_suffix(circuit, mats, amps, pos + 1)
            D[k] *= 0.5
        else:
            vals = np.array([theta[p] for p in op.params])
            for slot, k in enumerate(op.params):
                up, down = vals.copy(), vals.copy()
                up[slot] += fd_step
                down[slot] -= fd_step
                diff = (op.maker(*up) - op.maker(*down)) / (2 * fd_step)
                amps = snap.copy()
                apply_gate_inplace(amps, diff, op.targets, n)
                D[k] = _run_suffix(circuit, mats, amps, pos + 1)
    return psi, D


def _grad_from_derivatives(D: np.ndarray, hpsi: np.ndarray) -> np.ndarray:
    """dE/dtheta_i = 2 Re <dPsi_i| H |Psi>."""
    return 2.0 * (D.conj() @ hpsi).real


def _metric_from_derivatives(D: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Re[<dPsi_i|dPsi_j> - <dPsi_i|Psi><Psi|dPsi_j>] (Fubini-Study metric)."""
    overlap = D.conj() @ D.T
    v = D.conj() @ psi
    g = (overlap - np.outer(v, v.conj())).real
    return 0.5 * (g + g.T)


def gradient(spec: AnsatzSpec, theta: np.ndarray, H: SparseOperator) -> np.ndarray:
    """Parameter-shift energy gradient (eSWAP family)."""
    if spec.family is not Family.ESWAP:
        raise ValueError("use gradient_fd for the SO(4) family")
    circuit = build_ansatz(spec)
    psi, D = derivative_states(circuit, np.asarray(theta, dtype=float), spec.family)
    return _grad_from_derivatives(D, H.matvec(psi))


def metric(spec: AnsatzSpec, theta: np.ndarray) -> np.ndarray:
    """Real part of the parameter-space metric tensor from shifted-state
    overlaps; the diagonal is (1 - |<Psi(theta + pi e_i)|Psi>|^2) / 4."""
    if spec.family is not Family.ESWAP:
        raise ValueError("the shifted-state metric applies to the eSWAP family only")
    circuit = build_ansatz(spec)
    psi, D = derivative_states(circuit, np.asarray(theta, dtype=float), spec.family)
    return _metric_from_derivatives(D, psi)


def gradient_fd(spec: AnsatzSpec, theta: np.ndarray, H: SparseOperator,
                h: float = 1e-5) -> np.ndarray:
    """Central finite differences of E(theta); the SO(4) optimizer's gradient
    and the test oracle for the parameter-shift rule."""
    if not 1e-7 <= h <= 1e-3:
        raise ValueError(f"finite-difference step {h} outside [1e-7, 1e-3]")
    theta = np.asarray(theta, dtype=float)
    circuit = build_ansatz(spec)

    def en(t):
        amps = circuit.run(t).amplitudes
        return np.vdot(amps, H.matvec(amps)).real

    out = np.empty(theta.size)
    for i in range(theta.size):
        up, down = theta.copy(), theta.copy()
        up[i] += h
        down[i] -= h
        out[i] = (en(up) - en(down)) / (2 * h)
    return out


def ngd_step(theta: np.ndarray, grad: np.ndarray, G: np.ndarray,
             config: OptimizerConfig) -> np.ndarray:
    """theta - alpha * delta with (Re G + ridge I) delta = grad, solved by
    Cholesky; the ridge escalates tenfold on failure up to 1e-2."""
    delta = _solve_metric(G, grad, config.ridge)
    return theta - config.alpha * delta


def _solve_metric(G: np.ndarray, grad: np.ndarray, ridge: float) -> np.ndarray:
    eye = np.eye(G.shape[0])
    current = ridge
    while True:
        try:
            factor = la.cho_factor(G + current * eye)
            return la.cho_solve(factor, grad)
        except la.LinAlgError:
            nxt = max(current, 1e-8) * 10
            if nxt > MAX_RIDGE:
                raise SingularMetricError(
                    f"metric solve failed with ridge escalated to {current:g}")
            log.warning("metric not positive definite, escalating ridge to %g", nxt)
            current = nxt


def run_vqe(spec: AnsatzSpec, H: SparseOperator, config: OptimizerConfig,
            theta0: np.ndarray | None = None) -> OptimizationTrace:
    """NGD iterations from theta_0 = 0 (or the provided start), recording
    theta, energy, and gradient norm at every iteration."""
    m = spec.n_parameters
    theta = np.zeros(m) if theta0 is None else np.asarray(theta0, dtype=float).copy()
    if theta.shape != (m,):
        raise ValueError(f"theta0 has shape {theta.shape}, expected ({m},)")
    circuit = build_ansatz(spec)
    trace = OptimizationTrace()

    def en(amps):
        val = np.vdot(amps, H.matvec(amps))
        if not np.isfinite(val.real) or abs(val.imag) > 1e-8:
            raise ValueError(f"non-finite or complex energy {val} during VQE")
        return val.real

    psi = circuit.run(theta).amplitudes
    e_val = en(psi)
    if m == 0:
        trace.records.append(TraceRecord(0, theta.copy(), e_val, 0.0))
        return trace

    for it in range(config.max_iters):
        psi, D = derivative_states(circuit, theta, spec.family, config.fd_step)
        grad = _grad_from_derivatives(D, H.matvec(psi))
        gnorm = float(np.linalg.norm(grad))
        trace.records.append(TraceRecord(it, theta.copy(), e_val, gnorm))
        if config.grad_tol > 0 and gnorm <= config.grad_tol:
            return trace
        if config.method == "ngd":
            G = _metric_from_derivatives(D, psi)
            delta = _solve_metric(G, grad, config.ridge)
        else:
            delta = grad

        # fixed-alpha step, halving only if the energy would increase
        halvings = 0
        alpha = config.alpha
        while True:
            candidate = theta - alpha * delta
            e_new = en(circuit.run(candidate).amplitudes)
            if e_new <= e_val + ENERGY_INCREASE_TOL or halvings >= MAX_HALVINGS:
                if halvings >= MAX_HALVINGS and e_new > e_val + ENERGY_INCREASE_TOL:
                    candidate = theta - config.alpha * delta
                    e_new = en(circuit.run(candidate).amplitudes)
                    log.warning("iteration %d: energy increased %.3e after %d halvings; "
                                "accepting the raw step", it, e_new - e_val, halvings)
                break
            halvings += 1
            alpha /= 2
        if halvings:
            trace.records[-1].halvings = halvings
        theta, e_val = candidate, e_new

    psi, D = derivative_states(circuit, theta, spec.family, config.fd_step)
    gnorm = float(np.linalg.norm(_grad_from_derivatives(D, H.matvec(psi))))
    trace.records.append(TraceRecord(config.max_iters, theta.copy(), e_val, gnorm))
    return trace
