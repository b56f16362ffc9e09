"""Shot-based measurement emulation: an injectable bit-flip noise channel,
total-S^z post-selection, and two-qubit linear-inversion tomography.

Noise uses the stochastic trajectory method: every shot draws its own flip
pattern (an X on each qubit touched by each two-qubit gate, independently
with probability p). Shots sharing a pattern are evolved once and sampled
together, so the clean majority costs a single evolution per repetition.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import gates
from .circuit import Circuit, GateOp
from .statevector import apply_gate_inplace, new_zero_state

_SEED_STRIDE = 1000003  # offsets derived sub-seeds (tomography settings)


class NoiseKind(enum.Enum):
    NONE = "none"
    BITFLIP = "bitflip"


@dataclass(frozen=True)
class NoiseModel:
    kind: NoiseKind = NoiseKind.NONE
    p: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"flip probability must be in [0, 1], got {self.p}")

    @property
    def active(self) -> bool:
        return self.kind is NoiseKind.BITFLIP and self.p > 0.0


class EmptySelectionError(RuntimeError):
    """Post-selection retained zero shots in some repetition."""


@dataclass
class ShotBatch:
    n_qubits: int
    bitstrings: list[np.ndarray]
    shots: int
    reps: int
    seed: int
    retention: list[float] | None = None

    def __post_init__(self):
        if self.reps < 1 or len(self.bitstrings) != self.reps:
            raise ValueError("need one bitstring array per repetition, reps >= 1")


def _flip_events(circuit: Circuit) -> list[tuple[int, int]]:
    """(op position, touched qubit) for every qubit of every two-qubit gate."""
    events = []
    for pos, op in enumerate(circuit.ops):
        if len(op.targets) == 2:
            events.extend((pos, q) for q in op.targets)
    return events


def _evolve_with_flips(circuit, mats, flips, events, n):
    """One trajectory: standard gates plus an X after each flagged event."""
    amps = new_zero_state(n).amplitudes
    by_pos: dict[int, list[int]] = {}
    for flagged, (pos, q) in zip(flips, events):
        if flagged:
            by_pos.setdefault(pos, []).append(q)
    for pos, (op, mat) in enumerate(zip(circuit.ops, mats)):
        apply_gate_inplace(amps, mat, op.targets, n)
        for q in by_pos.get(pos, ()):
            apply_gate_inplace(amps, gates.X, (q,), n)
    return amps


def run_noisy(circuit: Circuit, noise: NoiseModel, shots: int, reps: int,
              seed: int, theta: np.ndarray | None = None) -> ShotBatch:
    """Sample `shots` bitstrings per repetition under the trajectory noise
    channel; repetition r uses the deterministically derived rng (seed, r)."""
    if shots < 1 or reps < 1:
        raise ValueError("shots and reps must be >= 1")
    n = circuit.n_qubits
    mats = [op.bound_matrix(theta) for op in circuit.ops]
    events = _flip_events(circuit)
    per_rep = []
    for rep in range(reps):
        rng = np.random.default_rng([seed, rep])
        if not noise.active or not events:
            amps = new_zero_state(n).amplitudes
            for op, mat in zip(circuit.ops, mats):
                apply_gate_inplace(amps, mat, op.targets, n)
            probs = np.abs(amps) ** 2
            samples = rng.choice(probs.size, size=shots, p=probs / probs.sum())
        else:
            flips = rng.random((shots, len(events))) < noise.p
            patterns, counts = np.unique(flips, axis=0, return_counts=True)
            chunks = []
            for pattern, count in zip(patterns, counts):
                amps = _evolve_with_flips(circuit, mats, pattern, events, n)
                probs = np.abs(amps) ** 2
                chunks.append(rng.choice(probs.size, size=count, p=probs / probs.sum()))
            samples = np.concatenate(chunks)
        per_rep.append(samples)
    return ShotBatch(n, per_rep, shots, reps, seed)


def postselect(batch: ShotBatch, sz_total: float) -> ShotBatch:
    """Keep only the bitstrings whose total S^z matches the requested sector
    (popcount selection); records the per-rep retention fraction."""
    n_down = batch.n_qubits / 2 - sz_total
    if abs(n_down - round(n_down)) > 1e-12 or not 0 <= round(n_down) <= batch.n_qubits:
        raise ValueError(f"sector S^z={sz_total} not expressible for {batch.n_qubits} qubits")
    n_down = int(round(n_down))
    kept, retention = [], []
    for rep, samples in enumerate(batch.bitstrings):
        mask = np.bitwise_count(samples.astype(np.uint64)) == n_down
        if not mask.any():
            raise EmptySelectionError(f"repetition {rep} retained zero shots in sector {sz_total}")
        kept.append(samples[mask])
        retention.append(float(mask.mean()))
    return ShotBatch(batch.n_qubits, kept, batch.shots, batch.reps, batch.seed, retention)


def estimate_diagonal(batch: ShotBatch, observable) -> tuple[float, float]:
    """(mean of per-rep means, standard error over reps) of a diagonal
    observable, given either a vectorized callable over basis indices or the
    full table of diagonal values."""
    if batch.reps < 2:
        raise ValueError("error bars need at least 2 repetitions")
    if any(s.size == 0 for s in batch.bitstrings):
        raise ValueError("batch contains an empty repetition")
    if isinstance(observable, np.ndarray):
        table = observable
        rep_means = [float(table[s].mean()) for s in batch.bitstrings]
    else:
        rep_means = [float(np.mean(observable(s))) for s in batch.bitstrings]
    rep_means = np.array(rep_means)
    return float(rep_means.mean()), float(rep_means.std(ddof=1) / np.sqrt(batch.reps))


_PAULI = {"I": gates.I2, "X": gates.X, "Y": gates.Y, "Z": gates.Z}
_BASES = ("X", "Y", "Z")


@dataclass
class TomographyResult:
    raw: np.ndarray
    mitigated: np.ndarray
    pauli_table: dict[tuple[str, str], float] = field(default_factory=dict)


def _measurement_rotation(basis: str, qubit: int) -> list:
    """Ops rotating the measurement basis of `qubit` onto Z."""
    if basis == "Z":
        return []
    if basis == "X":
        return [((qubit,), gates.H)]
    return [((qubit,), gates.SDG), ((qubit,), gates.H)]  # Y


def _parity_values(samples: np.ndarray, qubits: tuple[int, ...]) -> np.ndarray:
    out = np.ones(samples.size)
    for q in qubits:
        out *= 1.0 - 2.0 * ((samples >> q) & 1)
    return out


def tomography_2q(circuit: Circuit, noise: NoiseModel, qubits, shots: int | None,
                  reps: int, seed: int, theta: np.ndarray | None = None) -> TomographyResult:
    """All 16 two-qubit Pauli expectations on the target pair, reconstructed
    into rho = (1/4) sum <P> P; the mitigated matrix is the real (symmetric)
    part of rho.

    shots=None computes exact expectations from the clean statevector (the
    infinite-shot mode used to separate statistical from systematic effects).
    Pauli factors equal to I are read from the Z-basis setting of that qubit.
    """
    qa, qb = sorted(qubits)
    if qa == qb:
        raise ValueError("tomography needs two distinct qubits")
    n = circuit.n_qubits

    table: dict[tuple[str, str], float] = {("I", "I"): 1.0}
    if shots is None:
        amps = circuit.run(theta).amplitudes
        for pa in "IXYZ":
            for pb in "IXYZ":
                if (pa, pb) == ("I", "I"):
                    continue
                work = amps.copy()
                # kron(high, low): qa is the low bit of the reduced matrix
                if pa != "I":
                    apply_gate_inplace(work, _PAULI[pa], (qa,), n)
                if pb != "I":
                    apply_gate_inplace(work, _PAULI[pb], (qb,), n)
                table[(pa, pb)] = float(np.vdot(amps, work).real)
    else:
        setting_means: dict[tuple[str, str], dict[tuple[str, str], float]] = {}
        for si, ba in enumerate(_BASES):
            for sj, bb in enumerate(_BASES):
                extra = _measurement_rotation(ba, qa) + _measurement_rotation(bb, qb)
                measured = Circuit(n, list(circuit.ops) + [GateOp(t, m) for t, m in extra],
                                   circuit.n_params)
                batch = run_noisy(measured, noise, shots, reps,
                                  seed + _SEED_STRIDE * (3 * si + sj), theta)
                means = {}
                for (pa, qs_a) in (("I", ()), (ba, (qa,))):
                    for (pb, qs_b) in (("I", ()), (bb, (qb,))):
                        if (pa, pb) == ("I", "I"):
                            continue
                        rep_means = [float(_parity_values(s, qs_a + qs_b).mean())
                                     for s in batch.bitstrings]
                        means[(pa, pb)] = float(np.mean(rep_means))
                setting_means[(ba, bb)] = means
        for pa in "IXYZ":
            for pb in "IXYZ":
                if (pa, pb) == ("I", "I"):
                    continue
                ba = pa if pa != "I" else "Z"
                bb = pb if pb != "I" else "Z"
                table[(pa, pb)] = setting_means[(ba, bb)][(pa, pb)]

    rho = np.zeros((4, 4), dtype=np.complex128)
    for (pa, pb), val in table.items():
        rho += val * np.kron(_PAULI[pb], _PAULI[pa])
    rho /= 4.0
    mitigated = 0.5 * (rho.real + rho.real.T)
    return TomographyResult(raw=rho, mitigated=mitigated, pauli_table=table)
