import numpy as np
import pytest

from ahcvqe import gates, observables
from ahcvqe.ansatz import AnsatzSpec, InitKind, build_ansatz, build_initialization
from ahcvqe.circuit import Circuit
from ahcvqe.emulator import (
    EmptySelectionError,
    NoiseKind,
    NoiseModel,
    ShotBatch,
    estimate_diagonal,
    postselect,
    run_noisy,
    tomography_2q,
)
from ahcvqe.observables import StringOperatorSpec, string_expectation, string_values
from ahcvqe.statevector import partial_trace, sample_bitstrings

BITFLIP = NoiseModel(NoiseKind.BITFLIP, 0.01)
CLEAN = NoiseModel()


def eswap_circuit(L, jp_init=InitKind.S, depth=1, seed=0):
    spec = AnsatzSpec(L, jp_init, depth)
    theta = np.random.default_rng(seed).uniform(0, 2 * np.pi, spec.n_parameters)
    return build_ansatz(spec), theta


class TestRunNoisy:
    def test_noiseless_matches_statevector_sampling(self):
        circ, theta = eswap_circuit(8)
        batch = run_noisy(circ, CLEAN, 512, 2, seed=5, theta=theta)
        state = circ.run(theta)
        direct = sample_bitstrings(state, 512, seed=0)
        # same distribution: compare empirical means of a diagonal observable
        vals = string_values(8, StringOperatorSpec(d=3))
        assert abs(np.mean(vals[batch.bitstrings[0]]) - np.mean(vals[direct])) < 0.2

    def test_full_flip_probability_on_single_cx(self):
        circ = Circuit(2)
        circ.add((0, 1), gates.CX)
        batch = run_noisy(circ, NoiseModel(NoiseKind.BITFLIP, 1.0), 64, 3, seed=1)
        for rep in batch.bitstrings:
            assert np.all(rep == 0b11)

    def test_violation_fraction_grows_with_p(self):
        circ, theta = eswap_circuit(8)
        fractions = []
        for p in (0.005, 0.01, 0.02):
            batch = run_noisy(circ, NoiseModel(NoiseKind.BITFLIP, p), 4096, 4,
                              seed=7, theta=theta)
            samples = np.concatenate(batch.bitstrings).astype(np.uint64)
            fractions.append(np.mean(np.bitwise_count(samples) != 4))
        assert fractions[0] < fractions[1] < fractions[2]

    def test_deterministic_given_seed(self):
        circ, theta = eswap_circuit(8)
        a = run_noisy(circ, BITFLIP, 256, 2, seed=9, theta=theta)
        b = run_noisy(circ, BITFLIP, 256, 2, seed=9, theta=theta)
        for x, y in zip(a.bitstrings, b.bitstrings):
            np.testing.assert_array_equal(x, y)


class TestPostselect:
    def test_noiseless_batch_fully_retained(self):
        circ, theta = eswap_circuit(8)
        batch = run_noisy(circ, CLEAN, 1024, 3, seed=2, theta=theta)
        selected = postselect(batch, 0)
        assert selected.retention == [1.0, 1.0, 1.0]
        for x, y in zip(batch.bitstrings, selected.bitstrings):
            np.testing.assert_array_equal(x, y)

    def test_boundary_sector_retained(self):
        circ = build_initialization(InitKind.E00, 8)
        batch = run_noisy(circ, CLEAN, 512, 2, seed=3)
        selected = postselect(batch, 1)
        assert selected.retention == [1.0, 1.0]

    def test_empty_selection_raises(self):
        circ = build_initialization(InitKind.E00, 8)
        batch = run_noisy(circ, CLEAN, 128, 2, seed=4)
        with pytest.raises(EmptySelectionError):
            postselect(batch, -4)  # all-down sector unreachable

    def test_inexpressible_sector(self):
        circ = build_initialization(InitKind.S, 8)
        batch = run_noisy(circ, CLEAN, 16, 1, seed=0)
        with pytest.raises(ValueError):
            postselect(batch, 0.25)

    def test_mitigation_beats_raw_string_estimate(self):
        circ, theta = eswap_circuit(8, seed=3)
        ideal = string_expectation(circ.run(theta), StringOperatorSpec(d=3))
        batch = run_noisy(circ, BITFLIP, 8192, 10, seed=11, theta=theta)
        selected = postselect(batch, 0)
        vals = string_values(8, StringOperatorSpec(d=3))
        wins = 0
        for raw, post in zip(batch.bitstrings, selected.bitstrings):
            if abs(np.mean(vals[post]) - ideal) < abs(np.mean(vals[raw]) - ideal):
                wins += 1
        assert wins >= 8


class TestEstimateDiagonal:
    def test_constant_observable(self):
        batch = ShotBatch(4, [np.zeros(10, dtype=int)] * 3, 10, 3, 0)
        mean, err = estimate_diagonal(batch, np.ones(16))
        assert mean == 1.0 and err == 0.0

    def test_statistical_consistency_noiseless(self):
        circ = build_initialization(InitKind.S, 8)
        batch = run_noisy(circ, CLEAN, 8192, 10, seed=21)
        spec = StringOperatorSpec(d=3)
        mean, err = estimate_diagonal(batch, string_values(8, spec))
        exact = string_expectation(circ.run(), spec)
        assert abs(mean - exact) <= 3 * err

    def test_sz_profile_within_three_sigma_per_site(self):
        circ, theta = eswap_circuit(8, InitKind.E00, seed=5)
        ideal = observables.onsite_magnetization(circ.run(theta))
        batch = run_noisy(circ, CLEAN, 8192, 10, seed=29, theta=theta)
        z = np.arange(256, dtype=np.int64)
        for site in range(8):
            table = 0.5 - ((z >> site) & 1).astype(float)
            mean, err = estimate_diagonal(batch, table)
            assert abs(mean - ideal[site]) <= 3 * max(err, 1e-6)

    def test_unbiased_over_many_seeds(self):
        circ, theta = eswap_circuit(4, InitKind.D, seed=8)
        exact = observables.onsite_magnetization(circ.run(theta))[0] * 2  # <Z_0>
        vals = 1.0 - 2.0 * (np.arange(16) & 1).astype(float)
        means, errs = [], []
        for seed in range(50):
            batch = run_noisy(circ, CLEAN, 256, 2, seed=seed, theta=theta)
            m, e = estimate_diagonal(batch, vals)
            means.append(m)
            errs.append(e)
        grand = np.mean(means)
        pooled = np.sqrt(np.mean(np.square(errs)) / len(means))
        assert abs(grand - exact) < 4 * pooled

    def test_requires_two_reps(self):
        batch = ShotBatch(2, [np.zeros(4, dtype=int)], 4, 1, 0)
        with pytest.raises(ValueError):
            estimate_diagonal(batch, np.ones(4))


class TestTomography:
    def test_dimer_left_pair_is_singlet_projector(self):
        circ = build_initialization(InitKind.D, 4)
        res = tomography_2q(circ, CLEAN, (0, 1), shots=8192, reps=10, seed=5)
        s = np.zeros(4, dtype=complex)
        s[2], s[1] = 1 / np.sqrt(2), -1 / np.sqrt(2)
        proj = np.outer(s, s.conj())
        assert np.max(np.abs(res.raw - proj)) < 0.02

    def test_boundary_state_left_pair(self):
        # qubit 0 pinned to |0>, qubit 1 half of a singlet
        circ = build_initialization(InitKind.E00, 4)
        res = tomography_2q(circ, CLEAN, (0, 1), shots=8192, reps=10, seed=6)
        expected = np.kron(np.eye(2) / 2, np.diag([1.0, 0.0]))
        assert np.max(np.abs(res.raw - expected)) < 0.02

    def test_exact_mode_reproduces_partial_trace(self):
        circ, theta = eswap_circuit(8, InitKind.E00, depth=2, seed=13)
        res = tomography_2q(circ, CLEAN, (2, 5), shots=None, reps=1, seed=0, theta=theta)
        rho = partial_trace(circ.run(theta), (2, 5)).elements
        assert np.max(np.abs(res.raw - rho)) < 1e-12

    def test_mitigated_is_real_symmetric(self):
        circ, theta = eswap_circuit(4, InitKind.D, seed=2)
        res = tomography_2q(circ, BITFLIP, (0, 1), shots=2048, reps=5, seed=8, theta=theta)
        assert np.isrealobj(res.mitigated)
        np.testing.assert_allclose(res.mitigated, res.mitigated.T, atol=1e-14)
        assert abs(np.trace(res.mitigated) - 1.0) < 0.05

    def test_distinct_qubits_required(self):
        circ = build_initialization(InitKind.D, 4)
        with pytest.raises(ValueError):
            tomography_2q(circ, CLEAN, (1, 1), shots=16, reps=2, seed=0)
