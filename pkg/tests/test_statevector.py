import numpy as np
import pytest
from scipy import stats

from ahcvqe import ansatz, gates
from ahcvqe.statevector import (
    StateVector,
    apply_gate,
    inner_product,
    new_zero_state,
    partial_trace,
    sample_bitstrings,
)


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(n, amps / np.linalg.norm(amps))


class TestNewZeroState:
    def test_single_qubit(self):
        np.testing.assert_array_equal(new_zero_state(1).amplitudes, [1, 0])

    def test_two_qubits(self):
        np.testing.assert_array_equal(new_zero_state(2).amplitudes, [1, 0, 0, 0])

    def test_four_qubits(self):
        st = new_zero_state(4)
        assert st.amplitudes[0] == 1.0
        assert abs(st.norm() - 1.0) < 1e-15

    @pytest.mark.parametrize("n", [0, -1, 25])
    def test_out_of_range(self, n):
        with pytest.raises(ValueError):
            new_zero_state(n)


class TestApplyGate:
    def test_x_flips_qubit0(self):
        st = apply_gate(new_zero_state(2), gates.X, (0,))
        np.testing.assert_allclose(st.amplitudes, [0, 1, 0, 0], atol=1e-15)

    def test_hadamard(self):
        st = apply_gate(new_zero_state(1), gates.H, (0,))
        np.testing.assert_allclose(st.amplitudes, [1, 1] / np.sqrt(2), atol=1e-15)

    def test_cx_control_on_first_target(self):
        # |01> in site order means qubit 0 is set: basis index 1
        st = new_zero_state(2)
        st.amplitudes[:] = [0, 1, 0, 0]
        out = apply_gate(st, gates.CX, (0, 1))
        np.testing.assert_allclose(out.amplitudes, [0, 0, 0, 1], atol=1e-15)

    def test_duplicate_targets(self):
        with pytest.raises(IndexError):
            apply_gate(new_zero_state(2), gates.SWAP, (1, 1))

    def test_out_of_range_target(self):
        with pytest.raises(IndexError):
            apply_gate(new_zero_state(2), gates.X, (2,))

    def test_non_unitary_rejected_in_test_mode(self):
        with pytest.raises(ValueError, match="unitary"):
            apply_gate(new_zero_state(1), np.array([[1, 0], [0, 2.0]]), (0,))

    def test_norm_preserved_by_random_circuit(self):
        rng = np.random.default_rng(7)
        st = random_state(6, 3)
        for _ in range(40):
            q = tuple(rng.choice(6, size=2, replace=False))
            st = apply_gate(st, gates.eswap(rng.uniform(0, 2 * np.pi)), q)
            st = apply_gate(st, gates.H, (int(rng.integers(6)),))
        assert abs(st.norm() - 1.0) < 1e-10

    def test_embedding_matches_qubit_swapped_matrix(self):
        # gate on (i, j) equals its qubit-swapped matrix on (j, i)
        rng = np.random.default_rng(11)
        m = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
        swapped = gates.SWAP @ m @ gates.SWAP
        st = random_state(5, 5)
        a = apply_gate(st, m, (1, 3))
        b = apply_gate(st, swapped, (3, 1))
        np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-12)

    def test_symmetric_gate_target_order_irrelevant(self):
        st = random_state(4, 9)
        u = gates.eswap(0.773)
        a = apply_gate(st, u, (0, 2))
        b = apply_gate(st, u, (2, 0))
        np.testing.assert_array_equal(a.amplitudes, b.amplitudes)


class TestInnerProduct:
    def test_self_overlap(self):
        st = random_state(5, 1)
        assert abs(inner_product(st, st) - 1.0) < 1e-12

    def test_zero_x_zero(self):
        zero = new_zero_state(1)
        assert inner_product(zero, apply_gate(zero, gates.X, (0,))) == 0

    def test_singlet_normalized(self):
        s = gates.singlet_prep(0, 1, 2).run()
        assert abs(inner_product(s, s) - 1.0) < 1e-14

    def test_conjugate_linear_in_first(self):
        a, b = random_state(4, 2), random_state(4, 3)
        assert abs(inner_product(a, b) - np.conj(inner_product(b, a))) < 1e-14

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            inner_product(new_zero_state(2), new_zero_state(3))


class TestPartialTrace:
    def test_product_state(self):
        rho = partial_trace(new_zero_state(2), {0})
        np.testing.assert_allclose(rho.elements, np.diag([1.0, 0.0]), atol=1e-15)

    def test_singlet_half(self):
        s = gates.singlet_prep(0, 1, 2).run()
        rho = partial_trace(s, {0})
        np.testing.assert_allclose(rho.elements, np.eye(2) / 2, atol=1e-14)

    def test_crossing_singlets_of_phi_s(self):
        # cutting |phi_s> at L=8 between sites 3|4 severs the (3,4) and (7,0)
        # singlets: four nonzero eigenvalues of 1/4 each
        st = ansatz.build_initialization(ansatz.InitKind.S, 8).run()
        lams = partial_trace(st, {0, 1, 2, 3}).eigenvalues()
        np.testing.assert_allclose(lams[:4], 0.25, atol=1e-12)
        np.testing.assert_allclose(lams[4:], 0.0, atol=1e-12)

    def test_single_crossing_singlet_of_phi00(self):
        # |phi_00> at L=8 has exactly one singlet over the 3|4 cut
        st = ansatz.build_initialization(ansatz.InitKind.E00, 8).run()
        lams = partial_trace(st, {0, 1, 2, 3}).eigenvalues()
        np.testing.assert_allclose(lams[:2], 0.5, atol=1e-12)
        np.testing.assert_allclose(lams[2:], 0.0, atol=1e-12)

    def test_pure_product_cut_is_rank_one(self):
        st = new_zero_state(6)
        for q in range(6):
            st = apply_gate(st, gates.ry(0.3 + 0.2 * q), (q,))
        for keep in ({0}, {1, 4}, {0, 2, 3}):
            lams = partial_trace(st, keep).eigenvalues()
            assert abs(lams[0] - 1.0) < 1e-10

    def test_hermitian_unit_trace(self):
        rho = partial_trace(random_state(6, 8), {1, 3, 4}).elements
        assert np.max(np.abs(rho - rho.conj().T)) < 1e-10
        assert abs(np.trace(rho) - 1.0) < 1e-10

    @pytest.mark.parametrize("keep", [set(), {0, 1, 2}])
    def test_empty_or_full_keep(self, keep):
        with pytest.raises(ValueError):
            partial_trace(new_zero_state(3), keep)


class TestSampling:
    def test_zero_state(self):
        assert np.all(sample_bitstrings(new_zero_state(4), 100, seed=0) == 0)

    def test_plus_state_binomial(self):
        plus = apply_gate(new_zero_state(1), gates.H, (0,))
        shots = 8192
        ones = sample_bitstrings(plus, shots, seed=42).mean()
        assert abs(ones - 0.5) <= 3 * np.sqrt(0.25 / shots)

    def test_seed_reproducibility(self):
        st = random_state(5, 21)
        a = sample_bitstrings(st, 500, seed=9)
        b = sample_bitstrings(st, 500, seed=9)
        np.testing.assert_array_equal(a, b)

    def test_requires_positive_shots(self):
        with pytest.raises(ValueError):
            sample_bitstrings(new_zero_state(2), 0, seed=0)

    def test_chi_square_against_born_rule(self):
        st = random_state(3, 123)
        shots = 100_000
        samples = sample_bitstrings(st, shots, seed=77)
        counts = np.bincount(samples, minlength=8)
        expected = st.probabilities() * shots
        _, pvalue = stats.chisquare(counts, expected)
        assert pvalue > 0.01
