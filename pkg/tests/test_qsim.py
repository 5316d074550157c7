import numpy as np
import pytest

from nqklab.qsim import (
    X_GATE,
    Statevector,
    Su2Angles,
    apply_cnot,
    apply_controlled,
    apply_single_qubit,
    fidelity,
    prob_first_qubit_zero,
    su2_matrices,
    su2_matrix,
)
from tests import oracles


def random_state(rng, n):
    amps = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return Statevector(n, amps / np.linalg.norm(amps))


def basis(n, index):
    amps = np.zeros(2 ** n, dtype=complex)
    amps[index] = 1.0
    return Statevector(n, amps)


def equal_up_to_phase(a, b, tol=1e-12):
    return abs(abs(np.vdot(a, b)) - 1.0) < tol


class TestSu2Matrix:

    def test_zero_angles_give_identity(self):
        np.testing.assert_allclose(su2_matrix(Su2Angles(0.0, 0.0, 0.0)), np.eye(2), atol=1e-15)

    def test_pure_ry_pi(self):
        np.testing.assert_allclose(su2_matrix((0.0, np.pi, 0.0)), [[0, -1], [1, 0]], atol=1e-15)

    def test_matches_factor_product(self):
        angles = (np.pi / 2, np.pi / 2, np.pi / 2)
        np.testing.assert_allclose(su2_matrix(angles), oracles.zyz(angles), atol=1e-12)

    def test_random_angles_unitary(self, rng):
        gates = su2_matrices(rng.uniform(-10, 10, size=(50, 3)))
        for gate in gates:
            np.testing.assert_allclose(gate.conj().T @ gate, np.eye(2), atol=1e-12)
            assert abs(abs(np.linalg.det(gate)) - 1.0) < 1e-12

    def test_rejects_wrong_trailing_axis(self):
        with pytest.raises(ValueError):
            su2_matrices(np.zeros((4, 2)))


class TestStatevector:

    def test_length_must_match(self):
        with pytest.raises(ValueError):
            Statevector(2, np.ones(3))

    def test_rejects_unnormalised_amplitudes(self):
        with pytest.raises(ValueError, match="unit vectors"):
            Statevector.from_amplitudes([1, 1])

    def test_accepts_normalised_amplitudes(self):
        state = Statevector.from_amplitudes(np.ones(4) / 2)
        assert state.n_qubits == 2 and state.norm() == pytest.approx(1.0, abs=1e-15)

    def test_qubit_cap(self, monkeypatch):
        monkeypatch.setenv('NQK_MAX_QUBITS', '3')
        with pytest.raises(ValueError):
            Statevector.zero(4)

    def test_zero_state(self):
        state = Statevector.zero(3)
        assert state.amplitudes[0] == 1.0
        assert state.norm() == pytest.approx(1.0)


class TestApplySingleQubit:

    def test_flip_on_qubit_zero(self):
        out = apply_single_qubit(Statevector.zero(1), su2_matrix((0, np.pi, 0)), 0)
        assert equal_up_to_phase(out.amplitudes, [0, 1])

    def test_identity_on_qubit_one(self):
        out = apply_single_qubit(Statevector.zero(2), np.eye(2), 1)
        np.testing.assert_allclose(out.amplitudes, Statevector.zero(2).amplitudes)

    @pytest.mark.parametrize('target', [0, 1, 2])
    def test_matches_dense_oracle(self, rng, target):
        state = random_state(rng, 3)
        gate = su2_matrix(rng.uniform(-np.pi, np.pi, 3))
        out = apply_single_qubit(state, gate, target)
        expected = oracles.dense_1q(gate, target, 3) @ state.amplitudes
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-12)
        assert out.norm() == pytest.approx(1.0, abs=1e-10)

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            apply_single_qubit(Statevector.zero(2), np.eye(2), 2)


class TestApplyControlled:

    def test_zero_angles_are_identity(self, rng):
        state = random_state(rng, 3)
        out = apply_controlled(state, su2_matrix((0, 0, 0)), 2, 0)
        np.testing.assert_allclose(out.amplitudes, state.amplitudes, atol=1e-14)

    def test_control_set_flips_target(self):
        # |10>: qubit 1 set, basis index 2
        out = apply_controlled(basis(2, 2), su2_matrix((0, np.pi, 0)), 1, 0)
        assert equal_up_to_phase(out.amplitudes, basis(2, 3).amplitudes)

    @pytest.mark.parametrize('control,target', [(1, 0), (0, 1)])
    def test_matches_dense_oracle_two_qubits(self, rng, control, target):
        state = random_state(rng, 2)
        gate = su2_matrix(rng.uniform(-np.pi, np.pi, 3))
        out = apply_controlled(state, gate, control, target)
        expected = oracles.dense_controlled(gate, control, target, 2) @ state.amplitudes
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-12)

    @pytest.mark.parametrize('control,target', [(2, 0), (0, 2), (1, 2), (2, 1)])
    def test_matches_dense_oracle_three_qubits(self, rng, control, target):
        state = random_state(rng, 3)
        gate = su2_matrix(rng.uniform(-np.pi, np.pi, 3))
        out = apply_controlled(state, gate, control, target)
        expected = oracles.dense_controlled(gate, control, target, 3) @ state.amplitudes
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-12)

    def test_control_equals_target(self):
        with pytest.raises(ValueError):
            apply_controlled(Statevector.zero(2), np.eye(2), 1, 1)


class TestApplyCnot:

    def test_zero_state_unchanged(self):
        out = apply_cnot(Statevector.zero(2), 0, 1)
        np.testing.assert_allclose(out.amplitudes, Statevector.zero(2).amplitudes)

    def test_control_set_flips_target(self):
        # qubit 1 set -> index 2; flipping qubit 0 gives index 3
        out = apply_cnot(basis(2, 2), 1, 0)
        np.testing.assert_allclose(out.amplitudes, basis(2, 3).amplitudes)

    def test_agrees_with_controlled_x(self, rng):
        state = random_state(rng, 3)
        np.testing.assert_allclose(apply_cnot(state, 0, 2).amplitudes,
                                   apply_controlled(state, X_GATE, 0, 2).amplitudes, atol=1e-14)


def test_gate_sequence_matches_dense_product(rng):
    state = random_state(rng, 3)
    a = su2_matrix(rng.uniform(-np.pi, np.pi, 3))
    b = su2_matrix(rng.uniform(-np.pi, np.pi, 3))
    out = apply_controlled(apply_single_qubit(state, a, 1), b, 1, 0)
    dense = oracles.dense_controlled(b, 1, 0, 3) @ oracles.dense_1q(a, 1, 3)
    np.testing.assert_allclose(out.amplitudes, dense @ state.amplitudes, atol=1e-12)


class TestProbFirstQubitZero:

    def test_zero_state(self):
        assert prob_first_qubit_zero(Statevector.zero(3)) == pytest.approx(1.0)

    def test_plus_on_first_qubit(self):
        amps = np.zeros(4, dtype=complex)
        amps[0] = amps[1] = 1 / np.sqrt(2)
        assert prob_first_qubit_zero(Statevector(2, amps)) == pytest.approx(0.5)

    def test_matches_projector_trace(self, rng):
        state = random_state(rng, 3)
        projector = oracles.embed({0: oracles.P0}, 3)
        expected = np.vdot(state.amplitudes, projector @ state.amplitudes).real
        assert prob_first_qubit_zero(state) == pytest.approx(expected, abs=1e-12)


class TestFidelity:

    def test_self_fidelity(self, rng):
        state = random_state(rng, 2)
        assert fidelity(state, state) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert fidelity(basis(1, 0), basis(1, 1)) == 0.0

    def test_symmetric_and_phase_invariant(self, rng):
        a, b = random_state(rng, 2), random_state(rng, 2)
        expected = abs(np.conj(a.amplitudes) @ b.amplitudes) ** 2
        assert fidelity(a, b) == pytest.approx(expected, abs=1e-12)
        assert fidelity(b, a) == pytest.approx(expected, abs=1e-12)
        rotated = Statevector(2, np.exp(0.7j) * a.amplitudes)
        assert fidelity(rotated, b) == pytest.approx(expected, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            fidelity(Statevector.zero(1), Statevector.zero(2))


def test_random_circuits_match_dense_oracle(rng):
    """100 random gate sequences on up to three qubits."""
    for _ in range(100):
        n = int(rng.integers(1, 4))
        state = Statevector.zero(n)
        dense = np.eye(2 ** n, dtype=complex)
        for _ in range(int(rng.integers(1, 9))):
            gate = su2_matrix(rng.uniform(-np.pi, np.pi, 3))
            target = int(rng.integers(n))
            if n > 1 and rng.random() < 0.5:
                control = int(rng.choice([q for q in range(n) if q != target]))
                state = apply_controlled(state, gate, control, target)
                dense = oracles.dense_controlled(gate, control, target, n) @ dense
            else:
                state = apply_single_qubit(state, gate, target)
                dense = oracles.dense_1q(gate, target, n) @ dense
        np.testing.assert_allclose(state.amplitudes, dense[:, 0], atol=1e-12)
