import numpy as np
import pytest

from nqklab.qsim import Su2Angles, prob_first_qubit_zero
from nqklab.reupload import (
    QnnParams,
    embed_1_to_n,
    encode_angles,
    encode_point,
    extend_params,
    init_params,
    n_encoding_gates,
    qnn_states,
    run_nqubit_qnn,
    run_single_qubit_qnn,
)
from tests import oracles


def random_params(rng, n, layers, topology='star'):
    return init_params(n, layers, rng, topology=topology, zero_couplings=False)


class TestEncodeAngles:

    def test_two_features_pad_third_angle(self):
        assert encode_angles([0.1, -0.2]) == [Su2Angles(0.1, -0.2, 0.0)]

    def test_six_features_two_triples(self):
        x = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6]
        assert encode_angles(x) == [Su2Angles(0.1, 0.2, 0.3), Su2Angles(0.4, 0.5, 0.6)]

    def test_four_features_zero_padding(self):
        assert encode_angles([0.1, 0.2, 0.3, 0.4]) == [Su2Angles(0.1, 0.2, 0.3), Su2Angles(0.4, 0.0, 0.0)]

    def test_gate_count(self):
        assert [n_encoding_gates(p) for p in (1, 2, 3, 4, 45, 64)] == [1, 1, 1, 2, 15, 22]

    def test_empty_features(self):
        with pytest.raises(ValueError):
            encode_angles([])

    def test_out_of_range_warns(self, caplog):
        encode_angles([2.0, 0.0])
        assert "outside [-1, 1]" in caplog.text


class TestQnnParams:

    def test_shapes_and_defaults(self):
        params = QnnParams(3, 2, np.zeros(18))
        assert params.theta.shape == (2, 3, 3)
        assert params.phi.shape == (2, 2, 3)
        assert params.n_parameters == 30

    def test_single_qubit_has_no_couplings(self):
        assert QnnParams(1, 4, np.zeros(12)).phi.size == 0

    def test_json_round_trip(self, rng):
        params = random_params(rng, 2, 3, topology='chain')
        back = QnnParams.from_json(params.to_json())
        np.testing.assert_array_equal(back.flat(), params.flat())
        assert back.topology == 'chain'

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            QnnParams(1, 1, [0.0, np.nan, 0.0])

    def test_arrays_are_read_only(self):
        params = QnnParams(1, 1, np.zeros(3))
        with pytest.raises(ValueError):
            params.theta[0, 0, 0] = 1.0


class TestSingleQubitQnn:

    @pytest.mark.parametrize('layers', [1, 2, 5])
    def test_zero_everything_stays_at_zero(self, layers):
        state = run_single_qubit_qnn(QnnParams(1, layers, np.zeros(3 * layers)), encode_point([0.0, 0.0]))
        np.testing.assert_allclose(state.amplitudes, [1.0, 0.0], atol=1e-15)

    def test_one_layer_is_two_matrix_product(self):
        x = [0.0, np.pi]
        state = run_single_qubit_qnn(QnnParams(1, 1, np.zeros(3)), encode_point(x))
        expected = oracles.zyz((0.0, 0.0, 0.0)) @ oracles.zyz((0.0, np.pi, 0.0)) @ np.array([1, 0])
        np.testing.assert_allclose(state.amplitudes, expected, atol=1e-12)

    def test_three_layers_match_six_matrices(self, rng):
        params = random_params(rng, 1, 3)
        x = rng.uniform(-1, 1, 2)
        psi = np.array([1, 0], dtype=complex)
        for layer in range(3):
            psi = oracles.zyz((x[0], x[1], 0.0)) @ psi
            psi = oracles.zyz(params.theta[layer, 0]) @ psi
        state = run_single_qubit_qnn(params, encode_point(x))
        np.testing.assert_allclose(state.amplitudes, psi, atol=1e-12)

    def test_requires_one_qubit(self, rng):
        with pytest.raises(ValueError):
            run_single_qubit_qnn(random_params(rng, 2, 1), encode_point([0.1, 0.2]))


class TestNQubitQnn:

    def test_one_qubit_matches_single_qubit_run(self, rng):
        params = random_params(rng, 1, 3)
        point = encode_point(rng.uniform(-1, 1, 2))
        np.testing.assert_array_equal(run_nqubit_qnn(params, point).amplitudes,
                                      run_single_qubit_qnn(params, point).amplitudes)

    @pytest.mark.parametrize('n,layers,p,topology', [
        (2, 1, 2, 'star'), (2, 3, 4, 'star'), (3, 2, 2, 'star'), (3, 2, 3, 'chain'), (3, 4, 5, 'chain'),
    ])
    def test_matches_dense_oracle(self, rng, n, layers, p, topology):
        params = random_params(rng, n, layers, topology)
        x = rng.uniform(-1, 1, p)
        state = run_nqubit_qnn(params, encode_point(x))
        expected = oracles.qnn_state(params.theta, params.phi, x, topology)
        np.testing.assert_allclose(state.amplitudes, expected, atol=1e-12)

    def test_zero_couplings_decouple_first_qubit(self, rng):
        single = random_params(rng, 1, 3)
        theta = np.concatenate([single.theta, rng.uniform(-np.pi, np.pi, (3, 1, 3))], axis=1)
        pair = QnnParams(2, 3, theta)
        for _ in range(10):
            point = encode_point(rng.uniform(-1, 1, 2))
            assert prob_first_qubit_zero(run_nqubit_qnn(pair, point)) == pytest.approx(
                prob_first_qubit_zero(run_single_qubit_qnn(single, point)), abs=1e-12)

    def test_batched_states_match_single_runs(self, rng):
        params = random_params(rng, 2, 2)
        X = rng.uniform(-1, 1, (5, 3))
        batch = qnn_states(params, X)
        for row, x in zip(batch, X):
            np.testing.assert_allclose(row, run_nqubit_qnn(params, encode_point(x)).amplitudes, atol=1e-14)

    def test_output_depends_on_features(self, rng):
        params = random_params(rng, 1, 2)
        h = 1e-5
        x = np.array([0.3, -0.2])
        p_plus = prob_first_qubit_zero(run_nqubit_qnn(params, encode_point(x + [h, 0])))
        p_minus = prob_first_qubit_zero(run_nqubit_qnn(params, encode_point(x - [h, 0])))
        assert abs(p_plus - p_minus) / (2 * h) > 1e-6

    def test_deterministic(self, rng):
        params = random_params(rng, 3, 2)
        point = encode_point([0.1, 0.5])
        np.testing.assert_array_equal(run_nqubit_qnn(params, point).amplitudes,
                                      run_nqubit_qnn(params, point).amplitudes)


class TestEmbedOneToN:

    def test_one_qubit_matches_qnn(self, rng):
        params = random_params(rng, 1, 3)
        point = encode_point(rng.uniform(-1, 1, 2))
        np.testing.assert_allclose(embed_1_to_n(params.theta[:, 0, :], point, 1).amplitudes,
                                   run_single_qubit_qnn(params, point).amplitudes, atol=1e-15)

    def test_zero_input_stays_at_zero(self):
        state = embed_1_to_n(np.zeros((2, 3)), encode_point([0.0, 0.0]), 2)
        np.testing.assert_allclose(state.amplitudes, [1, 0, 0, 0], atol=1e-15)

    @pytest.mark.parametrize('n,layers', [(2, 1), (3, 2), (3, 3)])
    def test_matches_dense_oracle(self, rng, n, layers):
        theta = rng.uniform(-np.pi, np.pi, (layers, 3))
        x = rng.uniform(-1, 1, 2)
        state = embed_1_to_n(theta, encode_point(x), n)
        np.testing.assert_allclose(state.amplitudes, oracles.one_to_n_state(theta, x, n), atol=1e-12)


class TestExtendParams:

    def test_new_couplings_are_zero(self, rng):
        extended = extend_params(random_params(rng, 2, 3))
        assert extended.n_qubits == 3
        np.testing.assert_array_equal(extended.phi[:, -1, :], 0.0)
        np.testing.assert_array_equal(extended.theta[:, 2, :], extended.theta[:, 0, :])

    def test_noise_perturbs_copied_angles(self, rng):
        params = random_params(rng, 1, 2)
        extended = extend_params(params, noise=0.01, rng=rng)
        diff = extended.theta[:, 1, :] - params.theta[:, 0, :]
        assert np.all(diff != 0.0)
        assert np.max(np.abs(diff)) < 0.1

    def test_noise_needs_generator(self, rng):
        with pytest.raises(ValueError):
            extend_params(random_params(rng, 1, 1), noise=0.01)

    def test_first_qubit_marginal_preserved(self, rng):
        params = random_params(rng, 2, 3)
        extended = extend_params(params)
        X = rng.uniform(-1, 1, (50, 2))
        before = np.sum(np.abs(qnn_states(params, X)[:, 0::2]) ** 2, axis=1)
        after = np.sum(np.abs(qnn_states(extended, X)[:, 0::2]) ** 2, axis=1)
        assert np.max(np.abs(before - after)) < 1e-10

    def test_chain_topology_marginal_preserved(self, rng):
        params = random_params(rng, 2, 2, topology='chain')
        extended = extend_params(params)
        X = rng.uniform(-1, 1, (20, 2))
        before = np.sum(np.abs(qnn_states(params, X)[:, 0::2]) ** 2, axis=1)
        after = np.sum(np.abs(qnn_states(extended, X)[:, 0::2]) ** 2, axis=1)
        assert np.max(np.abs(before - after)) < 1e-10
