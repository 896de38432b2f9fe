import json

import numpy as np
import pytest

from wmonogamy.linalg import density_of, partial_trace, purity
from wmonogamy.wstates import (
    StructureError,
    WClassParams,
    build_w_state,
    example_five_qubit_params,
    params_from_dict,
    params_to_dict,
    rank_two_support,
    read_state_json,
    reduced_pair,
    reduced_subset,
    sample_w_params,
    w_plus_vacuum_split,
    write_state_json,
)

from conftest import PAIR_VALUES


def vacuum_params(n=3):
    return WClassParams(n=n, a=1.0, b=np.zeros(n))


class TestParams:
    def test_normalization_enforced(self):
        with pytest.raises(ValueError, match="expected 1"):
            WClassParams(n=2, a=1.0, b=np.array([0.5, 0.0]))

    def test_normalized_factory(self):
        p = WClassParams.normalized(n=2, a=2.0, b=[1.0, 1.0])
        assert abs(abs(p.a) ** 2 + np.sum(np.abs(p.b) ** 2) - 1) < 1e-14

    def test_needs_two_qubits(self):
        with pytest.raises(ValueError, match="n >= 2"):
            WClassParams(n=1, a=0.0, b=np.array([1.0]))

    def test_demo_state_weights(self, demo_params):
        # 1/10 + 1/15 + 1/10 + 2/15 + 3/5 = 1 exactly
        sq = [abs(demo_params.a) ** 2] + list(np.abs(demo_params.b) ** 2)
        np.testing.assert_allclose(sq, [1 / 10, 1 / 15, 1 / 10, 2 / 15, 3 / 5, 0], atol=1e-15)


class TestBuildWState:
    def test_two_qubit_bell_like(self):
        p = WClassParams(n=2, a=0.0, b=np.array([1.0, 1.0]) / np.sqrt(2))
        state = build_w_state(p)
        np.testing.assert_allclose(state.amplitudes, [0, 1 / np.sqrt(2), 1 / np.sqrt(2), 0])

    def test_demo_amplitude_placement(self, demo_params):
        state = build_w_state(demo_params)
        amps = state.amplitudes
        assert amps[0] == pytest.approx(1 / np.sqrt(10))
        # qubit i sits at index 2^(5-i)
        assert amps[16] == pytest.approx(1 / np.sqrt(15))
        assert amps[8] == pytest.approx(1 / np.sqrt(10))
        assert amps[4] == pytest.approx(np.sqrt(2 / 15))
        assert amps[2] == pytest.approx(np.sqrt(3 / 5))
        assert amps[1] == 0.0
        nonzero = np.flatnonzero(np.abs(amps))
        assert set(nonzero) <= {0, 1, 2, 4, 8, 16}

    def test_vacuum(self):
        state = build_w_state(vacuum_params())
        assert state.amplitudes[0] == 1.0
        assert np.count_nonzero(state.amplitudes) == 1


class TestReducedPair:
    def test_matches_partial_trace_everywhere(self):
        for idx in range(25):
            n = 3 + idx % 4
            params = sample_w_params(n, rng_seed=[100, idx])
            rho_full = density_of(build_w_state(params))
            for i in range(2, n + 1):
                direct = reduced_pair(params, i)
                traced = partial_trace(rho_full, (1, i))
                assert np.max(np.abs(direct.matrix - traced.matrix)) <= 1e-12

    def test_support_reconstruction(self):
        params = sample_w_params(5, rng_seed=5)
        for i in range(2, 6):
            support = rank_two_support(params, i)
            pair = reduced_pair(params, i)
            assert np.max(np.abs(support.density() - pair.matrix)) <= 1e-10

    def test_demo_pair_has_known_concurrence(self, demo_params):
        from wmonogamy.measures import concurrence_mixed_2q

        rho = reduced_pair(demo_params, 2)
        assert np.linalg.matrix_rank(rho.matrix, tol=1e-10) == 2
        assert concurrence_mixed_2q(rho).value == pytest.approx(PAIR_VALUES[0], abs=1e-12)

    def test_vacuum_pair(self):
        rho = reduced_pair(vacuum_params(), 2)
        expected = np.zeros((4, 4))
        expected[0, 0] = 1.0
        np.testing.assert_allclose(rho.matrix, expected)

    def test_n2_is_full_projector(self):
        p = WClassParams.normalized(n=2, a=0.6, b=[0.48, 0.64])
        rho = reduced_pair(p, 2)
        full = density_of(build_w_state(p))
        np.testing.assert_allclose(rho.matrix, full.matrix, atol=1e-14)

    def test_index_range(self):
        with pytest.raises(ValueError, match="2 <= i"):
            reduced_pair(vacuum_params(), 1)


class TestReducedSubset:
    def test_full_subset_is_pure(self, demo_params):
        rho = reduced_subset(demo_params, (1, 2, 3, 4, 5))
        assert purity(rho) == pytest.approx(1.0, abs=1e-12)

    def test_matches_partial_trace(self):
        for idx in range(15):
            n = 4 + idx % 3
            params = sample_w_params(n, rng_seed=[200, idx])
            rho_full = density_of(build_w_state(params))
            subset = (1, 2, n)
            direct = reduced_subset(params, subset)
            traced = partial_trace(rho_full, subset)
            assert np.max(np.abs(direct.matrix - traced.matrix)) <= 1e-12

    def test_rank_at_most_two(self, demo_params):
        rho = reduced_subset(demo_params, (1, 2, 3))
        assert np.linalg.matrix_rank(rho.matrix, tol=1e-10) <= 2

    def test_subset_must_contain_first_qubit(self, demo_params):
        with pytest.raises(ValueError, match="qubit 1"):
            reduced_subset(demo_params, (2, 3))

    def test_vacuum_subset(self):
        rho = reduced_subset(vacuum_params(4), (1, 3))
        expected = np.zeros((4, 4))
        expected[0, 0] = 1.0
        np.testing.assert_allclose(rho.matrix, expected)


class TestWPlusVacuumSplit:
    def test_full_state_has_no_vacuum_weight(self, demo_params):
        split = w_plus_vacuum_split(reduced_subset(demo_params, (1, 2, 3, 4, 5)))
        assert split.weight_vac == pytest.approx(0.0, abs=1e-12)
        assert not split.degenerate

    def test_demo_subset_splits_three_fifths(self, demo_params):
        rho = reduced_subset(demo_params, (1, 2, 3))
        split = w_plus_vacuum_split(rho)
        # traced excitation weight: |b4|^2 + |b5|^2 = 3/5
        assert split.weight_vac == pytest.approx(0.6, abs=1e-12)
        assert split.weight_w == pytest.approx(0.4, abs=1e-12)
        w_vec = build_w_state(split.params).amplitudes
        recon = split.weight_w * np.outer(w_vec, w_vec.conj())
        recon[0, 0] += split.weight_vac
        assert np.max(np.abs(recon - rho.matrix)) <= 1e-10

    def test_vacuum_input_degenerate(self):
        rho = reduced_subset(vacuum_params(4), (1, 2))
        split = w_plus_vacuum_split(rho)
        assert split.degenerate
        assert split.weight_vac == 1.0
        assert split.weight_w == 0.0

    def test_weight_matches_traced_mass(self):
        for idx in range(20):
            n = 4 + idx % 3
            params = sample_w_params(n, rng_seed=[300, idx])
            subset = (1, 2, 3)
            split = w_plus_vacuum_split(reduced_subset(params, subset))
            traced_mass = sum(abs(params.b[q - 1]) ** 2 for q in range(1, n + 1) if q not in subset)
            assert split.weight_vac == pytest.approx(traced_mass, abs=1e-12)

    def test_rejects_foreign_matrix(self):
        from wmonogamy.linalg import DensityMatrix

        bell = np.zeros((4, 4))
        bell[0, 0] = bell[0, 3] = bell[3, 0] = bell[3, 3] = 0.5
        with pytest.raises(StructureError, match="W-plus-vacuum"):
            w_plus_vacuum_split(DensityMatrix(qubits=(1, 2), matrix=bell))


class TestSquaredConcurrenceAdditivity:
    def test_marginal_purity_identity(self):
        # 2 (1 - Tr rho_1^2) equals the sum of squared pair values
        from wmonogamy.linalg import pure_state_marginal

        for idx in range(50):
            n = 3 + idx % 4
            params = sample_w_params(n, rng_seed=[400, idx])
            state = build_w_state(params)
            marg = pure_state_marginal(state, [1])
            lhs = 2.0 * (1.0 - float(np.sum(np.abs(marg) ** 2)))
            rhs = sum((2 * abs(params.b[0]) * abs(params.b[i - 1])) ** 2 for i in range(2, n + 1))
            assert abs(lhs - rhs) <= 1e-10


class TestSampling:
    def test_deterministic(self):
        a = sample_w_params(4, rng_seed=123)
        b = sample_w_params(4, rng_seed=123)
        assert a.a == b.a
        np.testing.assert_array_equal(a.b, b.b)

    def test_allow_zero_a(self):
        p = sample_w_params(4, rng_seed=1, allow_zero_a=True)
        assert p.a == 0.0

    def test_simplex_moments(self):
        # |a|^2 of a flat simplex draw over n+1 weights has mean 1/(n+1)
        # and variance n / ((n+1)^2 (n+2))
        n = 4
        draws = np.array([abs(sample_w_params(n, rng_seed=[777, k]).a) ** 2 for k in range(10_000)])
        mean = draws.mean()
        expect = 1.0 / (n + 1)
        sigma = np.sqrt(n / ((n + 1) ** 2 * (n + 2)) / draws.size)
        assert abs(mean - expect) <= 3 * sigma


class TestStateIO:
    def test_roundtrip(self, tmp_path, demo_params):
        path = tmp_path / "state.json"
        write_state_json(demo_params, path)
        back = read_state_json(path)
        assert back.n == demo_params.n
        assert back.a == pytest.approx(demo_params.a)
        np.testing.assert_allclose(back.b, demo_params.b, atol=1e-15)

    def test_schema(self, demo_params):
        data = params_to_dict(demo_params)
        assert set(data) == {"n", "a", "b"}
        assert data["n"] == 5
        assert len(data["b"]) == 5
        assert all(len(pair) == 2 for pair in data["b"])

    def test_reader_rejects_bad_normalization(self, tmp_path):
        path = tmp_path / "bad.json"
        payload = {"n": 2, "a": [0.9, 0.0], "b": [[0.5, 0.0], [0.0, 0.0]]}
        path.write_text(json.dumps(payload))
        with pytest.raises(ValueError, match="normalization"):
            read_state_json(path)

    def test_reader_renormalizes_small_drift(self):
        drift = 1.0 + 4e-10
        data = {"n": 2, "a": [0.6 * drift, 0.0], "b": [[0.48 * drift, 0.0], [0.64 * drift, 0.0]]}
        p = params_from_dict(data)
        assert abs(abs(p.a) ** 2 + np.sum(np.abs(p.b) ** 2) - 1) < 1e-14
