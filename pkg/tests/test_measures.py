import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wmonogamy.linalg import DensityMatrix, density_of, ket_from_amplitudes
from wmonogamy.measures import (
    MeasureValue,
    binary_entropy,
    coa_mixed_2q,
    concurrence_mixed_2q,
    concurrence_pure,
    cut_value_w,
    entropy,
    eof_mixed_2q,
    eof_pure,
    f_of_c2,
    pair_value_w,
    wootters_spectrum,
)
from wmonogamy.wstates import WClassParams, build_w_state, reduced_pair, reduced_subset, sample_w_params

from conftest import EIG_A1_HI, PAIR_VALUES, S_A1, UPPER_BOUND
from oracles import (
    YY,
    bell_phi_plus,
    haar_like_vector,
    random_rank_le2_2q,
    random_unitary_2,
    werner,
    wootters_lambdas_hermitian,
    wootters_lambdas_nonhermitian,
)


def dm(matrix, qubits=(1, 2)):
    return DensityMatrix(qubits=qubits, matrix=matrix)


class TestConcurrencePure:
    def test_bell_state(self):
        state = ket_from_amplitudes(bell_phi_plus())
        assert concurrence_pure(state, [1]).value == pytest.approx(1.0, abs=1e-12)

    def test_product_state(self):
        zero = [1, 0]
        psi = haar_like_vector(np.random.default_rng(3), 4)
        state = ket_from_amplitudes(np.kron(zero, psi))
        assert concurrence_pure(state, [1]).value == pytest.approx(0.0, abs=1e-8)

    def test_demo_cut_value(self, demo_params):
        state = build_w_state(demo_params)
        assert concurrence_pure(state, [1]).value == pytest.approx(UPPER_BOUND, abs=1e-12)

    def test_cut_symmetry(self):
        rng = np.random.default_rng(9)
        state = ket_from_amplitudes(haar_like_vector(rng, 16))
        a = concurrence_pure(state, [1, 3]).value
        b = concurrence_pure(state, [2, 4]).value
        assert abs(a - b) <= 1e-10

    def test_invalid_partition(self):
        state = ket_from_amplitudes(bell_phi_plus())
        with pytest.raises(ValueError):
            concurrence_pure(state, [])
        with pytest.raises(ValueError):
            concurrence_pure(state, [1, 2])
        with pytest.raises(ValueError):
            concurrence_pure(state, [3])


class TestWoottersSpectrum:
    def test_bell(self):
        spec = wootters_spectrum(dm(np.outer(bell_phi_plus(), bell_phi_plus())))
        np.testing.assert_allclose(spec.lambdas, [1, 0, 0, 0], atol=1e-8)

    def test_maximally_mixed(self):
        # rho rho~ = I/16, so all four lambdas are 1/4
        spec = wootters_spectrum(dm(np.eye(4) / 4))
        np.testing.assert_allclose(spec.lambdas, np.full(4, 0.25), atol=1e-12)

    def test_demo_pair_difference(self, demo_params):
        spec = wootters_spectrum(reduced_pair(demo_params, 2))
        lam = spec.lambdas
        assert lam[0] - lam[1] - lam[2] - lam[3] == pytest.approx(PAIR_VALUES[0], abs=1e-12)

    def test_sum_of_squares_matches_product_trace(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            rho = random_rank_le2_2q(rng)
            spec = wootters_spectrum(dm(rho))
            target = np.trace(rho @ YY @ rho.conj() @ YY).real
            assert abs(np.sum(spec.lambdas**2) - target) <= 1e-10

    def test_agrees_with_hermitian_product_path(self):
        rng = np.random.default_rng(22)
        for _ in range(50):
            rho = random_rank_le2_2q(rng)
            ours = wootters_spectrum(dm(rho)).lambdas
            herm = wootters_lambdas_hermitian(rho)
            nonherm = wootters_lambdas_nonhermitian(rho)
            np.testing.assert_allclose(ours, herm, atol=1e-7)
            np.testing.assert_allclose(ours, nonherm, atol=1e-6)

    def test_pure_state_has_single_lambda(self):
        rng = np.random.default_rng(23)
        vec = haar_like_vector(rng, 4)
        spec = wootters_spectrum(dm(np.outer(vec, vec.conj())))
        assert np.all(spec.lambdas[1:] <= 1e-8)

    def test_dimension_check(self):
        with pytest.raises(ValueError, match="two-qubit"):
            wootters_spectrum(DensityMatrix(qubits=(1,), matrix=np.eye(2) / 2))


class TestMixedConcurrence:
    def test_werner_half(self):
        # analytic Werner value max(0, (3p-1)/2) at p = 1/2
        assert concurrence_mixed_2q(dm(werner(0.5))).value == pytest.approx(0.25, abs=1e-12)

    def test_separable_diagonal(self):
        rho = dm(np.diag([0.5, 0.0, 0.0, 0.5]))
        assert concurrence_mixed_2q(rho).value == 0.0

    def test_demo_pair_i4(self, demo_params):
        rho = reduced_pair(demo_params, 4)
        assert concurrence_mixed_2q(rho).value == pytest.approx(0.4, abs=1e-12)


class TestAssistance:
    def test_pure_state_equals_concurrence(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            vec = haar_like_vector(rng, 4)
            rho = dm(np.outer(vec, vec.conj()))
            c = concurrence_mixed_2q(rho).value
            ca = coa_mixed_2q(rho).value
            assert abs(c - ca) <= 1e-7

    def test_demo_pair_i3(self, demo_params):
        rho = reduced_pair(demo_params, 3)
        assert coa_mixed_2q(rho).value == pytest.approx(PAIR_VALUES[1], abs=1e-12)

    def test_maximally_mixed(self):
        assert coa_mixed_2q(dm(np.eye(4) / 4)).value == pytest.approx(1.0, abs=1e-12)

    @settings(deadline=None, max_examples=60, derandomize=True)
    @given(seed=st.integers(0, 2**31 - 1))
    def test_dominates_concurrence(self, seed):
        rho = dm(random_rank_le2_2q(np.random.default_rng(seed)))
        assert coa_mixed_2q(rho).value >= concurrence_mixed_2q(rho).value - 1e-9


class TestPairAndCutValues:
    def test_demo_values(self, demo_params):
        for i, expect in zip(range(2, 6), PAIR_VALUES):
            assert pair_value_w(demo_params, i).value == pytest.approx(expect, abs=1e-15)

    def test_zero_when_first_amplitude_vanishes(self):
        p = WClassParams.normalized(n=3, a=0.3, b=[0.0, 0.5, 0.4])
        for i in (2, 3):
            assert pair_value_w(p, i).value == 0.0

    def test_cut_value_full_matches_pure_concurrence(self):
        for idx in range(20):
            n = 3 + idx % 4
            params = sample_w_params(n, rng_seed=[500, idx])
            full = tuple(range(1, n + 1))
            exact = cut_value_w(params, full).value
            via_state = concurrence_pure(build_w_state(params), [1]).value
            assert abs(exact - via_state) <= 1e-12

    def test_cut_value_matches_wootters_on_subsets(self):
        # the subset reduction lives in a 2x2 block of the (1 | rest) cut,
        # so the embedded two-qubit spectrum must reproduce the closed form
        for idx in range(10):
            params = sample_w_params(5, rng_seed=[600, idx])
            rho = reduced_subset(params, (1, 2, 3))
            beta = np.linalg.norm([params.b[1], params.b[2]])
            w_hat = np.zeros(4, dtype=np.complex128)
            w_hat[2] = params.b[1] / beta
            w_hat[1] = params.b[2] / beta
            e0 = np.zeros(4, dtype=np.complex128)
            e0[0] = 1.0
            iso = np.zeros((8, 4), dtype=np.complex128)
            for ai in (0, 1):
                iso[ai * 4:(ai + 1) * 4, ai * 2 + 0] = e0
                iso[ai * 4:(ai + 1) * 4, ai * 2 + 1] = w_hat
            eff = dm(iso.conj().T @ rho.matrix @ iso)
            target = cut_value_w(params, (1, 2, 3)).value
            assert concurrence_mixed_2q(eff).value == pytest.approx(target, abs=1e-9)
            assert coa_mixed_2q(eff).value == pytest.approx(target, abs=1e-9)

    def test_lemma_equality_bulk(self):
        # pair concurrence and assistance both equal 2 |b1| |bi|
        for idx in range(100):
            n = 3 + idx % 4
            params = sample_w_params(n, rng_seed=[700, idx], allow_zero_a=(idx % 7 == 0))
            for i in range(2, n + 1):
                target = pair_value_w(params, i).value
                rho = reduced_pair(params, i)
                assert abs(concurrence_mixed_2q(rho).value - target) <= 1e-9
                assert abs(coa_mixed_2q(rho).value - target) <= 1e-9


class TestEntropy:
    def test_pure_projector(self):
        assert entropy(np.diag([1.0, 0.0])) == 0.0

    def test_maximally_mixed_qubit(self):
        assert entropy(np.eye(2) / 2) == pytest.approx(1.0, abs=1e-12)

    def test_demo_marginal(self, demo_params):
        from wmonogamy.linalg import partial_trace

        rho1 = partial_trace(density_of(build_w_state(demo_params)), [1])
        assert entropy(rho1) == pytest.approx(S_A1, abs=1e-12)


class TestBinaryEntropyAndF:
    def test_endpoints(self):
        assert f_of_c2(0.0) == 0.0
        assert f_of_c2(1.0) == pytest.approx(1.0, abs=1e-15)

    def test_quarter(self):
        # h((1 + sqrt(0.75)) / 2) evaluated directly
        assert f_of_c2(0.25) == pytest.approx(0.35457890266527003, abs=1e-12)

    def test_monotone(self):
        grid = np.linspace(0, 1, 101)
        vals = [f_of_c2(x) for x in grid]
        assert np.all(np.diff(vals) >= 0)

    def test_clamps_tiny_excursions(self):
        assert f_of_c2(-1e-13) == 0.0
        assert f_of_c2(1 + 1e-13) == pytest.approx(1.0, abs=1e-12)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            f_of_c2(-0.1)
        with pytest.raises(ValueError):
            f_of_c2(1.1)

    def test_subadditive_on_grid(self):
        grid = np.arange(0.0, 1.0 + 1e-12, 0.01)
        f_vals = {round(float(x), 2): f_of_c2(x) for x in grid}
        for x in grid:
            for y in grid:
                s = round(float(x + y), 2)
                if s <= 1.0:
                    assert f_vals[s] <= f_vals[round(float(x), 2)] + f_vals[round(float(y), 2)] + 1e-12

    def test_binary_entropy_symmetry(self):
        for p in np.linspace(0, 1, 21):
            assert binary_entropy(p) == pytest.approx(binary_entropy(1 - p), abs=1e-14)


class TestEofPure:
    def test_bell(self):
        assert eof_pure(ket_from_amplitudes(bell_phi_plus()), [1]).value == pytest.approx(1.0, abs=1e-12)

    def test_product(self):
        state = ket_from_amplitudes(np.kron([1, 0], [1, 0]))
        assert eof_pure(state, [1]).value == 0.0

    def test_demo_entropy_equals_f_of_c2(self, demo_params):
        state = build_w_state(demo_params)
        e = eof_pure(state, [1]).value
        assert e == pytest.approx(S_A1, abs=1e-12)
        assert e == pytest.approx(f_of_c2(UPPER_BOUND**2), abs=1e-12)

    def test_entropy_path_matches_f_path_on_samples(self):
        for idx in range(60):
            n = 3 + idx % 4
            params = sample_w_params(n, rng_seed=[800, idx])
            state = build_w_state(params)
            c = concurrence_pure(state, [1]).value
            assert abs(eof_pure(state, [1]).value - f_of_c2(c * c)) <= 1e-10


class TestEofMixed:
    def test_bell(self):
        rho = dm(np.outer(bell_phi_plus(), bell_phi_plus()))
        assert eof_mixed_2q(rho).value == pytest.approx(1.0, abs=1e-10)

    def test_separable(self):
        assert eof_mixed_2q(dm(np.diag([0.5, 0.0, 0.0, 0.5]))).value == 0.0

    def test_demo_pair_i4(self, demo_params):
        rho = reduced_pair(demo_params, 4)
        assert eof_mixed_2q(rho).value == pytest.approx(f_of_c2(0.16), abs=1e-12)


class TestLocalUnitaryInvariance:
    def test_measures_invariant(self):
        rng = np.random.default_rng(55)
        for _ in range(15):
            rho = random_rank_le2_2q(rng)
            u = np.kron(random_unitary_2(rng), random_unitary_2(rng))
            rotated = u @ rho @ u.conj().T
            for fn in (concurrence_mixed_2q, coa_mixed_2q, eof_mixed_2q):
                assert abs(fn(dm(rho)).value - fn(dm(rotated)).value) <= 1e-9


class TestMeasureValue:
    def test_bounds(self):
        with pytest.raises(ValueError, match="negative"):
            MeasureValue(value=-0.1, kind="C", method="closed_form")
        with pytest.raises(ValueError, match="kind"):
            MeasureValue(value=0.5, kind="X", method="closed_form")
        assert float(MeasureValue(value=0.5, kind="C", method="closed_form")) == 0.5

    def test_tiny_negative_clamped(self):
        assert MeasureValue(value=-1e-12, kind="C", method="closed_form").value == 0.0
