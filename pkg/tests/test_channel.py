from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_density, random_matrix, random_unit_vector
from dissiprep import opalg
from dissiprep.channel import (
    JumpOperator,
    ancilla_probs,
    apply_channel,
    apply_coherent,
    check_density,
    dilated_unitary_exact,
    dilation_generator,
    dissipative_step,
    fidelity_pure,
    jump_oft,
    jump_spectral,
    kraus_from_jump,
    lindblad_defect,
    pure_density,
    repair_density,
    trace_out_ancilla,
)
from dissiprep.errors import DimMismatch, NotHermitian, NotPSD
from dissiprep.filters import RECTANGULAR, FilterParams, TimeGrid, default_grid, default_params, dft_filter, sample_filter
from dissiprep.model import IsingParams, build_tfim, energy_expectation, spectrum_summary


def _setup(N: int, mode: str = "fermi_dirac"):
    h = build_tfim(IsingParams(N))
    spec = spectrum_summary(h)
    p = default_params(spec, mode)
    return h, opalg.eigh(h), spec, p, opalg.embed(opalg.Z, [0], N)


def _rect_kraus(N: int, tau: float = 4.0):
    h, eig, spec, p, A = _setup(N, RECTANGULAR)
    return h, spec, kraus_from_jump(jump_spectral(eig, A, p), tau)


class TestDensityHelpers:
    def test_check_accepts_valid(self, rng):
        check_density(random_density(rng, 4))

    def test_check_rejects_trace(self):
        with pytest.raises(ValueError):
            check_density(np.eye(2))

    def test_check_rejects_non_hermitian(self):
        with pytest.raises(NotHermitian):
            check_density(np.array([[0.5, 0.1], [0.0, 0.5]]))

    def test_check_rejects_negative(self):
        with pytest.raises(NotPSD):
            check_density(np.diag([1.1, -0.1]))

    def test_repair_clamps_roundoff(self):
        out = repair_density(np.diag([1.0 + 1e-10, -1e-10]))
        np.testing.assert_allclose(out, np.diag([1.0, 0.0]), atol=1e-15)

    def test_repair_rejects_real_negativity(self):
        with pytest.raises(NotPSD):
            repair_density(np.diag([1.1, -0.1]))


class TestJumpSpectral:
    def test_rectangular_annihilates_ground(self):
        _, eig, spec, p, A = _setup(3, RECTANGULAR)
        K = jump_spectral(eig, A, p)
        assert np.linalg.norm(K.K @ spec.ground_states[:, 0]) <= 1e-10

    def test_flat_filter_returns_coupling(self):
        _, eig, _, _, A = _setup(3)
        K = jump_spectral(eig, A, lambda w: np.ones_like(w))
        np.testing.assert_allclose(K.K, A, atol=1e-12)

    def test_matches_double_loop(self):
        _, eig, _, p, A = _setup(2)
        from dissiprep.filters import filter_freq

        v, E = eig.eigenvectors, eig.eigenvalues
        ref = np.zeros((4, 4), dtype=complex)
        for i in range(4):
            for j in range(4):
                proj_i = np.outer(v[:, i], v[:, i].conj())
                proj_j = np.outer(v[:, j], v[:, j].conj())
                ref += filter_freq(E[i] - E[j], p) * proj_i @ A @ proj_j
        np.testing.assert_allclose(jump_spectral(eig, A, p).K, ref, atol=1e-12)

    def test_dim_mismatch(self):
        _, eig, _, p, _ = _setup(2)
        with pytest.raises(DimMismatch):
            jump_spectral(eig, opalg.Z, p)


class TestJumpOft:
    def test_single_sample(self):
        h, _, _, p, A = _setup(2)
        g = TimeGrid(M_s=0, Delta_s=0.4)
        smp = sample_filter(p, g)
        np.testing.assert_allclose(jump_oft(h, A, smp, g).K, 0.4 * smp.f[0] * A, atol=1e-14)

    def test_identical_to_spectral_with_dft_window(self):
        h, eig, _, p, A = _setup(2)
        g = default_grid(p)
        smp = sample_filter(p, g)
        oft = jump_oft(h, A, smp, g).K
        spec = jump_spectral(eig, A, lambda w: dft_filter(smp, g, w.ravel()).reshape(w.shape)).K
        assert opalg.spectral_norm(oft - spec) <= 1e-10

    def test_construction_tag(self):
        h, _, _, p, A = _setup(2)
        g = default_grid(p)
        assert jump_oft(h, A, sample_filter(p, g), g).construction == "oft_discrete"


class TestKraus:
    def test_zero_jump(self):
        kp = kraus_from_jump(np.zeros((4, 4)), 2.0)
        np.testing.assert_allclose(kp.M0, np.eye(4))
        np.testing.assert_allclose(kp.M1, 0.0)

    def test_full_transfer(self):
        lower = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
        kp = kraus_from_jump(lower, (np.pi / 2) ** 2)
        np.testing.assert_allclose(kp.M0, np.diag([1.0, 0.0]), atol=1e-15)
        np.testing.assert_allclose(kp.M1, np.array([[0, -1j], [0, 0]]), atol=1e-15)

    def test_rejects_nonpositive_tau(self):
        with pytest.raises(ValueError):
            kraus_from_jump(np.eye(2), 0.0)

    @given(st.integers(0, 10_000), st.sampled_from([2, 4, 8, 16]), st.sampled_from([0.01, 1.0, 4.0, 100.0]))
    def test_completeness_and_m0_spectrum(self, seed, d, tau):
        kp = kraus_from_jump(random_matrix(np.random.default_rng(seed), d, 3.0), tau)
        assert kp.completeness_defect() <= 1e-10
        np.testing.assert_allclose(kp.M0, kp.M0.conj().T, atol=1e-12)
        assert np.all(np.abs(np.linalg.eigvalsh(kp.M0)) <= 1 + 1e-12)


class TestApplyChannel:
    def test_ground_is_fixed(self):
        _, spec, kp = _rect_kraus(3)
        g = pure_density(spec.ground_states[:, 0])
        np.testing.assert_allclose(apply_channel(g, kp), g, atol=1e-10)

    def test_zero_jump_is_identity(self, rng):
        rho = random_density(rng, 4)
        np.testing.assert_allclose(apply_channel(rho, kraus_from_jump(np.zeros((4, 4)), 1.0)), rho, atol=1e-14)

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            apply_channel(np.eye(2) / 2, kraus_from_jump(np.zeros((4, 4)), 1.0))

    @given(st.integers(0, 10_000), st.sampled_from([2, 4, 8, 16]), st.floats(0.01, 10))
    def test_matches_dilation(self, seed, d, tau):
        rng = np.random.default_rng(seed)
        K = random_matrix(rng, d, 2.0)
        rho = random_density(rng, d)
        W = dilated_unitary_exact(K, tau)
        anc0 = np.diag([1.0, 0.0])
        dil = trace_out_ancilla(W @ np.kron(anc0, rho) @ W.conj().T)
        np.testing.assert_allclose(apply_channel(rho, kraus_from_jump(K, tau)), dil, atol=1e-10)

    @given(st.integers(0, 10_000), st.sampled_from([2, 8, 32, 64]))
    def test_trace_and_hermiticity(self, seed, d):
        rng = np.random.default_rng(seed)
        out = apply_channel(random_density(rng, d, rank=2), kraus_from_jump(random_matrix(rng, d, 2.0), 3.0))
        assert abs(np.trace(out) - 1) <= 1e-10
        np.testing.assert_allclose(out, out.conj().T, atol=1e-12)
        assert np.linalg.eigvalsh(out)[0] >= -1e-8


class TestDilation:
    def test_zero_time(self, rng):
        np.testing.assert_allclose(dilated_unitary_exact(random_matrix(rng, 4), 0.0), np.eye(8), atol=1e-14)

    def test_blocks(self, rng):
        K = random_matrix(rng, 4, 2.0)
        tau = 1.7
        W = dilated_unitary_exact(K, tau)
        kp = kraus_from_jump(K, tau)
        np.testing.assert_allclose(W[:4, :4], kp.M0, atol=1e-10)
        np.testing.assert_allclose(W[4:, :4], kp.M1, atol=1e-10)
        np.testing.assert_allclose(W[:4, 4:], -kp.M1.conj().T, atol=1e-10)
        np.testing.assert_allclose(W[4:, 4:], opalg.matfun_psd(tau * K @ K.conj().T, "cos_sqrt"), atol=1e-10)

    def test_generator_annihilates_ground_product(self):
        _, eig, spec, p, A = _setup(2, RECTANGULAR)
        gen = dilation_generator(jump_spectral(eig, A, p))
        sigma = np.kron(np.diag([1.0, 0.0]), pure_density(spec.ground_states[:, 0]))
        np.testing.assert_allclose(gen @ sigma @ gen.conj().T, 0.0, atol=1e-10)


class TestCoherent:
    def test_zero_time(self, rng):
        h = build_tfim(IsingParams(2))
        rho = random_density(rng, 4)
        np.testing.assert_allclose(apply_coherent(rho, h, 0.0), rho, atol=1e-14)

    @given(st.integers(0, 10_000), st.floats(-10, 10))
    def test_conserves_energy_and_spectrum(self, seed, t):
        h = build_tfim(IsingParams(3))
        rho = random_density(np.random.default_rng(seed), 8)
        out = apply_coherent(rho, h, t)
        assert energy_expectation(out, h) == pytest.approx(energy_expectation(rho, h), abs=1e-10)
        assert np.trace(out @ out).real == pytest.approx(np.trace(rho @ rho).real, abs=1e-10)
        np.testing.assert_allclose(np.linalg.eigvalsh(out), np.linalg.eigvalsh(rho), atol=1e-10)


class TestDissipativeStep:
    def test_ground_fixed(self):
        h, spec, kp = _rect_kraus(3)
        g = pure_density(spec.ground_states[:, 0])
        np.testing.assert_allclose(dissipative_step(g, h, kp, 0.5), g, atol=1e-10)

    def test_zero_jump_is_coherent(self, rng):
        h = build_tfim(IsingParams(2))
        rho = random_density(rng, 4)
        out = dissipative_step(rho, h, kraus_from_jump(np.zeros((4, 4)), 1.0), 0.3)
        np.testing.assert_allclose(out, apply_coherent(rho, h, 0.6), atol=1e-12)


class TestFidelity:
    def test_ground(self):
        v = random_unit_vector(np.random.default_rng(0), 8)
        assert fidelity_pure(pure_density(v), v) == pytest.approx(1.0, abs=1e-12)

    def test_mixed(self):
        v = random_unit_vector(np.random.default_rng(1), 8)
        assert fidelity_pure(np.eye(8) / 8, v) == pytest.approx(1 / np.sqrt(8), abs=1e-12)

    def test_max_over_manifold(self):
        ground = np.eye(4)[:, :2]
        assert fidelity_pure(pure_density(np.eye(4)[1]), ground) == pytest.approx(1.0)

    @pytest.mark.parametrize("N", [2, 3])
    def test_monotone_under_rectangular_channel(self, rng, N):
        h, spec, kp = _rect_kraus(N)
        g = spec.ground_states[:, 0]
        for _ in range(5):
            rho = random_density(rng, 2**N)
            f_prev = fidelity_pure(rho, g)
            for _ in range(10):
                rho = dissipative_step(rho, h, kp, 0.5)
                f = fidelity_pure(rho, g)
                assert f >= f_prev - 1e-9
                f_prev = f


class TestAncillaProbs:
    def test_ground(self):
        _, spec, kp = _rect_kraus(2)
        p0, p1 = ancilla_probs(pure_density(spec.ground_states[:, 0]), kp)
        assert p0 == pytest.approx(1.0, abs=1e-10) and p1 == pytest.approx(0.0, abs=1e-10)

    @given(st.integers(0, 10_000), st.floats(0.01, 20))
    def test_sum_to_one(self, seed, tau):
        rng = np.random.default_rng(seed)
        p0, p1 = ancilla_probs(random_density(rng, 8), kraus_from_jump(random_matrix(rng, 8, 2.0), tau))
        assert p0 + p1 == pytest.approx(1.0, abs=1e-10)
        assert -1e-10 <= p0 <= 1 + 1e-10 and -1e-10 <= p1 <= 1 + 1e-10

    def test_small_tau_slope(self, rng):
        K = random_matrix(rng, 4, 2.0)
        rho = random_density(rng, 4)
        rate = np.trace(K @ rho @ K.conj().T).real
        for tau in (1e-4, 1e-3, 1e-2):
            _, p1 = ancilla_probs(rho, kraus_from_jump(K, tau))
            assert abs(p1 - tau * rate) <= 5 * tau**2 * rate * opalg.spectral_norm(K) ** 2


class TestLindbladDefect:
    def test_zero_jump(self, rng):
        assert lindblad_defect(random_density(rng, 4), np.zeros((4, 4)), 0.1) == pytest.approx(0.0, abs=1e-15)

    def test_ground_fixed(self):
        _, eig, spec, p, A = _setup(2, RECTANGULAR)
        K = jump_spectral(eig, A, p)
        assert lindblad_defect(pure_density(spec.ground_states[:, 0]), K, 0.3) <= 1e-10

    @pytest.mark.parametrize("seed", range(3))
    def test_second_order(self, seed):
        rng = np.random.default_rng(seed)
        K, rho = random_matrix(rng, 8, 2.0), random_density(rng, 8)
        taus = np.logspace(-4, -2, 5)
        slope = np.polyfit(np.log(taus), np.log([lindblad_defect(rho, K, t) for t in taus]), 1)[0]
        assert 1.8 <= slope <= 2.2


class TestJumpOperator:
    def test_dim(self):
        assert JumpOperator(np.zeros((4, 4))).dim == 4
