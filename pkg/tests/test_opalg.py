from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_hermitian, random_matrix
from dissiprep import opalg
from dissiprep.errors import NotHermitian, NotPSD
from dissiprep.model import IsingParams, build_tfim


def _brute_tfim(N: int, J: float, Bx: float) -> np.ndarray:
    """Independent builder: explicit Kronecker products of 2x2 Paulis."""
    I2 = np.eye(2)
    Xm = np.array([[0.0, 1.0], [1.0, 0.0]])
    Zm = np.diag([1.0, -1.0])

    def site_op(ops: dict[int, np.ndarray]) -> np.ndarray:
        out = np.ones((1, 1))
        for i in range(N):
            out = np.kron(out, ops.get(i, I2))
        return out

    h = np.zeros((2**N, 2**N))
    for i in range(N - 1):
        h += J * site_op({i: Zm, i + 1: Zm})
    for i in range(N):
        h += Bx * site_op({i: Xm})
    return h


class TestEigh:
    def test_identity(self):
        eig = opalg.eigh(np.eye(2))
        np.testing.assert_allclose(eig.eigenvalues, [1.0, 1.0])

    def test_pauli_x(self):
        np.testing.assert_allclose(opalg.eigh(opalg.X).eigenvalues, [-1.0, 1.0], atol=1e-15)

    def test_tfim_matches_independent_builder(self):
        ours = opalg.eigh(build_tfim(IsingParams(4))).eigenvalues
        # characteristic-polynomial-free oracle: real symmetric solver on an independent matrix
        ref = np.sort(np.linalg.eigvalsh(_brute_tfim(4, -1.0, -1.2)))
        np.testing.assert_allclose(ours, ref, atol=1e-9)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitian):
            opalg.eigh(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_non_finite(self):
        with pytest.raises(NotHermitian):
            opalg.eigh(np.array([[np.nan, 0.0], [0.0, 1.0]]))

    @given(st.integers(0, 10_000), st.sampled_from([2, 4, 8, 16]))
    def test_reconstruction_and_orthonormality(self, seed, d):
        a = random_hermitian(np.random.default_rng(seed), d)
        eig = opalg.eigh(a)
        v = eig.eigenvectors
        assert np.all(np.diff(eig.eigenvalues) >= 0)
        assert opalg.spectral_norm(eig.reconstruct() - a) <= 1e-10 * opalg.spectral_norm(a)
        assert opalg.spectral_norm(v.conj().T @ v - np.eye(d)) <= 1e-10


class TestMatfunPsd:
    @pytest.mark.parametrize("kind", ["cos_sqrt", "sinc_sqrt"])
    def test_zero_gives_identity(self, kind):
        np.testing.assert_allclose(opalg.matfun_psd(np.zeros((4, 4)), kind), np.eye(4), atol=1e-15)

    def test_cos_of_pi(self):
        np.testing.assert_allclose(opalg.matfun_psd(np.pi**2 * np.eye(2), "cos_sqrt"), -np.eye(2), atol=1e-14)

    def test_sqrt(self):
        np.testing.assert_allclose(opalg.matfun_psd(np.diag([4.0, 9.0]), "sqrt"), np.diag([2.0, 3.0]))

    def test_pythagorean_identity(self, rng):
        k = random_matrix(rng, 8, scale=3.0)
        a = k.conj().T @ k
        c = opalg.matfun_psd(a, "cos_sqrt")
        s = opalg.matfun_psd(a, "sinc_sqrt")
        assert opalg.spectral_norm(c @ c + a @ s @ s - np.eye(8)) <= 1e-10

    def test_clamps_roundoff_negativity(self):
        out = opalg.matfun_psd(np.diag([-1e-12, 1.0]), "sqrt")
        np.testing.assert_allclose(out, np.diag([0.0, 1.0]), atol=1e-15)

    def test_rejects_negative(self):
        with pytest.raises(NotPSD):
            opalg.matfun_psd(np.diag([-1e-3, 1.0]), "cos_sqrt")

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            opalg.matfun_psd(np.eye(2), "tan")

    @given(st.integers(0, 10_000), st.sampled_from(["cos_sqrt", "sinc_sqrt", "sqrt"]))
    def test_spectral_mapping(self, seed, kind):
        rng = np.random.default_rng(seed)
        k = random_matrix(rng, 4, scale=5.0)
        a = k.conj().T @ k
        lam = np.clip(np.linalg.eigvalsh(a), 0, None)
        fn = {"cos_sqrt": lambda x: np.cos(np.sqrt(x)),
              "sinc_sqrt": lambda x: np.sinc(np.sqrt(x) / np.pi),
              "sqrt": np.sqrt}[kind]
        out_eigs = np.sort(np.linalg.eigvalsh(opalg.matfun_psd(a, kind)))
        np.testing.assert_allclose(out_eigs, np.sort(fn(lam)), atol=1e-10)
        if kind != "sqrt":
            assert np.all(np.abs(out_eigs) <= 1 + 1e-12)


class TestExpmHermitian:
    def test_zero_time(self, rng):
        np.testing.assert_allclose(opalg.expm_hermitian(random_hermitian(rng, 4), 0.0), np.eye(4), atol=1e-14)

    def test_z_rotation_by_pi(self):
        np.testing.assert_allclose(opalg.expm_hermitian(opalg.Z, np.pi, sign=-1), -np.eye(2), atol=1e-15)

    def test_inverse_pair(self):
        h = build_tfim(IsingParams(2))
        u = opalg.expm_hermitian(h, 0.7) @ opalg.expm_hermitian(h, -0.7)
        assert opalg.spectral_norm(u - np.eye(4)) <= 1e-12

    def test_matches_scipy(self, rng):
        from scipy.linalg import expm

        h = random_hermitian(rng, 8)
        np.testing.assert_allclose(opalg.expm_hermitian(h, 0.3, sign=1), expm(0.3j * h), atol=1e-12)

    def test_bad_sign(self):
        with pytest.raises(ValueError):
            opalg.expm_hermitian(opalg.Z, 1.0, sign=2)

    @given(st.integers(0, 10_000), st.floats(-50, 50), st.sampled_from([-1, 1]))
    def test_unitary(self, seed, t, sign):
        u = opalg.expm_hermitian(random_hermitian(np.random.default_rng(seed), 4), t, sign)
        assert opalg.spectral_norm(u.conj().T @ u - np.eye(4)) <= 1e-10


class TestKron:
    def test_identity(self):
        np.testing.assert_array_equal(opalg.kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_lower_left_block(self):
        lower = np.array([[0, 0], [1, 0]])
        out = opalg.kron(lower, opalg.X)
        expected = np.zeros((4, 4), dtype=complex)
        expected[2:, :2] = opalg.X
        np.testing.assert_array_equal(out, expected)

    def test_mixed_product(self, rng):
        a, b, c, d = (random_matrix(rng, 2) for _ in range(4))
        lhs = opalg.kron(a, b) @ opalg.kron(c, d)
        np.testing.assert_allclose(lhs, opalg.kron(a @ c, b @ d), atol=1e-12)

    @pytest.mark.parametrize("da", [2, 4, 8])
    @pytest.mark.parametrize("db", [2, 4, 8])
    def test_block_index_formula(self, rng, da, db):
        a, b = random_matrix(rng, da), random_matrix(rng, db)
        out = opalg.kron(a, b)
        assert out.shape == (da * db, da * db)
        for i in range(da):
            for j in range(da):
                block = out[i * db : (i + 1) * db, j * db : (j + 1) * db]
                np.testing.assert_allclose(block, a[i, j] * b, rtol=1e-15, atol=1e-16)


class TestEmbed:
    def test_matches_pauli_string(self):
        np.testing.assert_array_equal(opalg.embed(opalg.Z, [1], 3), opalg.pauli_string("IZI"))

    def test_reordered_pair(self):
        zx = opalg.kron(opalg.Z, opalg.X)
        np.testing.assert_array_equal(opalg.embed(zx, [2, 0], 3), opalg.pauli_string("XIZ"))
