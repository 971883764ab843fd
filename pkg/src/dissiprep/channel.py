"""Jump operators, Kraus pairs and the exact density-matrix maps built from them.

One dissipative step couples the system to a single ancilla qubit prepared in
``|0>`` through the dilated Hermitian operator ``[[0, K^dag], [K, 0]]``, evolves
for ``sqrt(tau)`` and traces the ancilla out. The resulting channel has the
two Kraus operators

    M0 = cos(sqrt(tau K^dag K)),    M1 = -i sqrt(tau) K sinc(sqrt(tau K^dag K)).

States are plain complex ``numpy`` arrays; ``check_density`` validates them and
``repair_density`` removes roundoff negativity. The ancilla is the most
significant qubit of every dilated operator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import opalg
from .errors import DimMismatch, NotHermitian, NotPSD
from .filters import FilterParams, FilterSamples, TimeGrid, filter_freq
from .opalg import HermitianEigen
from .tolerances import TOL

SPECTRAL = "spectral"
OFT_DISCRETE = "oft_discrete"

FilterLike = FilterParams | Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class JumpOperator:
    K: np.ndarray = field(repr=False)
    construction: str = SPECTRAL
    couple_site: int = 0

    @property
    def dim(self) -> int:
        return self.K.shape[0]


@dataclass(frozen=True)
class KrausPair:
    M0: np.ndarray = field(repr=False)
    M1: np.ndarray = field(repr=False)
    tau: float

    def completeness_defect(self) -> float:
        d = self.M0.shape[0]
        s = self.M0.conj().T @ self.M0 + self.M1.conj().T @ self.M1
        return opalg.spectral_norm(s - np.eye(d))


def _as_array(rho) -> np.ndarray:
    return np.asarray(rho, dtype=complex)


def _check_dims(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape[-1] != b.shape[0]:
        raise DimMismatch(f"{what}: dimension {a.shape[-1]} does not match {b.shape[0]}")


def check_density(rho: np.ndarray) -> None:
    """Raise if ``rho`` is not Hermitian, unit-trace and PSD within tolerance."""
    rho = _as_array(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimMismatch(f"density matrix must be square, got {rho.shape}")
    if opalg.spectral_norm(rho - rho.conj().T) > TOL.hermitian:
        raise NotHermitian("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TOL.unit_trace:
        raise ValueError(f"density matrix has trace {tr:.12g}")
    lam_min = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lam_min < -TOL.density_negativity:
        raise NotPSD(f"density matrix has eigenvalue {lam_min:.3e}")


def repair_density(rho: np.ndarray) -> np.ndarray:
    """Symmetrise, clamp eigenvalues in ``[-1e-8, 0)`` to zero and renormalise."""
    rho = _as_array(rho)
    herm = 0.5 * (rho + rho.conj().T)
    lam, v = np.linalg.eigh(herm)
    if lam[0] < -TOL.density_negativity:
        raise NotPSD(f"state has eigenvalue {lam[0]:.3e}; not a roundoff artefact")
    if lam[0] < 0.0:
        lam = np.where(lam < 0.0, 0.0, lam)
        herm = (v * lam) @ v.conj().T
    return herm / np.trace(herm).real


def pure_density(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def _eig_of(h: np.ndarray | HermitianEigen) -> HermitianEigen:
    return h if isinstance(h, HermitianEigen) else opalg.eigh(h)


def jump_spectral(
    eig: HermitianEigen, A: np.ndarray, p: FilterLike, couple_site: int = 0
) -> JumpOperator:
    """``K = sum_ij f~(E_i - E_j) |E_i><E_i| A |E_j><E_j|``.

    ``p`` is either filter parameters or any vectorised callable of the
    frequency, for example a DFT-reconstructed window.
    """
    A = _as_array(A)
    _check_dims(eig.eigenvectors, A, "jump_spectral")
    opalg.check_hermitian(A)
    v = eig.eigenvectors
    omega = eig.eigenvalues[:, None] - eig.eigenvalues[None, :]
    weights = filter_freq(omega, p) if isinstance(p, FilterParams) else np.asarray(p(omega))
    k_eig = weights * (v.conj().T @ A @ v)
    return JumpOperator(v @ k_eig @ v.conj().T, SPECTRAL, couple_site)


def jump_oft(
    H: np.ndarray | HermitianEigen,
    A: np.ndarray,
    samples: FilterSamples,
    g: TimeGrid,
    couple_site: int = 0,
) -> JumpOperator:
    """Discretised operator Fourier transform ``sum_l Delta_s f(s_l) A(s_l)``.

    Heisenberg-picture operators ``A(s) = e^{iHs} A e^{-iHs}`` are formed as
    explicit matrix products, independently of the eigenbasis shortcut used by
    ``jump_spectral``.
    """
    eig = _eig_of(H)
    A = _as_array(A)
    _check_dims(eig.eigenvectors, A, "jump_oft")
    K = np.zeros_like(A)
    for s, f in zip(samples.s, samples.f):
        if f == 0:
            continue
        u = opalg.expm_hermitian(eig, s, sign=-1)
        K += g.Delta_s * f * (u.conj().T @ A @ u)
    return JumpOperator(K, OFT_DISCRETE, couple_site)


def kraus_from_jump(K: JumpOperator | np.ndarray, tau: float) -> KrausPair:
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    k = K.K if isinstance(K, JumpOperator) else _as_array(K)
    eig = opalg.eigh(tau * (k.conj().T @ k), check=False)
    M0 = opalg.matfun_psd(eig, "cos_sqrt")
    M1 = -1j * np.sqrt(tau) * k @ opalg.matfun_psd(eig, "sinc_sqrt")
    return KrausPair(M0=M0, M1=M1, tau=float(tau))


def apply_channel(rho: np.ndarray, kp: KrausPair) -> np.ndarray:
    rho = _as_array(rho)
    _check_dims(kp.M0, rho, "apply_channel")
    out = kp.M0 @ rho @ kp.M0.conj().T + kp.M1 @ rho @ kp.M1.conj().T
    return repair_density(out)


def dilation_generator(K: JumpOperator | np.ndarray) -> np.ndarray:
    """Hermitian ``[[0, K^dag], [K, 0]]`` with the ancilla as the leading qubit."""
    k = K.K if isinstance(K, JumpOperator) else _as_array(K)
    d = k.shape[0]
    out = np.zeros((2 * d, 2 * d), dtype=complex)
    out[:d, d:] = k.conj().T
    out[d:, :d] = k
    return out


def dilated_unitary_exact(K: JumpOperator | np.ndarray, tau: float) -> np.ndarray:
    """``exp(-i sqrt(tau) [[0, K^dag], [K, 0]])``."""
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    return opalg.expm_hermitian(dilation_generator(K), np.sqrt(tau), sign=-1)


def trace_out_ancilla(sigma: np.ndarray) -> np.ndarray:
    d = sigma.shape[0] // 2
    return sigma[:d, :d] + sigma[d:, d:]


def apply_coherent(rho: np.ndarray, H: np.ndarray | HermitianEigen, t: float) -> np.ndarray:
    rho = _as_array(rho)
    eig = _eig_of(H)
    _check_dims(eig.eigenvectors, rho, "apply_coherent")
    u = opalg.expm_hermitian(eig, t, sign=-1)
    return u @ rho @ u.conj().T


def dissipative_step(
    rho: np.ndarray, H: np.ndarray | HermitianEigen, kp: KrausPair, t_half: float
) -> np.ndarray:
    """One step: coherent half, dissipative channel, coherent half."""
    eig = _eig_of(H)
    rho = apply_coherent(rho, eig, t_half)
    rho = apply_channel(rho, kp)
    return apply_coherent(rho, eig, t_half)


def fidelity_pure(rho: np.ndarray, ground: np.ndarray) -> float:
    """``sqrt(<g|rho|g>)``, maximised over the columns of ``ground`` when several are given."""
    rho = _as_array(rho)
    g = np.asarray(ground, dtype=complex)
    if g.ndim == 1:
        g = g[:, None]
    _check_dims(rho, g, "fidelity_pure")
    overlaps = np.einsum("ik,ij,jk->k", g.conj(), rho, g).real
    return float(np.sqrt(max(float(np.max(overlaps)), 0.0)))


def ancilla_probs(rho: np.ndarray, kp: KrausPair) -> tuple[float, float]:
    rho = _as_array(rho)
    _check_dims(kp.M0, rho, "ancilla_probs")
    p0 = float(np.trace(kp.M0 @ rho @ kp.M0.conj().T).real)
    p1 = float(np.trace(kp.M1 @ rho @ kp.M1.conj().T).real)
    return p0, p1


def lindblad_defect(rho: np.ndarray, K: JumpOperator | np.ndarray, tau: float) -> float:
    """Distance between one channel step and its first-order Lindblad approximation."""
    rho = _as_array(rho)
    k = K.K if isinstance(K, JumpOperator) else _as_array(K)
    kp = kraus_from_jump(k, tau)
    exact = kp.M0 @ rho @ kp.M0.conj().T + kp.M1 @ rho @ kp.M1.conj().T
    kdk = k.conj().T @ k
    first_order = rho + tau * (k @ rho @ k.conj().T) - 0.5 * tau * (kdk @ rho + rho @ kdk)
    return opalg.spectral_norm(exact - first_order)
