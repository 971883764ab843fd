"""Transverse-field Ising chain with open boundaries.

    H = J * sum_{i=0}^{N-2} Z_i Z_{i+1} + Bx * sum_{i=0}^{N-1} X_i
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import opalg
from .errors import DimMismatch, DimTooLarge
from .tolerances import MAX_DENSE_QUBITS, TOL


@dataclass(frozen=True)
class IsingParams:
    N: int
    J: float = -1.0
    Bx: float = -1.2

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if not (np.isfinite(self.J) and np.isfinite(self.Bx)):
            raise ValueError("J and Bx must be finite")

    @property
    def bonds(self) -> list[tuple[int, int]]:
        return [(i, i + 1) for i in range(self.N - 1)]


@dataclass(frozen=True)
class SpectrumSummary:
    E0: float
    gap: float
    radius: float
    degeneracy: int
    ground_states: np.ndarray = field(repr=False)  # columns are ground vectors
    eigenvalues: np.ndarray = field(repr=False)


def _diag_zz(N: int, i: int, j: int) -> np.ndarray:
    idx = np.arange(2**N)
    zi = 1 - 2 * ((idx >> (N - 1 - i)) & 1)
    zj = 1 - 2 * ((idx >> (N - 1 - j)) & 1)
    return (zi * zj).astype(float)


def build_tfim(p: IsingParams) -> np.ndarray:
    if p.N > MAX_DENSE_QUBITS:
        raise DimTooLarge(f"dense TFIM limited to N <= {MAX_DENSE_QUBITS}, got {p.N}")
    d = 2**p.N
    zz = np.zeros(d)
    for i, j in p.bonds:
        zz += _diag_zz(p.N, i, j)
    h = np.diag(p.J * zz).astype(complex)
    if p.Bx != 0.0:
        idx = np.arange(d)
        for i in range(p.N):
            h[idx ^ (1 << (p.N - 1 - i)), idx] += p.Bx
    return h


def zz_part(p: IsingParams) -> np.ndarray:
    return build_tfim(IsingParams(p.N, p.J, 0.0))


def x_part(p: IsingParams) -> np.ndarray:
    return build_tfim(IsingParams(p.N, 0.0, p.Bx))


def spectrum_summary(h: np.ndarray, degeneracy_tol: float | None = None) -> SpectrumSummary:
    eig = opalg.eigh(h)
    lam = eig.eigenvalues
    E0 = float(lam[0])
    if degeneracy_tol is None:
        degeneracy_tol = TOL.degeneracy * (1.0 + abs(E0))
    g0 = int(np.count_nonzero(lam <= E0 + degeneracy_tol))
    gap = float(lam[g0] - E0) if g0 < lam.size else 0.0
    radius = float(np.max(np.abs(lam)))
    return SpectrumSummary(
        E0=E0,
        gap=gap,
        radius=radius,
        degeneracy=g0,
        ground_states=eig.eigenvectors[:, :g0].copy(),
        eigenvalues=lam.copy(),
    )


def energy_expectation(rho: np.ndarray, h: np.ndarray) -> float:
    if rho.shape != h.shape:
        raise DimMismatch(f"state shape {rho.shape} does not match Hamiltonian {h.shape}")
    e = np.einsum("ij,ji->", rho, h)
    scale = max(opalg.spectral_norm(h), 1.0)
    if abs(e.imag) > TOL.imag_energy * scale:
        raise ValueError(f"energy has imaginary part {e.imag:.3e}; state is not Hermitian")
    return float(e.real)


def y_product_state(N: int) -> np.ndarray:
    """Density matrix of the product of +1 eigenstates of Pauli Y."""
    plus_y = np.array([1.0, 1.0j]) / np.sqrt(2)
    psi = opalg.kron(*([plus_y[:, None]] * N))[:, 0]
    return np.outer(psi, psi.conj())


def global_flip(N: int) -> np.ndarray:
    return opalg.kron(*([opalg.X] * N))


def free_fermion_summary(p: IsingParams) -> SpectrumSummary:
    """Ground energy and gap from the Jordan-Wigner free-fermion solution.

    Quasiparticle energies are twice the singular values of the bidiagonal
    matrix with ``|Bx|`` on the diagonal and ``|J|`` above it; the spectrum is
    symmetric, so the radius equals ``|E0|``. Works at any ``N`` without a
    dense Hamiltonian; ``ground_states`` and ``eigenvalues`` are left empty.
    """
    m = np.diag(np.full(p.N, abs(p.Bx))) + np.diag(np.full(p.N - 1, abs(p.J)), 1)
    sv = np.linalg.svd(m, compute_uv=False)
    E0 = -float(np.sum(sv))
    eps_min = float(np.min(sv))
    degeneracy = 2 if eps_min < TOL.degeneracy * (1.0 + abs(E0)) else 1
    gap = 2.0 * float(np.sort(sv)[1]) if degeneracy == 2 and p.N > 1 else 2.0 * eps_min
    return SpectrumSummary(
        E0=E0,
        gap=gap,
        radius=abs(E0),
        degeneracy=degeneracy,
        ground_states=np.zeros((0, 0), dtype=complex),
        eigenvalues=np.zeros(0),
    )


def tfim_summary(p: IsingParams) -> SpectrumSummary:
    """Dense summary for ``N <= 12``, free-fermion summary beyond."""
    if p.N <= MAX_DENSE_QUBITS:
        return spectrum_summary(build_tfim(p))
    return free_fermion_summary(p)
