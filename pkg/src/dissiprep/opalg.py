"""Dense complex operator algebra.

Operators are plain ``numpy`` complex arrays of shape ``(d, d)`` with
``d = 2**n``. Every function of an operator is evaluated through a Hermitian
eigendecomposition, never a truncated power series, so results are exact to
roundoff for arbitrarily large arguments.

Qubit ordering: qubit 0 is the most significant bit of a basis index, so
``kron(A, B)`` places ``A`` on the lower-numbered qubits.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.linalg

from .errors import NotHermitian, NotPSD, NumericalFailure
from .tolerances import TOL

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H_GATE = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULIS = (I2, X, Y, Z)


@dataclass(frozen=True)
class HermitianEigen:
    """Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian operator."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def apply_function(self, values: np.ndarray) -> np.ndarray:
        """Return ``V diag(values) V^dagger``."""
        v = self.eigenvectors
        return (v * values) @ v.conj().T


def spectral_norm(a: np.ndarray) -> float:
    """Largest singular value."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, ord=2))


def is_power_of_two(d: int) -> bool:
    return d >= 1 and (d & (d - 1)) == 0


def n_qubits_of(a: np.ndarray) -> int:
    d = a.shape[0]
    if not is_power_of_two(d):
        raise ValueError(f"dimension {d} is not a power of two")
    return d.bit_length() - 1


def check_hermitian(a: np.ndarray, tol: float = TOL.hermitian) -> None:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NotHermitian("operator has non-finite entries")
    scale = max(spectral_norm(a), 1.0)
    defect = spectral_norm(a - a.conj().T)
    if defect > tol * scale:
        raise NotHermitian(f"||A - A^dagger|| = {defect:.3e} exceeds {tol:.1e} * {scale:.3e}")


def eigh(a: np.ndarray, *, check: bool = True) -> HermitianEigen:
    """Hermitian eigendecomposition with ascending eigenvalues."""
    a = np.asarray(a, dtype=complex)
    if check:
        check_hermitian(a)
    herm = 0.5 * (a + a.conj().T)
    try:
        w, v = np.linalg.eigh(herm)
    except np.linalg.LinAlgError:
        try:
            w, v = scipy.linalg.eigh(herm, driver="ev")
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NumericalFailure(f"eigendecomposition did not converge: {exc}") from exc
    return HermitianEigen(np.asarray(w, dtype=float), v)


def _cos_sqrt(lam: np.ndarray) -> np.ndarray:
    return np.cos(np.sqrt(lam))


def _sinc_sqrt(lam: np.ndarray) -> np.ndarray:
    # np.sinc(x) = sin(pi x) / (pi x)
    return np.sinc(np.sqrt(lam) / np.pi)


_PSD_KINDS = {"cos_sqrt": _cos_sqrt, "sinc_sqrt": _sinc_sqrt, "sqrt": np.sqrt}


def clamp_psd_spectrum(eig: HermitianEigen, scale: float | None = None) -> np.ndarray:
    """Return eigenvalues with roundoff negativity clamped to zero.

    Raises NotPSD when the most negative eigenvalue is below
    ``-TOL.psd_error * scale``.
    """
    lam = eig.eigenvalues
    if scale is None:
        scale = max(float(np.max(np.abs(lam), initial=0.0)), 1.0)
    if lam.size and lam[0] < -TOL.psd_error * scale:
        raise NotPSD(f"minimum eigenvalue {lam[0]:.3e} is not PSD")
    return np.where(lam < 0.0, 0.0, lam)


def matfun_psd(a: np.ndarray | HermitianEigen, kind: str) -> np.ndarray:
    """Apply ``cos(sqrt(.))``, ``sinc(sqrt(.))`` or ``sqrt`` to a PSD operator.

    ``a`` may be given already diagonalised to share one decomposition
    between several functions of the same operator.
    """
    try:
        fn = _PSD_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown kind {kind!r}; expected one of {sorted(_PSD_KINDS)}") from None
    eig = a if isinstance(a, HermitianEigen) else eigh(a)
    lam = clamp_psd_spectrum(eig)
    return eig.apply_function(fn(lam))


def expm_hermitian(h: np.ndarray | HermitianEigen, t: float, sign: int = -1) -> np.ndarray:
    """``exp(sign * i * H * t)`` for Hermitian ``H``; ``sign=-1`` is forward time evolution."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    eig = h if isinstance(h, HermitianEigen) else eigh(h)
    return eig.apply_function(np.exp(sign * 1j * eig.eigenvalues * t))


def kron(*ops: np.ndarray) -> np.ndarray:
    """Tensor product, leftmost factor on the most significant qubits."""
    if not ops:
        return np.ones((1, 1), dtype=complex)
    return reduce(np.kron, ops)


def embed(op: np.ndarray, qubits: tuple[int, ...] | list[int], n: int) -> np.ndarray:
    """Embed a k-qubit operator acting on adjacent or arbitrary ``qubits`` into n qubits.

    Only used for building small reference operators; cost is O(4**n).
    """
    qubits = list(qubits)
    k = len(qubits)
    if op.shape != (2**k, 2**k):
        raise ValueError("operator size does not match number of qubits")
    rest = [q for q in range(n) if q not in qubits]
    full = np.kron(op, np.eye(2 ** len(rest), dtype=complex))
    order = qubits + rest
    # permute tensor axes from `order` to natural order
    perm = np.argsort(order)
    t = full.reshape([2] * (2 * n))
    t = t.transpose(list(perm) + [n + p for p in perm])
    return t.reshape(2**n, 2**n)


def pauli_string(label: str) -> np.ndarray:
    """Dense matrix of a Pauli string such as ``'XZI'`` (qubit 0 first)."""
    table = {"I": I2, "X": X, "Y": Y, "Z": Z}
    return kron(*(table[c] for c in label))
