"""Numerical tolerance constants shared by every module."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-10  # relative to the spectral norm
    psd_clamp: float = 1e-10  # eigenvalues above -psd_clamp are clamped to zero
    psd_error: float = 1e-8  # relative negativity that raises NotPSD
    density_negativity: float = 1e-8  # absolute; repaired below this, raised above
    unit_trace: float = 1e-10
    imag_energy: float = 1e-10
    degeneracy: float = 1e-8  # scaled by (1 + |E0|)
    zero_weight: float = 1e-14  # relative |f(s_l)| below which an interaction is pruned


TOL = Tolerances()

# Dense operator paths are capped at this many system qubits.
MAX_DENSE_QUBITS = 12
