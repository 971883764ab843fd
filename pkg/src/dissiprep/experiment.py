"""Drivers that step the dissipative protocol and collect per-step observables."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import opalg
from .channel import (
    KrausPair,
    ancilla_probs,
    apply_channel,
    apply_coherent,
    fidelity_pure,
    jump_oft,
    jump_spectral,
    kraus_from_jump,
)
from .config import ExperimentConfig, resolve_filter
from .errors import DimTooLarge
from .model import build_tfim, energy_expectation, y_product_state
from .circuit import Circuit, build_experiment, endpoint_span
from .noise import NoiseModel
from .simulator import density_run_with_record, exact_energy

MAX_CHANNEL_QUBITS = 9


@dataclass(frozen=True)
class StepRecord:
    """Observables after ``m`` dissipative steps; ``p0`` refers to step ``m`` itself."""

    m: int
    E: float
    F: float
    p0: float

    @property
    def z_anc(self) -> float:
        return 2.0 * self.p0 - 1.0


@dataclass(frozen=True)
class ChannelSetup:
    h: np.ndarray
    eig: opalg.HermitianEigen
    kraus: KrausPair
    pre: np.ndarray  # system unitary applied before the Kraus map
    post: np.ndarray  # system unitary applied after it
    ground: np.ndarray


def channel_setup(cfg: ExperimentConfig) -> ChannelSetup:
    """Dense Kraus pair of one dissipative block, matching the circuit's endpoint mode.

    The circuit's dilated block with both outer factors kept is
    ``V^dag W V`` with ``V = exp(+i H S)`` on the system, ``S = endpoint_span``. Dropping them leaves
    ``V (V^dag W V) V^dag``, i.e. the kept block preceded by ``exp(-i H S)``
    and followed by ``exp(+i H S)``; these are returned as ``pre`` and ``post``.
    """
    N = cfg.ising.N
    if N > MAX_CHANNEL_QUBITS:
        raise DimTooLarge(f"channel backend limited to N <= {MAX_CHANNEL_QUBITS}")
    rf = resolve_filter(cfg)
    h = build_tfim(cfg.ising)
    eig = opalg.eigh(h)
    A = opalg.embed(opalg.Z, [0], N)
    if cfg.jump == "oft":
        K = jump_oft(eig, A, rf.samples, rf.grid)
    else:
        K = jump_spectral(eig, A, rf.params)
    kraus = kraus_from_jump(K, cfg.tau)
    shift = opalg.expm_hermitian(eig, endpoint_span(rf.samples), sign=1)
    ident = np.eye(2**N, dtype=complex)
    pre = shift.conj().T if cfg.endpoint in ("drop", "drop_in") else ident
    post = shift if cfg.endpoint in ("drop", "drop_out") else ident
    return ChannelSetup(h, eig, kraus, pre, post, rf.spectrum.ground_states)


def channel_trace(cfg: ExperimentConfig, m_max: int, rho0: np.ndarray | None = None) -> list[StepRecord]:
    """Exact density-matrix evolution with exact coherent halves."""
    st = channel_setup(cfg)
    rho = y_product_state(cfg.ising.N) if rho0 is None else rho0
    rows = [StepRecord(0, energy_expectation(rho, st.h), fidelity_pure(rho, st.ground), float("nan"))]
    for m in range(1, m_max + 1):
        rho = apply_coherent(rho, st.eig, cfg.t_half)
        rho = st.pre @ rho @ st.pre.conj().T
        p0, _ = ancilla_probs(rho, st.kraus)
        rho = apply_channel(rho, st.kraus)
        rho = st.post @ rho @ st.post.conj().T
        rho = apply_coherent(rho, st.eig, cfg.t_half)
        rows.append(StepRecord(m, energy_expectation(rho, st.h), fidelity_pure(rho, st.ground), p0))
    return rows


def circuit_energies(cfg: ExperimentConfig, m_max: int) -> list[float]:
    """Noiseless exact energies of the gate-level circuits for ``m = 0..m_max``."""
    return [exact_energy(cfg, m) for m in range(m_max + 1)]


def circuit_state(cfg: ExperimentConfig, m: int, noise: NoiseModel | None = None) -> tuple[np.ndarray, float]:
    """System density matrix after ``m`` circuit steps and ``p0`` of the last ancilla readout.

    The final system measurements are stripped so the state keeps its
    coherences; the ancilla is traced out. ``p0`` is NaN for ``m = 0``.
    """
    c = build_experiment(m, cfg, "zz")
    body = Circuit(c.n_qubits, c.n_clbits, tuple(c.gates[: len(c.gates) - cfg.ising.N]))
    rho, p1 = density_run_with_record(body, noise)
    d = 2**cfg.ising.N
    sys_rho = rho[:d, :d] + rho[d:, d:]
    p0 = float(1.0 - p1[m - 1]) if m > 0 else float("nan")
    return sys_rho, p0


def circuit_trace(cfg: ExperimentConfig, m_max: int, noise: NoiseModel | None = None) -> list[StepRecord]:
    """Exact (infinite-shot) observables of the gate-level circuits for ``m = 0..m_max``."""
    rf = resolve_filter(cfg)
    h = build_tfim(cfg.ising)
    rows = []
    for m in range(m_max + 1):
        rho, p0 = circuit_state(cfg, m, noise)
        rows.append(StepRecord(m, energy_expectation(rho, h), fidelity_pure(rho, rf.spectrum.ground_states), p0))
    return rows
