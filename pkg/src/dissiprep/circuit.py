"""Gate-level circuits for dissipative ground-state preparation.

Angle conventions (all angles in radians):

    RX(t) = exp(-i t X / 2),  RY(t) = exp(-i t Y / 2),  RZ(t) = exp(-i t Z / 2),
    RZZ(a) = exp(-i (a / 2) Z (x) Z).

A second-order Trotter step approximating ``exp(sign * i * H * dt)`` for the
Ising chain is

    RX(-sign * Bx * dt) on every site,
    RZZ(-2 * sign * J * dt) on every bond,
    RX(-sign * Bx * dt) on every site,

since ``exp(sign * i * Bx * (dt / 2) * X) = RX(-sign * Bx * dt)`` and
``exp(sign * i * J * dt * Z Z) = RZZ(-2 * sign * J * dt)``.

In experiment circuits qubit 0 is the ancilla and system site ``i`` is qubit
``i + 1``. The ancilla-system coupling ``exp(-i (a / 2) X_anc Z_site)`` is
realised as Hadamard, RZZ(a), Hadamard on the ancilla.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .config import ExperimentConfig, resolve_filter
from .errors import DimTooLarge, EvenFoldFactor, InvalidConfig, NonUnitaryElement
from .filters import FilterSamples, TimeGrid
from .model import IsingParams
from .opalg import H_GATE
from .tolerances import TOL

ROTATIONS = ("RX", "RY", "RZ", "RZZ")
FIXED_1Q = ("Hadamard", "SGate")
NON_UNITARY = ("Reset", "Measure", "PauliX_conditional")
KINDS = ROTATIONS + FIXED_1Q + NON_UNITARY
TWO_QUBIT = ("RZZ",)
MAX_UNITARY_QUBITS = 10


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    clbit: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        nq = 2 if self.kind in TWO_QUBIT else 1
        if len(self.qubits) != nq:
            raise ValueError(f"{self.kind} acts on {nq} qubit(s), got {self.qubits}")
        if nq == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError(f"{self.kind} needs distinct qubits, got {self.qubits}")
        if (self.kind in ROTATIONS) != (self.angle is not None):
            raise ValueError(f"{self.kind} angle mismatch: {self.angle}")
        needs_clbit = self.kind in ("Measure", "PauliX_conditional")
        if needs_clbit != (self.clbit is not None):
            raise ValueError(f"{self.kind} clbit mismatch: {self.clbit}")

    def to_line(self) -> str:
        parts = [self.kind, *map(str, self.qubits)]
        if self.angle is not None:
            parts.append("%.17g" % self.angle)
        if self.clbit is not None:
            parts.append(str(self.clbit))
        return " ".join(parts)

    @classmethod
    def from_line(cls, line: str) -> "Gate":
        tok = line.split()
        kind = tok[0]
        nq = 2 if kind in TWO_QUBIT else 1
        qubits = tuple(int(t) for t in tok[1 : 1 + nq])
        rest = tok[1 + nq :]
        angle = float(rest.pop(0)) if kind in ROTATIONS else None
        clbit = int(rest.pop(0)) if kind in ("Measure", "PauliX_conditional") else None
        if rest:
            raise ValueError(f"trailing tokens in gate line {line!r}")
        return cls(kind, qubits, angle, clbit)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    n_clbits: int
    gates: tuple[Gate, ...] = field(default=(), repr=False)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) >= self.n_qubits or min(g.qubits) < 0:
                raise ValueError(f"gate {g.to_line()} outside {self.n_qubits} qubits")
            if g.clbit is not None and not 0 <= g.clbit < self.n_clbits:
                raise ValueError(f"gate {g.to_line()} outside {self.n_clbits} clbits")

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    @property
    def rzz_count(self) -> int:
        return self.count("RZZ")

    @property
    def spam_count(self) -> int:
        """State preparations plus measurement events (resets are measurements here)."""
        return self.n_qubits + self.count("Measure") + self.count("Reset")

    def to_text(self) -> str:
        lines = [f"# n_qubits={self.n_qubits} n_clbits={self.n_clbits}"]
        lines += [g.to_line() for g in self.gates]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        n_qubits = n_clbits = None
        gates = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    key, _, val = tok.partition("=")
                    if key == "n_qubits":
                        n_qubits = int(val)
                    elif key == "n_clbits":
                        n_clbits = int(val)
                continue
            gates.append(Gate.from_line(line))
        if n_qubits is None:
            n_qubits = 1 + max((max(g.qubits) for g in gates), default=-1)
        if n_clbits is None:
            n_clbits = 1 + max((g.clbit for g in gates if g.clbit is not None), default=-1)
        return cls(n_qubits, n_clbits, tuple(gates))


def trotter_tfim_step(p: IsingParams, dt: float, sign: int = -1, offset: int = 0) -> list[Gate]:
    """One second-order step approximating ``exp(sign * i * H * dt)`` on qubits ``offset..``."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    rx = -sign * p.Bx * dt
    rzz = -2.0 * sign * p.J * dt
    half = [Gate("RX", (offset + i,), rx) for i in range(p.N)]
    bonds = [Gate("RZZ", (offset + i, offset + j), rzz) for i, j in p.bonds]
    return half + bonds + list(half)


def _evolve(p: IsingParams, t: float, step: float, substeps: int, offset: int) -> list[Gate]:
    """Trotterised ``exp(-i H t)``, ``substeps`` steps per ``step`` of elapsed time."""
    if t == 0.0:
        return []
    n = max(1, int(np.ceil(abs(t) / step - 1e-9))) * substeps
    sign = -1 if t > 0 else 1
    gates: list[Gate] = []
    for _ in range(n):
        gates += trotter_tfim_step(p, abs(t) / n, sign, offset)
    return gates


def _rz(angle: float) -> list[Gate]:
    return [Gate("RZ", (0,), float(angle))] if abs(angle) > 1e-15 else []


def _retained(samples: FilterSamples) -> np.ndarray:
    peak = float(np.max(samples.abs_f)) if samples.abs_f.size else 0.0
    return samples.abs_f > TOL.zero_weight * peak


def endpoint_span(samples: FilterSamples) -> float:
    """``|s|`` of the outermost retained sample, the evolution time of each endpoint factor.

    Zero-weight samples are pruned, so this can be shorter than ``S_s``.
    """
    keep = _retained(samples)
    if not np.any(keep):
        return 0.0
    return float(-samples.s[np.flatnonzero(keep)[0]])


def dilated_w_gates(
    samples: FilterSamples,
    g: TimeGrid,
    p: IsingParams,
    tau: float,
    trotter_substeps: int = 1,
    endpoint: str = "keep",
    *,
    couple_site: int = 0,
    w_reps: int = 1,
    merge_center: bool = True,
) -> list[Gate]:
    """Trotterised dilated unitary ``exp(-i sqrt(tau) [[0, K^dag], [K, 0]])``.

    Each grid point contributes ``V_l^dag exp(-i (a_l / 2) X_anc Z_site) V_l``
    with ``V_l = RZ(-phase_l)_anc (x) exp(-i H s_l)`` and
    ``a_l = sqrt(tau) * Delta_s * |f(s_l)| / w_reps``. Terms are applied in the
    palindromic order ``l = -M..M, M..-M``, repeated ``w_reps`` times. Between
    consecutive terms ``l -> l'`` only ``V_l' V_l^dag`` is emitted, which is an
    ancilla Z rotation by ``phase_l - phase_l'`` and system evolution
    ``exp(-i H (s_l' - s_l))``; terms with identical ``l`` merge into one
    interaction. Zero-weight samples are skipped entirely. ``endpoint``
    controls the outermost ``V`` factors (see ``endpoint_span``): ``keep``
    emits both, ``drop`` neither, ``drop_in``/``drop_out`` omit one side.
    """
    if endpoint not in ("keep", "drop", "drop_in", "drop_out"):
        raise ValueError(f"unknown endpoint mode {endpoint!r}")
    if tau < 0:
        raise ValueError("tau must be non-negative")
    M = samples.M_s
    keep = _retained(samples)
    scale = np.sqrt(tau) * g.Delta_s / w_reps
    order = list(range(-M, M + 1)) + list(range(M, -M - 1, -1))
    events: list[list] = []  # [index, angle]
    for _ in range(w_reps):
        for pos, l in enumerate(order):
            if not keep[l + M]:
                continue
            alpha = scale * samples.abs_f[l + M]
            center_pair = pos == 2 * M + 1
            if events and events[-1][0] == l and (merge_center or not center_pair):
                events[-1][1] += alpha
            else:
                events.append([l, alpha])
    if not events:
        return []

    site = 1 + couple_site
    offset = 1
    s, phase = samples.s, samples.phase
    gates: list[Gate] = []

    def interaction(alpha: float) -> list[Gate]:
        return [Gate("Hadamard", (0,)), Gate("RZZ", (0, site), float(alpha)), Gate("Hadamard", (0,))]

    first = events[0][0] + M
    if endpoint in ("keep", "drop_out"):
        gates += _rz(-phase[first])
        gates += _evolve(p, s[first], g.Delta_s, trotter_substeps, offset)
    prev = None
    for l, alpha in events:
        i = l + M
        if prev is not None:
            gates += _rz(phase[prev] - phase[i])
            gates += _evolve(p, s[i] - s[prev], g.Delta_s, trotter_substeps, offset)
        gates += interaction(alpha)
        prev = i
    if endpoint in ("keep", "drop_in"):
        gates += _rz(phase[prev])
        gates += _evolve(p, -s[prev], g.Delta_s, trotter_substeps, offset)
    return gates


BASES = ("zz", "x")


@lru_cache(maxsize=32)
def _w_block(cfg: ExperimentConfig) -> tuple[Gate, ...]:
    rf = resolve_filter(cfg)
    return tuple(
        dilated_w_gates(
            rf.samples,
            rf.grid,
            cfg.ising,
            cfg.tau,
            cfg.trotter_substeps,
            cfg.endpoint,
            w_reps=cfg.w_reps,
            merge_center=cfg.merge_center,
        )
    )


def coherent_half_gates(cfg: ExperimentConfig) -> list[Gate]:
    gates: list[Gate] = []
    for _ in range(cfg.n_t // 2):
        gates += trotter_tfim_step(cfg.ising, cfg.dt, -1, offset=1)
    return gates


def build_experiment(m: int, cfg: ExperimentConfig, basis: str = "zz") -> Circuit:
    """Full measurement circuit after ``m`` dissipative steps.

    Clbits ``0..m-1`` hold the ancilla outcomes; clbit ``m + i`` holds the
    final measurement of system site ``i``.
    """
    if int(m) != m or m < 0:
        raise InvalidConfig(f"m must be a non-negative integer, got {m}", field="m")
    if basis not in BASES:
        raise InvalidConfig(f"basis must be one of {BASES}, got {basis!r}", field="basis")
    N = cfg.ising.N
    gates: list[Gate] = []
    for i in range(N):
        gates += [Gate("Hadamard", (i + 1,)), Gate("SGate", (i + 1,))]
    half = coherent_half_gates(cfg)
    w = list(_w_block(cfg))
    for k in range(m):
        gates += half
        gates += w
        gates += [Gate("Measure", (0,), clbit=k), Gate("PauliX_conditional", (0,), clbit=k)]
        gates += half
    if basis == "x":
        gates += [Gate("Hadamard", (i + 1,)) for i in range(N)]
    gates += [Gate("Measure", (i + 1,), clbit=m + i) for i in range(N)]
    return Circuit(N + 1, m + N, tuple(gates))


def fold_gates(c: Circuit, G: int) -> Circuit:
    """Replace every ``RZZ(t)`` by ``[RZZ(t) RZZ(-t)]^((G-1)/2) RZZ(t)``."""
    if int(G) != G or G < 1 or G % 2 == 0:
        raise EvenFoldFactor(f"fold factor must be an odd positive integer, got {G}")
    if G == 1:
        return c
    out: list[Gate] = []
    for g in c.gates:
        if g.kind == "RZZ":
            inv = replace(g, angle=-g.angle)
            out += [g, inv] * ((G - 1) // 2) + [g]
        else:
            out.append(g)
    return Circuit(c.n_qubits, c.n_clbits, tuple(out))


def gate_matrix(g: Gate) -> np.ndarray:
    """Dense matrix of a unitary gate on its own qubits (first qubit most significant)."""
    if g.kind in NON_UNITARY:
        raise NonUnitaryElement(f"{g.kind} has no unitary matrix")
    if g.kind == "Hadamard":
        return H_GATE
    if g.kind == "SGate":
        return np.diag([1.0, 1.0j])
    c, s = np.cos(g.angle / 2), np.sin(g.angle / 2)
    if g.kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if g.kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if g.kind == "RZ":
        return np.diag([np.exp(-0.5j * g.angle), np.exp(0.5j * g.angle)])
    ph = np.exp(-0.5j * g.angle * np.array([1, -1, -1, 1]))
    return np.diag(ph)


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Product of all gate matrices; only for measurement-free circuits on few qubits."""
    if c.n_qubits > MAX_UNITARY_QUBITS:
        raise DimTooLarge(f"circuit_unitary limited to {MAX_UNITARY_QUBITS} qubits")
    n = c.n_qubits
    d = 2**n
    # columns of U stored as the trailing axis of an (2,)*n tensor
    u = np.eye(d, dtype=complex).reshape((2,) * n + (d,))
    for g in c.gates:
        mat = gate_matrix(g)
        k = len(g.qubits)
        t = mat.reshape((2,) * (2 * k))
        u = np.tensordot(t, u, axes=(list(range(k, 2 * k)), list(g.qubits)))
        # tensordot puts the gate's output axes first; move them back in place
        u = np.moveaxis(u, list(range(k)), list(g.qubits))
    return u.reshape(d, d)
