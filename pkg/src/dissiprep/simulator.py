"""Circuit execution: statevector trajectories and an exact density-matrix backend.

Trajectory engine
-----------------
All shots of a circuit are simulated together. Shots that have seen the same
measurement outcomes and noise events share one statevector ("row"); a row is
split only when its shots diverge. Single-qubit gates are buffered per qubit
and RZZ gates are buffered as one diagonal phase, so a Trotter layer costs a
handful of dense contractions regardless of the number of rows.

Randomness is drawn per shot from a generator seeded by ``shot_seed``, with a
fixed layout of uniforms per circuit (prep flips, then one per RZZ and two per
Measure/Reset in gate order). Results therefore do not depend on how shots
are grouped, batched or ordered.

Density backend
---------------
The density matrix is a tensor with ``n`` ket axes followed by ``n`` bra
axes. Classical bits that later condition a gate are tracked as explicit
branches until their last use.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .circuit import BASES, Circuit, Gate, build_experiment, fold_gates, gate_matrix
from .config import ExperimentConfig
from .errors import DimTooLarge
from .noise import NoiseModel
from .opalg import PAULIS, X

MAX_TRAJECTORY_QUBITS = 24
MAX_DENSITY_QUBITS = 10
AMPLITUDE_BUDGET = 2**23  # amplitudes held at once by the trajectory engine
PHASE_CACHE_BYTES = 2**27
FUSE_QUBITS = 5

__all__ = [
    "NoiseModel",
    "PureState",
    "Estimate",
    "ShotRecord",
    "shot_seed",
    "run_shot",
    "run_shots",
    "statevector",
    "density_run",
    "density_run_with_record",
    "exact_energy",
    "estimate_energy",
    "sample_energy",
    "write_bit_log",
    "read_bit_log",
]


@dataclass(frozen=True)
class PureState:
    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.amplitudes.shape != (2**self.n_qubits,):
            raise ValueError("amplitude vector has the wrong length")
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state norm is {norm}")


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    shots: int


@dataclass(frozen=True)
class ShotRecord:
    shots: np.ndarray = field(repr=False)  # shot indices, int64
    bits: np.ndarray = field(repr=False)  # (n_shots, n_clbits) uint8


def shot_seed(master_seed: int, key: tuple[int, ...], shot: int) -> int:
    """64-bit seed of one shot; ``key`` separates independent runs under one master seed."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key) + (int(shot),))
    return int(ss.generate_state(1, np.uint64)[0])


# --- random draw layout ------------------------------------------------------


def _draw_layout(c: Circuit) -> tuple[np.ndarray, int]:
    offsets = np.full(len(c.gates), -1, dtype=np.int64)
    off = c.n_qubits
    for i, g in enumerate(c.gates):
        if g.kind == "RZZ":
            offsets[i] = off
            off += 1
        elif g.kind in ("Measure", "Reset"):
            offsets[i] = off
            off += 2
    return offsets, off


def _draws(seeds: list[int], size: int) -> np.ndarray:
    out = np.empty((len(seeds), size))
    for i, s in enumerate(seeds):
        out[i] = np.random.default_rng(s).random(size)
    return out


# --- statevector kernels -------------------------------------------------------


def _apply_block(psi: np.ndarray, mat: np.ndarray, lo: int, k: int, n: int) -> np.ndarray:
    """Apply a ``2**k`` matrix to contiguous qubits ``lo..lo+k-1`` of every row."""
    rows = psi.shape[0]
    after = 2 ** (n - lo - k)
    if after == 1:
        return (psi.reshape(-1, 2**k) @ mat.T).reshape(rows, -1)
    view = psi.reshape(rows * 2**lo, 2**k, after)
    return np.matmul(mat, view).reshape(rows, -1)


class _PhaseCache:
    """LRU cache of diagonal phase vectors keyed by (n, RZZ terms)."""

    def __init__(self, budget: int = PHASE_CACHE_BYTES):
        self.budget = budget
        self.used = 0
        self.store: OrderedDict = OrderedDict()

    def get(self, n: int, terms: tuple) -> np.ndarray:
        key = (n, terms)
        hit = self.store.get(key)
        if hit is not None:
            self.store.move_to_end(key)
            return hit
        idx = np.arange(2**n, dtype=np.int64)
        theta = np.zeros(2**n)
        for q1, q2, angle in terms:
            parity = ((idx >> (n - 1 - q1)) ^ (idx >> (n - 1 - q2))) & 1
            theta += angle * (1 - 2 * parity)
        vec = np.exp(-0.5j * theta)
        self.store[key] = vec
        self.used += vec.nbytes
        while self.used > self.budget and len(self.store) > 1:
            _, old = self.store.popitem(last=False)
            self.used -= old.nbytes
        return vec


_PHASES = _PhaseCache()


def _is_diagonal(m: np.ndarray) -> bool:
    return m[0, 1] == 0 and m[1, 0] == 0


class _Batch:
    """Rows of statevectors, each carrying the local indices of the shots it represents."""

    def __init__(self, psi: np.ndarray, shots: list[np.ndarray]):
        self.psi = psi
        self.shots = shots

    @property
    def n_rows(self) -> int:
        return len(self.shots)


class _Engine:
    def __init__(self, c: Circuit, noise: NoiseModel | None, u: np.ndarray, bits: np.ndarray):
        self.c = c
        self.n = c.n_qubits
        self.p2q = noise.p2q if noise is not None else 0.0
        self.p_spam = noise.p_spam if noise is not None else 0.0
        self.u = u
        self.bits = bits
        self.offsets, _ = _draw_layout(c)
        self.max_rows = max(1, AMPLITUDE_BUDGET // 2**self.n)
        self.mats = [None if g.kind in ("Measure", "Reset", "PauliX_conditional", "RZZ") else gate_matrix(g) for g in c.gates]

    # -- driver

    def run(self) -> None:
        flips = self.u[:, : self.n] < self.p_spam
        weights = 1 << np.arange(self.n - 1, -1, -1)
        start = flips.astype(np.int64) @ weights
        labels, inverse = np.unique(start, return_inverse=True)
        shots = [np.flatnonzero(inverse == i) for i in range(labels.size)]
        psi = np.zeros((labels.size, 2**self.n), dtype=complex)
        psi[np.arange(labels.size), labels] = 1.0
        self._run_from(_Batch(psi, shots), 0)

    def _run_from(self, batch: _Batch, start: int) -> None:
        pending_l: dict[int, np.ndarray] = {}
        pending_d: list[tuple[int, int, float]] = []
        d_qubits: set[int] = set()

        def flush():
            nonlocal pending_d
            if pending_l:
                self._apply_local(batch, pending_l)
                pending_l.clear()
            if pending_d:
                batch.psi *= _PHASES.get(self.n, tuple(pending_d))
                pending_d = []
                d_qubits.clear()

        gates = self.c.gates
        for gi in range(start, len(gates)):
            g = gates[gi]
            kind = g.kind
            if self.mats[gi] is not None:
                q = g.qubits[0]
                m = self.mats[gi]
                if q in d_qubits and not _is_diagonal(m):
                    flush()
                prev = pending_l.get(q)
                pending_l[q] = m if prev is None else m @ prev
                continue
            if kind == "RZZ":
                pending_d.append((g.qubits[0], g.qubits[1], float(g.angle)))
                d_qubits.update(g.qubits)
                if self.p2q > 0:
                    col = self.u[:, self.offsets[gi]]
                    if np.any(col < self.p2q):
                        flush()
                        batch = self._depolarize(batch, g, col)
            else:
                flush()
                if kind == "Measure":
                    batch = self._measure(batch, g, gi)
                elif kind == "Reset":
                    batch = self._reset(batch, g, gi)
                else:
                    batch = self._conditional_x(batch, g)
            if batch.n_rows > self.max_rows:
                flush()
                for lo in range(0, batch.n_rows, self.max_rows):
                    sl = slice(lo, lo + self.max_rows)
                    self._run_from(_Batch(batch.psi[sl].copy(), batch.shots[sl]), gi + 1)
                return
        flush()

    # -- kernels

    def _apply_local(self, batch: _Batch, pending: dict[int, np.ndarray]) -> None:
        qubits = sorted(pending)
        max_k = FUSE_QUBITS if self.n > 8 else min(self.n, 7)
        i = 0
        while i < len(qubits):
            lo = qubits[i]
            hi = lo
            j = i
            while j + 1 < len(qubits) and qubits[j + 1] - lo < max_k:
                j += 1
                hi = qubits[j]
            mats = [pending.get(q, np.eye(2)) for q in range(lo, hi + 1)]
            mat = mats[0]
            for m in mats[1:]:
                mat = np.kron(mat, m)
            batch.psi = _apply_block(batch.psi, mat, lo, hi - lo + 1, self.n)
            i = j + 1

    def _split(self, batch: _Batch, labels: np.ndarray) -> tuple[_Batch, np.ndarray]:
        """Regroup rows so that every row's shots share one label (per-shot ``labels``)."""
        src, new_shots, new_labels = [], [], []
        for r, sh in enumerate(batch.shots):
            lab = labels[sh]
            first = lab[0]
            if np.all(lab == first):
                src.append(r)
                new_shots.append(sh)
                new_labels.append(first)
                continue
            for value in np.unique(lab):
                src.append(r)
                new_shots.append(sh[lab == value])
                new_labels.append(value)
        if len(src) == batch.n_rows:
            return _Batch(batch.psi, new_shots), np.asarray(new_labels)
        return _Batch(batch.psi[src], new_shots), np.asarray(new_labels)

    def _apply_on_rows(self, batch: _Batch, rows: np.ndarray, mat: np.ndarray, q: int) -> None:
        if rows.size:
            batch.psi[rows] = _apply_block(batch.psi[rows], mat, q, 1, self.n)

    def _depolarize(self, batch: _Batch, g: Gate, col: np.ndarray) -> _Batch:
        err = col < self.p2q
        which = np.where(err, 1 + np.minimum((col / self.p2q * 15).astype(np.int64), 14), 0)
        batch, labels = self._split(batch, which)
        q1, q2 = g.qubits
        for k in np.unique(labels):
            if k == 0:
                continue
            rows = np.flatnonzero(labels == k)
            a, b = divmod(int(k), 4)
            if a:
                self._apply_on_rows(batch, rows, PAULIS[a], q1)
            if b:
                self._apply_on_rows(batch, rows, PAULIS[b], q2)
        return batch

    def _prob_one(self, batch: _Batch, q: int) -> np.ndarray:
        view = batch.psi.reshape(batch.n_rows, 2**q, 2, -1)
        return np.sum(np.abs(view[:, :, 1, :]) ** 2, axis=(1, 2))

    def _project(self, batch: _Batch, q: int, outcome: np.ndarray) -> None:
        view = batch.psi.reshape(batch.n_rows, 2**q, 2, -1)
        view[outcome == 1, :, 0, :] = 0.0
        view[outcome == 0, :, 1, :] = 0.0
        norms = np.linalg.norm(batch.psi, axis=1)
        batch.psi /= norms[:, None]

    def _sample(self, batch: _Batch, q: int, gi: int) -> tuple[_Batch, np.ndarray, np.ndarray]:
        p1 = np.clip(self._prob_one(batch, q), 0.0, 1.0)
        off = self.offsets[gi]
        row_of = np.empty(self.u.shape[0], dtype=np.int64)
        for r, sh in enumerate(batch.shots):
            row_of[sh] = r
        outcome = np.zeros(self.u.shape[0], dtype=np.int64)
        active = np.concatenate(batch.shots)
        outcome[active] = self.u[active, off] < p1[row_of[active]]
        flip = (self.u[:, off + 1] < self.p_spam).astype(np.int64)
        return batch, outcome, flip

    def _measure(self, batch: _Batch, g: Gate, gi: int) -> _Batch:
        q = g.qubits[0]
        batch, outcome, flip = self._sample(batch, q, gi)
        batch, labels = self._split(batch, outcome)
        self._project(batch, q, labels)
        for sh in batch.shots:
            self.bits[sh, g.clbit] = outcome[sh] ^ flip[sh]
        return batch

    def _reset(self, batch: _Batch, g: Gate, gi: int) -> _Batch:
        q = g.qubits[0]
        batch, outcome, flip = self._sample(batch, q, gi)
        batch, labels = self._split(batch, 2 * outcome + flip)
        self._project(batch, q, labels // 2)
        # the qubit ends in |flip>
        self._apply_on_rows(batch, np.flatnonzero((labels // 2) != (labels % 2)), X, q)
        return batch

    def _conditional_x(self, batch: _Batch, g: Gate) -> _Batch:
        batch, labels = self._split(batch, self.bits[:, g.clbit].astype(np.int64))
        self._apply_on_rows(batch, np.flatnonzero(labels == 1), X, g.qubits[0])
        return batch


def _check_width(c: Circuit) -> None:
    if c.n_qubits > MAX_TRAJECTORY_QUBITS:
        raise DimTooLarge(f"trajectory engine limited to {MAX_TRAJECTORY_QUBITS} qubits")


def _simulate(c: Circuit, noise: NoiseModel | None, seeds: list[int]) -> np.ndarray:
    _check_width(c)
    _, size = _draw_layout(c)
    u = _draws(seeds, size)
    bits = np.zeros((len(seeds), c.n_clbits), dtype=np.uint8)
    if seeds:
        _Engine(c, noise, u, bits).run()
    return bits


def run_shot(c: Circuit, noise: NoiseModel | None, seed: int) -> np.ndarray:
    """Classical record of one shot driven by a 64-bit seed."""
    return _simulate(c, noise, [int(seed)])[0]


def run_shots(
    c: Circuit,
    noise: NoiseModel | None,
    master_seed: int,
    n_shots: int,
    key: tuple[int, ...] = (),
    first_shot: int = 0,
) -> ShotRecord:
    """Shots ``first_shot .. first_shot + n_shots - 1``; shot ``i`` equals ``run_shot`` with ``shot_seed(master_seed, key, i)``."""
    idx = np.arange(first_shot, first_shot + n_shots, dtype=np.int64)
    seeds = [shot_seed(master_seed, key, int(i)) for i in idx]
    return ShotRecord(shots=idx, bits=_simulate(c, noise, seeds))


def statevector(c: Circuit) -> PureState:
    """Final state of a circuit without measurements or resets, starting from ``|0...0>``."""
    if any(g.kind in ("Measure", "Reset", "PauliX_conditional") for g in c.gates):
        raise ValueError("statevector requires a measurement-free circuit")
    _check_width(c)
    eng = _Engine(c, None, np.zeros((1, c.n_qubits)), np.zeros((1, 0), dtype=np.uint8))
    psi = np.zeros((1, 2**c.n_qubits), dtype=complex)
    psi[0, 0] = 1.0
    batch = _Batch(psi, [np.array([0])])
    eng._run_from(batch, 0)
    return PureState(c.n_qubits, batch.psi[0])


# --- density backend -------------------------------------------------------------


def _apply_tensor(t: np.ndarray, mat: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    k = len(axes)
    m = mat.reshape((2,) * (2 * k))
    out = np.tensordot(m, t, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def _apply_unitary(t: np.ndarray, mat: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    t = _apply_tensor(t, mat, qubits)
    return _apply_tensor(t, mat.conj(), tuple(n + q for q in qubits))


def _dephase(t: np.ndarray, q: int, n: int, keep: int | None = None) -> np.ndarray:
    """Remove coherences on qubit ``q``; with ``keep`` also zero the other diagonal block."""
    out = t.copy()
    idx = [slice(None)] * (2 * n)
    for a in (0, 1):
        for b in (0, 1):
            if a != b or (keep is not None and a != keep):
                idx[q], idx[n + q] = a, b
                out[tuple(idx)] = 0.0
    return out


def _bitflip_mix(t: np.ndarray, q: int, n: int, p: float) -> np.ndarray:
    if p == 0.0:
        return t
    return (1 - p) * t + p * _apply_unitary(t, X, (q,), n)


def _depolarize2(t: np.ndarray, qubits: tuple[int, int], n: int, p: float) -> np.ndarray:
    if p == 0.0:
        return t
    q1, q2 = qubits
    reduced = np.trace(np.trace(t, axis1=q1, axis2=n + q1), axis1=q2 - (q2 > q1), axis2=n + q2 - 1 - (q2 > q1))
    # rebuild I/4 (x) Tr_{q1,q2} rho with the traced axes restored in place
    eye = np.eye(2) / 2
    full = np.multiply.outer(np.multiply.outer(eye, eye), reduced)
    # axes of `full`: (q1 ket, q1 bra, q2 ket, q2 bra, remaining ket..., remaining bra...)
    rest = [q for q in range(n) if q not in qubits]
    order = [q1, n + q1, q2, n + q2] + rest + [n + q for q in rest]
    full = np.moveaxis(full, list(range(2 * n)), order)
    w = 16.0 * p / 15.0
    return (1 - w) * t + w * full


def density_run_with_record(c: Circuit, noise: NoiseModel | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Exact final density matrix and the probability that each clbit reads 1."""
    n = c.n_qubits
    if n > MAX_DENSITY_QUBITS:
        raise DimTooLarge(f"density backend limited to {MAX_DENSITY_QUBITS} qubits")
    p2q = noise.p2q if noise is not None else 0.0
    p_spam = noise.p_spam if noise is not None else 0.0
    gates = c.gates

    last_read: dict[int, int] = {}
    last_touch: dict[int, int] = {}
    for i, g in enumerate(gates):
        if g.kind == "PauliX_conditional":
            last_read[g.clbit] = i
        for q in g.qubits:
            last_touch[q] = i

    one = np.diag([1.0 - p_spam, p_spam]).astype(complex)
    t0 = one
    for _ in range(n - 1):
        t0 = np.multiply.outer(t0, one)
    # t0 axes are (k0, b0, k1, b1, ...); reorder to kets then bras
    t0 = np.transpose(t0, [2 * q for q in range(n)] + [2 * q + 1 for q in range(n)]) if n else t0
    branches: dict[tuple, np.ndarray] = {(): t0}
    clbit_p1 = np.zeros(c.n_clbits)

    for i, g in enumerate(gates):
        kind = g.kind
        if kind in ("Measure", "Reset"):
            q = g.qubits[0]
            new: dict[tuple, np.ndarray] = {}
            for key, t in branches.items():
                t0_, t1_ = _dephase(t, q, n, keep=0), _dephase(t, q, n, keep=1)
                if kind == "Reset":
                    flipped = _apply_unitary(t1_, X, (q,), n)
                    moved = t0_ + flipped  # qubit in |0>
                    _acc(new, key, _bitflip_mix(moved, q, n, p_spam))
                    continue
                pr1 = _trace(t1_, n)
                pr0 = _trace(t0_, n)
                clbit_p1[g.clbit] += (1 - p_spam) * pr1 + p_spam * pr0
                if g.clbit in last_read and last_read[g.clbit] > i:
                    _acc(new, key + ((g.clbit, 0),), (1 - p_spam) * t0_ + p_spam * t1_)
                    _acc(new, key + ((g.clbit, 1),), (1 - p_spam) * t1_ + p_spam * t0_)
                elif last_touch[q] == i:
                    _acc(new, key, _bitflip_mix(t0_ + t1_, q, n, p_spam))
                else:
                    _acc(new, key, t0_ + t1_)
            branches = new
        elif kind == "PauliX_conditional":
            q = g.qubits[0]
            new = {}
            for key, t in branches.items():
                bit = dict(key).get(g.clbit, 0)
                if bit:
                    t = _apply_unitary(t, X, (q,), n)
                if last_read.get(g.clbit) == i:
                    key = tuple(kv for kv in key if kv[0] != g.clbit)
                _acc(new, key, t)
            branches = new
        else:
            mat = gate_matrix(g)
            for key in branches:
                t = _apply_unitary(branches[key], mat, g.qubits, n)
                if kind == "RZZ":
                    t = _depolarize2(t, g.qubits, n, p2q)
                branches[key] = t
    total = sum(branches.values())
    return total.reshape(2**n, 2**n), clbit_p1


def _acc(store: dict, key: tuple, t: np.ndarray) -> None:
    store[key] = store[key] + t if key in store else t


def _trace(t: np.ndarray, n: int) -> float:
    d = 2**n
    return float(np.trace(t.reshape(d, d)).real)


def density_run(c: Circuit, noise: NoiseModel | None = None) -> np.ndarray:
    """Exact density matrix at the end of ``c`` averaged over all measurement records."""
    return density_run_with_record(c, noise)[0]


# --- observables ---------------------------------------------------------------------


def _system_marginal(rho: np.ndarray, n: int, N: int) -> np.ndarray:
    """Probabilities of the last ``N`` qubits in the computational basis."""
    diag = np.real(np.diag(rho)).reshape(2 ** (n - N), 2**N)
    return diag.sum(axis=0)


def _z_values(N: int) -> np.ndarray:
    idx = np.arange(2**N)
    return 1 - 2 * ((idx[:, None] >> (N - 1 - np.arange(N))[None, :]) & 1)


def _basis_energy(cfg: ExperimentConfig, probs: np.ndarray, basis: str) -> float:
    N = cfg.ising.N
    z = _z_values(N)
    if basis == "zz":
        per_state = cfg.ising.J * sum(z[:, i] * z[:, j] for i, j in cfg.ising.bonds) if N > 1 else np.zeros(2**N)
    else:
        per_state = cfg.ising.Bx * z.sum(axis=1)
    return float(np.dot(probs, per_state))


def exact_energy(cfg: ExperimentConfig, m: int, noise: NoiseModel | None = None, G: int = 1) -> float:
    """Infinite-shot energy of the experiment circuits from the density backend."""
    total = 0.0
    for basis in BASES:
        c = fold_gates(build_experiment(m, cfg, basis), G)
        rho = density_run(c, noise)
        total += _basis_energy(cfg, _system_marginal(rho, c.n_qubits, cfg.ising.N), basis)
    return total


def _shot_terms(cfg: ExperimentConfig, bits: np.ndarray, m: int, basis: str) -> np.ndarray:
    N = cfg.ising.N
    z = 1 - 2 * bits[:, m : m + N].astype(np.int64)
    if basis == "zz":
        if N == 1:
            return np.zeros(bits.shape[0])
        return cfg.ising.J * sum(z[:, i] * z[:, j] for i, j in cfg.ising.bonds)
    return cfg.ising.Bx * z.sum(axis=1)


def sample_energy(
    cfg: ExperimentConfig,
    m: int,
    shots_per_basis: int,
    noise: NoiseModel | None = None,
    G: int = 1,
    master_seed: int = 0,
) -> tuple[Estimate, dict[str, ShotRecord]]:
    """Energy estimate together with the raw shot records of each basis."""
    if shots_per_basis < 2:
        raise ValueError("shots_per_basis must be at least 2")
    mean, var = 0.0, 0.0
    records = {}
    for b_idx, basis in enumerate(BASES):
        c = fold_gates(build_experiment(m, cfg, basis), G)
        rec = run_shots(c, noise, master_seed, shots_per_basis, key=(m, G, b_idx))
        terms = _shot_terms(cfg, rec.bits, m, basis)
        mean += float(terms.mean())
        var += float(terms.var(ddof=1)) / shots_per_basis
        records[basis] = rec
    return Estimate(mean=mean, stderr=float(np.sqrt(var)), shots=2 * shots_per_basis), records


def estimate_energy(
    cfg: ExperimentConfig,
    m: int,
    shots_per_basis: int,
    noise: NoiseModel | None = None,
    G: int = 1,
    master_seed: int = 0,
) -> Estimate:
    """Shot estimate of ``J sum <Z Z> + Bx sum <X>`` from the two measurement bases.

    The standard error uses the sample variance of each basis's per-shot energy
    sum, which already includes the covariance between terms read from the
    same shots; the two bases use disjoint shots and add in quadrature.
    """
    return sample_energy(cfg, m, shots_per_basis, noise, G, master_seed)[0]


# --- bit log --------------------------------------------------------------------------


def write_bit_log(path: str | Path, record: ShotRecord) -> None:
    """Binary log: per shot a little-endian uint64 index followed by packed bits."""
    packed = np.packbits(record.bits, axis=1, bitorder="little")
    with open(path, "wb") as fh:
        for idx, row in zip(record.shots, packed):
            fh.write(np.uint64(idx).astype("<u8").tobytes())
            fh.write(row.tobytes())


def read_bit_log(path: str | Path, n_clbits: int) -> ShotRecord:
    width = (n_clbits + 7) // 8
    raw = np.frombuffer(Path(path).read_bytes(), dtype=np.uint8)
    stride = 8 + width
    if raw.size % stride:
        raise ValueError("bit log length is not a whole number of records")
    rows = raw.reshape(-1, stride)
    shots = rows[:, :8].copy().view("<u8").ravel().astype(np.int64)
    bits = np.unpackbits(rows[:, 8:], axis=1, bitorder="little")[:, :n_clbits]
    return ShotRecord(shots=shots, bits=bits.astype(np.uint8))
