"""Experiment configuration and its resolution into concrete filter data."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .filters import (
    FilterParams,
    FilterSamples,
    TimeGrid,
    default_grid,
    default_params,
    sample_filter,
)
from .model import IsingParams, SpectrumSummary, tfim_summary
from .noise import NoiseModel

BACKENDS = ("channel_exact", "circuit_noiseless", "circuit_noisy")
ENDPOINTS = ("keep", "drop", "drop_in", "drop_out")
JUMPS = ("oft", "spectral")
AUTO = "auto"


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to build and run one dissipative preparation study.

    ``dt`` is the Trotter step of the coherent evolution and ``n_t`` the
    number of such steps per dissipative step, split evenly before and after
    the dissipative block. ``filter`` and ``grid`` accept ``"auto"`` to derive
    them from the Hamiltonian spectrum.
    """

    ising: IsingParams
    tau: float = 4.0
    dt: float = 0.25
    n_t: int = 4
    filter: FilterParams | str = AUTO
    grid: TimeGrid | str = AUTO
    shots: int = 200
    noise: NoiseModel | None = None
    seed: int = 0
    backend: str = "channel_exact"
    jump: str = "oft"
    endpoint: str = "drop"
    trotter_substeps: int = 1
    w_reps: int = 1
    merge_center: bool = True
    shots_per_basis: int | None = None

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.dt >= 0:
            raise ValueError(f"dt must be non-negative, got {self.dt}")
        if int(self.n_t) != self.n_t or self.n_t < 0 or self.n_t % 2:
            raise ValueError(f"n_t must be a non-negative even integer, got {self.n_t}")
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.endpoint not in ENDPOINTS:
            raise ValueError(f"endpoint must be one of {ENDPOINTS}, got {self.endpoint!r}")
        if self.jump not in JUMPS:
            raise ValueError(f"jump must be one of {JUMPS}, got {self.jump!r}")
        if self.trotter_substeps < 1 or self.w_reps < 1:
            raise ValueError("trotter_substeps and w_reps must be at least 1")
        if self.shots < 2:
            raise ValueError(f"shots must be at least 2, got {self.shots}")
        if isinstance(self.filter, str) and self.filter != AUTO:
            raise ValueError(f"filter must be '{AUTO}' or FilterParams")
        if isinstance(self.grid, str) and self.grid != AUTO:
            raise ValueError(f"grid must be '{AUTO}' or TimeGrid")

    @property
    def t_half(self) -> float:
        return 0.5 * self.n_t * self.dt

    @property
    def per_basis_shots(self) -> int:
        return self.shots_per_basis if self.shots_per_basis is not None else self.shots // 2


@dataclass(frozen=True)
class ResolvedFilter:
    spectrum: SpectrumSummary
    params: FilterParams
    grid: TimeGrid
    samples: FilterSamples


@lru_cache(maxsize=64)
def _spectrum(p: IsingParams) -> SpectrumSummary:
    return tfim_summary(p)


def resolve_filter(cfg: ExperimentConfig) -> ResolvedFilter:
    """Fill in ``"auto"`` filter and grid from the Hamiltonian spectrum."""
    return _resolve(cfg.ising, cfg.filter, cfg.grid)


@lru_cache(maxsize=64)
def _resolve(ising: IsingParams, filt, grid) -> ResolvedFilter:
    spec = _spectrum(ising)
    params = default_params(spec) if filt == AUTO else filt
    g = default_grid(params) if grid == AUTO else grid
    return ResolvedFilter(spec, params, g, sample_filter(params, g))
