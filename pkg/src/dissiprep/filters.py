"""Energy-window filter in frequency and time, its sampling grid and error bounds.

The frequency-domain window is a difference of two Fermi functions,

    f~(w) = n_F(beta (w - b)) - n_F(beta (w - a)),    a < b < 0,

and its time-domain transform ``f(s) = (1/2 pi) int f~(w) exp(-i w s) dw`` has
the closed form

    f(s) = exp(-i (a + b) s / 2) * sin((b - a) s / 2) / (beta * sinh(pi s / beta)).

Sampling ``f`` on ``s_l = l * delta_s`` for ``|l| <= M_s`` replaces ``f~`` by a
periodic, truncated approximation; ``aliasing_bound`` and ``leakage_bound``
bound the two resulting errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGap, WindowInverted
from .model import SpectrumSummary

FERMI_DIRAC = "fermi_dirac"
RECTANGULAR = "rectangular"


@dataclass(frozen=True)
class FilterParams:
    a: float
    b: float
    beta: float
    mode: str = FERMI_DIRAC

    def __post_init__(self):
        if self.mode not in (FERMI_DIRAC, RECTANGULAR):
            raise ValueError(f"unknown filter mode {self.mode!r}")
        if not self.a < self.b:
            raise WindowInverted(f"need a < b, got a={self.a}, b={self.b}")
        if not self.b < 0:
            raise WindowInverted(f"window must lie at negative frequency, got b={self.b}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    @property
    def width(self) -> float:
        return self.b - self.a

    @property
    def center(self) -> float:
        return 0.5 * (self.a + self.b)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``s_l = l * Delta_s`` for ``l = -M_s..M_s``; ``S_s = M_s * Delta_s``."""

    M_s: int
    Delta_s: float

    def __post_init__(self):
        if int(self.M_s) != self.M_s or self.M_s < 0:
            raise ValueError(f"M_s must be a non-negative integer, got {self.M_s}")
        if not self.Delta_s > 0:
            raise ValueError(f"Delta_s must be positive, got {self.Delta_s}")

    @classmethod
    def from_range(cls, S_s: float, M_s: int) -> "TimeGrid":
        return cls(M_s=M_s, Delta_s=S_s / M_s)

    @property
    def S_s(self) -> float:
        return self.M_s * self.Delta_s

    @property
    def points(self) -> np.ndarray:
        return np.arange(-self.M_s, self.M_s + 1) * self.Delta_s

    @property
    def omega_alias(self) -> float:
        return 2 * np.pi / self.Delta_s


@dataclass(frozen=True)
class FilterSamples:
    s: np.ndarray = field(repr=False)
    f: np.ndarray = field(repr=False)
    abs_f: np.ndarray = field(repr=False)
    phase: np.ndarray = field(repr=False)

    @property
    def M_s(self) -> int:
        return (self.s.size - 1) // 2


def _fermi_window(omega: np.ndarray, p: FilterParams) -> np.ndarray:
    # n_F(x) - n_F(y) = sinh(d) / (cosh(c) + cosh(d)) with d = beta (b - a) / 2 and
    # c = beta (w - (a + b) / 2); scaled by exp(-max(|c|, d)) to avoid overflow.
    d = 0.5 * p.beta * (p.b - p.a)
    c = np.abs(p.beta * (omega - p.center))
    m = np.maximum(c, d)
    num = np.exp(d - m) - np.exp(-d - m)
    den = np.exp(c - m) + np.exp(-c - m) + np.exp(d - m) + np.exp(-d - m)
    return num / den


def filter_freq(omega, p: FilterParams):
    """Frequency-domain window ``f~(omega)``; scalar in, scalar out."""
    w = np.asarray(omega, dtype=float)
    if p.mode == RECTANGULAR:
        out = ((w >= p.a) & (w <= p.b)).astype(float)
    else:
        out = _fermi_window(w, p)
    return float(out) if out.ndim == 0 else out


def _x_over_sinh(x: np.ndarray) -> np.ndarray:
    ax = np.abs(x)
    small = ax < 1e-6
    big = ~small
    out = np.empty_like(ax)
    out[small] = 1.0 - ax[small] ** 2 / 6.0
    out[big] = 2.0 * ax[big] * np.exp(-ax[big]) / -np.expm1(-2.0 * ax[big])
    return out


def _sin_ratio(y: np.ndarray) -> np.ndarray:
    """``sin(pi y) / (pi y)`` with exact zeros at nonzero integers."""
    n = np.rint(y)
    r = y - n
    parity = 1.0 - 2.0 * np.mod(n, 2.0)
    out = np.empty_like(y)
    zero = y == 0.0
    out[zero] = 1.0
    nz = ~zero
    out[nz] = parity[nz] * np.sin(np.pi * r[nz]) / (np.pi * y[nz])
    return out


def filter_time(s, p: FilterParams):
    """Time-domain filter ``f(s)``; continuous through ``s = 0`` where it equals (b-a)/2pi."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    width = p.b - p.a
    envelope = width / (2 * np.pi) * _sin_ratio(width * s_arr / (2 * np.pi))
    if p.mode == FERMI_DIRAC:
        envelope = envelope * _x_over_sinh(np.pi * s_arr / p.beta)
    out = np.exp(-1j * p.center * s_arr) * envelope
    if np.ndim(s) == 0:
        return complex(out[0])
    return out


def default_params(spec: SpectrumSummary, mode: str = FERMI_DIRAC) -> FilterParams:
    """Window from the spectrum: ``beta = 8/gap``, ``b = -gap/4``, ``a = -2|E0|``."""
    gap = spec.gap
    if not gap > 0:
        raise DegenerateGap(f"excitation gap must be positive, got {gap}")
    beta = 8.0 / gap
    b = -2.0 / beta
    a = -2.0 * abs(spec.E0)
    if not a < b:
        raise WindowInverted(f"a = {a} is not below b = {b}")
    return FilterParams(a=a, b=b, beta=beta, mode=mode)


def default_grid(p: FilterParams, M_s: int = 4) -> TimeGrid:
    """``S_s = 4 pi / (b - a)`` split into ``M_s`` steps."""
    if not p.b > p.a:
        raise WindowInverted("b must exceed a")
    return TimeGrid.from_range(4 * np.pi / (p.b - p.a), M_s)


def sample_filter(p: FilterParams, g: TimeGrid) -> FilterSamples:
    s = g.points
    f = filter_time(s, p)
    # enforce exact conjugate symmetry f(-s) = conj(f(s))
    f = 0.5 * (f + np.conj(f[::-1]))
    abs_f = np.abs(f)
    phase = np.where(abs_f > 1e-300, np.angle(f), 0.0)
    return FilterSamples(s=s, f=f, abs_f=abs_f, phase=phase)


def dft_filter(samples: FilterSamples, g: TimeGrid, omega):
    """``sum_l Delta_s f(s_l) exp(i omega s_l)``; real for conjugate-symmetric samples."""
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    phases = np.exp(1j * np.outer(w, samples.s))
    out = g.Delta_s * (phases @ samples.f)
    if np.ndim(omega) == 0:
        return complex(out[0])
    return out


def aliasing_bound(p: FilterParams, g: TimeGrid, normH: float, normA: float, N: int) -> float:
    """Upper bound on the time-discretisation (aliasing) error of the jump operator."""
    beta, dls = p.beta, g.Delta_s
    prefactor = normA * (np.exp(-beta * p.a) - np.exp(-beta * p.b))
    denom = -np.expm1(-2 * np.pi * beta / dls)
    return float(prefactor / denom * 4.0**N * np.exp(-2 * beta * (np.pi / dls - normH)))


def leakage_bound(p: FilterParams, g: TimeGrid) -> float:
    """Upper bound on the truncation (leakage) error from cutting the grid at ``|s| = S_s``."""
    beta, S, dls = p.beta, g.S_s, g.Delta_s
    denom = beta * -np.expm1(-2 * np.pi * S / beta) * -np.expm1(-np.pi * dls / beta)
    return float(4.0 / denom * np.exp(-np.pi * S / beta))
