"""Zero-noise extrapolation from estimates at odd noise-scaling factors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateData, WrongFoldFactors

LINEAR = "linear"
EXPONENTIAL = "exponential"
BOOTSTRAP_SAMPLES = 1000


@dataclass(frozen=True)
class ZnePoint:
    G: int
    mean: float
    stderr: float

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError(f"stderr must be non-negative, got {self.stderr}")


@dataclass(frozen=True)
class ZneFit:
    """Fitted model ``a_tilde * G + b_tilde`` or ``a_tilde * exp(b_tilde * G)``.

    ``fallback`` is set when an exponential fit was requested but the data
    changed sign, so the linear two-point fit was reported instead.
    """

    kind: str
    a_tilde: float
    b_tilde: float
    extrapolated: float
    uncertainty: float
    fallback: bool = False


def _require(points: tuple[ZnePoint, ...], factors: tuple[int, ...]) -> None:
    got = tuple(p.G for p in points)
    if got != factors:
        raise WrongFoldFactors(f"expected noise factors {factors}, got {got}")


def zne_linear(p1: ZnePoint, p3: ZnePoint) -> ZneFit:
    """Exact line through the G=1 and G=3 points, evaluated at G=0."""
    _require((p1, p3), (1, 3))
    slope = (p3.mean - p1.mean) / 2.0
    intercept = (3.0 * p1.mean - p3.mean) / 2.0
    unc = float(np.hypot(1.5 * p1.stderr, 0.5 * p3.stderr))
    return ZneFit(LINEAR, slope, intercept, intercept, unc)


def _log_fit(G: np.ndarray, y: np.ndarray, sigma: np.ndarray) -> tuple[float, float]:
    """Weighted least squares of ``ln|y|`` on ``G``; returns (intercept, slope)."""
    ln_sigma = sigma / np.abs(y)
    w = 1.0 / ln_sigma**2 if np.all(ln_sigma > 0) else np.ones_like(y)
    design = np.stack([np.ones_like(G), G], axis=1)
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(design * sw[:, None], np.log(np.abs(y)) * sw, rcond=None)
    return float(coef[0]), float(coef[1])


def zne_exponential(
    p1: ZnePoint,
    p3: ZnePoint,
    p5: ZnePoint,
    n_boot: int = BOOTSTRAP_SAMPLES,
    seed: int = 0,
) -> ZneFit:
    """Fit ``y = a exp(b G)`` to the G = 1, 3, 5 points and evaluate at G=0.

    The fit is a weighted straight line through ``(G, ln|y|)`` with log-domain
    errors ``stderr / |y|``. Its uncertainty is the standard deviation of the
    extrapolation over ``n_boot`` Gaussian resamples of the three means.
    Resamples whose signs disagree are refit with the linear model so every
    draw contributes.
    """
    _require((p1, p3, p5), (1, 3, 5))
    pts = (p1, p3, p5)
    G = np.array([1.0, 3.0, 5.0])
    y = np.array([p.mean for p in pts])
    s = np.array([p.stderr for p in pts])
    tiny = 10.0 * np.finfo(float).eps * max(float(np.max(np.abs(y))), 1.0)
    if np.any(np.abs(y) < max(tiny, 10.0 * np.finfo(float).eps)):
        raise DegenerateData("a mean is zero to machine precision; log fit undefined")
    signs = np.sign(y)
    if not np.all(signs == signs[0]):
        lin = zne_linear(p1, p3)
        return ZneFit(LINEAR, lin.a_tilde, lin.b_tilde, lin.extrapolated, lin.uncertainty, fallback=True)
    sign = float(signs[0])
    intercept, slope = _log_fit(G, y, s)
    a_tilde = sign * float(np.exp(intercept))

    rng = np.random.default_rng(seed)
    draws = y[None, :] + s[None, :] * rng.standard_normal((n_boot, 3))
    ext = np.empty(n_boot)
    for i, d in enumerate(draws):
        if np.all(np.sign(d) == sign) and np.all(d != 0):
            c0, _ = _log_fit(G, d, s)
            ext[i] = sign * np.exp(c0)
        else:
            ext[i] = (3.0 * d[0] - d[1]) / 2.0
    unc = float(np.std(ext, ddof=1)) if n_boot > 1 else 0.0
    return ZneFit(EXPONENTIAL, a_tilde, slope, a_tilde, unc)
