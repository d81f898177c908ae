"""Marchenko-Pastur null model: density, CDF, bulk fitting, spike detection.

The null is the white law with noise level sigma^2 and aspect ratio
c = d/T, with bulk edges sigma^2 (1 +- sqrt(c))^2. For c > 1 the atom of
mass 1 - 1/c at zero is tracked separately from the continuous density.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .core import Spectrum
from .errors import DomainError, FitError, InputError

DEFAULT_SPIKE_MARGIN = 0.05


@dataclass(frozen=True)
class MPModel:
    sigma2: float
    c: float
    lambda_minus: float = field(init=False)
    lambda_plus: float = field(init=False)

    def __post_init__(self):
        if not (self.sigma2 > 0 and np.isfinite(self.sigma2)):
            raise InputError("sigma2 must be positive and finite")
        if not (self.c > 0 and np.isfinite(self.c)):
            raise InputError("aspect ratio c must be positive and finite")
        sq = np.sqrt(self.c)
        object.__setattr__(self, "lambda_minus", self.sigma2 * (1.0 - sq) ** 2)
        object.__setattr__(self, "lambda_plus", self.sigma2 * (1.0 + sq) ** 2)

    @property
    def mass_at_zero(self) -> float:
        """Point mass at 0 when d > T (c > 1); the density covers the rest."""
        return max(0.0, 1.0 - 1.0 / self.c)


def mp_density(lam, m: MPModel):
    """Continuous part of the null density; 0 outside the bulk support."""
    arr = np.asarray(lam, dtype=float)
    if np.any(arr < 0):
        raise InputError("eigenvalue argument must be nonnegative")
    out = np.zeros_like(arr)
    inside = (arr > m.lambda_minus) & (arr < m.lambda_plus) & (arr > 0)
    x = arr[inside]
    out[inside] = (
        np.sqrt((m.lambda_plus - x) * (x - m.lambda_minus))
        / (2.0 * np.pi * m.sigma2 * m.c * x)
    )
    if np.isscalar(lam) or arr.ndim == 0:
        return float(out)
    return out


def mp_cdf(lam, m: MPModel):
    """Distribution function of the null (atom at zero included), P[X <= lam]."""

    def one(x: float) -> float:
        if x < 0:
            raise InputError("eigenvalue argument must be nonnegative")
        if x >= m.lambda_plus:
            return 1.0
        total = m.mass_at_zero
        if x <= m.lambda_minus:
            return total
        val, _ = integrate.quad(
            lambda t: mp_density(t, m),
            m.lambda_minus,
            x,
            epsabs=1e-10,
            limit=200,
        )
        return min(total + val, 1.0)

    if np.isscalar(lam) or np.asarray(lam).ndim == 0:
        return one(float(lam))
    return np.array([one(float(x)) for x in np.asarray(lam, dtype=float)])


def mp_quantile(p: float, m: MPModel) -> float:
    """Inverse of mp_cdf on the bulk (p must exceed the zero-atom mass)."""
    if not 0.0 <= p <= 1.0:
        raise InputError("quantile level must be in [0, 1]")
    if p <= m.mass_at_zero:
        return 0.0
    if p >= 1.0:
        return m.lambda_plus
    lo = max(m.lambda_minus, 0.0)
    return float(
        optimize.brentq(lambda x: mp_cdf(x, m) - p, lo, m.lambda_plus, xtol=1e-12)
    )


def mp_quantiles(ps, m: MPModel) -> np.ndarray:
    """Vectorized bulk quantiles via cumulative quadrature on a dense grid.

    The substitution lambda = lambda_- + (lambda_+ - lambda_-) sin^2(t)
    absorbs the square-root edge singularities. Accuracy ~1e-6, adequate
    for generating synthetic null spectra; use mp_quantile for root-found
    single values."""
    ps = np.asarray(ps, dtype=float)
    if np.any((ps < 0) | (ps > 1)):
        raise InputError("quantile levels must be in [0, 1]")
    t = np.linspace(0.0, np.pi / 2, 4001)
    lam = m.lambda_minus + (m.lambda_plus - m.lambda_minus) * np.sin(t) ** 2
    dens = mp_density(np.maximum(lam, 0.0), m)
    dlam = (m.lambda_plus - m.lambda_minus) * np.sin(2 * t)
    cdf = integrate.cumulative_trapezoid(dens * dlam, t, initial=0.0)
    cdf /= cdf[-1]  # renormalize quadrature drift over the bulk mass
    cdf = m.mass_at_zero + (1.0 - m.mass_at_zero) * cdf
    out = np.interp(ps, cdf, lam)
    out[ps <= m.mass_at_zero] = 0.0
    return out


def _bulk_median_unit(c: float) -> float:
    """Median of the bulk (continuous part) of the unit-variance null."""
    m = MPModel(sigma2=1.0, c=c)
    target = m.mass_at_zero + 0.5 * (1.0 - m.mass_at_zero)
    return mp_quantile(target, m)


def _tukey_bulk(values: np.ndarray) -> np.ndarray:
    """Candidate bulk: eigenvalues below the Q3 + 1.5 IQR fence."""
    q1, q3 = np.percentile(values, [25, 75])
    fence = q3 + 1.5 * (q3 - q1)
    return values[values <= fence]


def fit_sigma2(s: Spectrum, c: float) -> MPModel:
    """Fit the noise level by matching bulk medians (robust to spikes).

    Eigenvalues above a Tukey 1.5 IQR fence are excluded before matching
    the empirical bulk median to the null's bulk median.
    """
    if c <= 0:
        raise InputError("aspect ratio c must be positive")
    vals = s.eigenvalues
    if c > 1:  # exclude the structural zeros; they belong to the atom
        vals = vals[vals > 0]
    bulk = _tukey_bulk(vals)
    if bulk.size < 10:
        raise FitError(f"only {bulk.size} bulk eigenvalues; need >= 10 for a fit")
    emp_median = float(np.median(bulk))
    if emp_median <= 0:
        raise FitError("bulk median nonpositive; cannot fit a noise level")
    sigma2_hat = emp_median / _bulk_median_unit(c)
    return MPModel(sigma2=sigma2_hat, c=c)


@dataclass(frozen=True)
class SpikeSet:
    """Eigenvalues separated above the bulk edge, with their positions."""

    outliers: tuple  # of (eigenvalue, index), descending
    margin: float

    @property
    def count(self) -> int:
        return len(self.outliers)


def detect_spikes(s: Spectrum, m: MPModel, margin: float = DEFAULT_SPIKE_MARGIN) -> SpikeSet:
    """Eigenvalues above lambda_plus * (1 + margin), descending."""
    if margin < 0:
        raise InputError("margin must be >= 0")
    fence = m.lambda_plus * (1.0 + margin)
    out = [
        (float(v), int(i))
        for i, v in enumerate(s.eigenvalues)
        if v > fence
    ]
    return SpikeSet(outliers=tuple(out), margin=margin)


def bbp_predict(m: MPModel, theta: float):
    """Detectability and asymptotic location of a planted spike.

    A rank-one perturbation of strength theta separates from the bulk iff
    theta > sigma^2 sqrt(c); the outlier then sits at
    (sigma^2 + theta)(1 + c sigma^2 / theta), above lambda_plus.
    """
    if theta <= 0:
        raise InputError("spike strength theta must be positive")
    threshold = m.sigma2 * np.sqrt(m.c)
    if theta <= threshold:
        return False, None
    loc = (m.sigma2 + theta) * (1.0 + m.c * m.sigma2 / theta)
    return True, float(loc)


def ks_statistic(s: Spectrum, m: MPModel, margin: float = DEFAULT_SPIKE_MARGIN) -> float:
    """Sup distance between the bulk empirical CDF and the null CDF.

    Spikes (detect_spikes with the given margin) are removed first; an
    all-spike spectrum is a degenerate fit.
    """
    spikes = detect_spikes(s, m, margin)
    spiked_idx = {i for _, i in spikes.outliers}
    bulk = np.array(
        [v for i, v in enumerate(s.eigenvalues) if i not in spiked_idx], dtype=float
    )
    if bulk.size == 0:
        raise FitError("no bulk eigenvalues left after spike removal")
    bulk = np.sort(bulk)
    n = bulk.size
    F = mp_cdf(bulk, m)
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    return float(np.max(np.maximum(np.abs(upper - F), np.abs(lower - F))))
