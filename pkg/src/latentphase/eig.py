"""Sample covariance, dense symmetric eigendecomposition, spectral histograms.

The Gram shortcut computes the nonzero covariance eigenvalues from the
T x T Gram matrix of centered rows, which is much cheaper than the d x d
path when batches are sample-starved (T < d).
"""

from dataclasses import dataclass, field

import numpy as np

from .core import Spectrum, _eig_zero_tol
from .errors import InputError

MAX_DIM = 8192  # documented contract: no dense eigensolves beyond this


@dataclass(frozen=True)
class ActivationMatrix:
    """T x d batch of latent states (rows = samples/tokens)."""

    data: np.ndarray
    layer: int = 0
    model_id: str = ""

    def __post_init__(self):
        M = np.asarray(self.data, dtype=float)
        if M.ndim != 2:
            raise InputError("activation data must be a 2-D matrix")
        if M.shape[0] < 2:
            raise InputError("need at least 2 rows for sample covariance")
        if not np.all(np.isfinite(M)):
            raise InputError("activation data contains non-finite entries")
        if self.layer < 0:
            raise InputError("layer index must be >= 0")
        object.__setattr__(self, "data", M)

    @property
    def T(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class CovarianceMatrix:
    """d x d symmetric PSD matrix with the sample count that produced it."""

    entries: np.ndarray
    sample_count: int = 0

    def __post_init__(self):
        C = np.asarray(self.entries, dtype=float)
        if C.ndim != 2 or C.shape[0] != C.shape[1]:
            raise InputError("covariance must be square")
        scale = max(float(np.abs(C).max(initial=0.0)), 1.0)
        if float(np.abs(C - C.T).max(initial=0.0)) > 1e-10 * scale:
            raise InputError("covariance asymmetric beyond tolerance")
        object.__setattr__(self, "entries", 0.5 * (C + C.T))

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.entries))


@dataclass(frozen=True)
class ESDHistogram:
    """Normalized eigenvalue histogram: density integrates to 1."""

    bin_edges: np.ndarray
    densities: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        dens = np.asarray(self.densities, dtype=float)
        if edges.ndim != 1 or dens.ndim != 1 or edges.size != dens.size + 1:
            raise InputError("need len(bin_edges) == len(densities) + 1")
        if np.any(np.diff(edges) <= 0):
            raise InputError("bin edges must be strictly ascending")
        mass = float((dens * np.diff(edges)).sum())
        if abs(mass - 1.0) > 1e-9:
            raise InputError(f"histogram mass {mass:.12g} != 1")
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "densities", dens)


def estimate_covariance(X: ActivationMatrix) -> CovarianceMatrix:
    """Unbiased sample covariance with the 1/(T-1) normalizer.

    Rows are centered by the batch mean.
    """
    M = X.data
    centered = M - M.mean(axis=0)
    C = centered.T @ centered / (X.T - 1)
    return CovarianceMatrix(entries=C, sample_count=X.T)


def eigendecompose(C: CovarianceMatrix, return_vectors: bool = False):
    """Full descending spectrum of a symmetric PSD matrix (LAPACK eigh).

    Eigenvalues below ``-1e-12 * max(lambda_1, 1)`` mean the input is not
    PSD and are rejected.
    """
    if C.d > MAX_DIM:
        raise InputError(f"dimension {C.d} exceeds supported maximum {MAX_DIM}")
    if return_vectors:
        vals, vecs = np.linalg.eigh(C.entries)
        order = np.argsort(vals)[::-1]
        spec = Spectrum(vals)  # raises on genuinely negative eigenvalues
        return spec, vecs[:, order]
    vals = np.linalg.eigvalsh(C.entries)
    return Spectrum(vals)


def gram_spectrum(X: ActivationMatrix) -> Spectrum:
    """Covariance spectrum via the T x T Gram of centered rows.

    Matches eigendecompose(estimate_covariance(X)) on the nonzero part and
    zero-pads to length d; costs O(T^2 d + T^3) instead of O(d^3).
    """
    M = X.data
    centered = M - M.mean(axis=0)
    G = centered @ centered.T / (X.T - 1)
    vals = np.linalg.eigvalsh(G)
    tol = _eig_zero_tol(float(vals.max(initial=0.0)))
    vals = np.where(vals < tol, 0.0, vals)
    padded = np.zeros(X.d)
    take = min(X.T, X.d)
    padded[:take] = np.sort(vals)[::-1][:take]
    return Spectrum(padded)


def freedman_diaconis_bins(values: np.ndarray) -> int:
    """Freedman-Diaconis bin count, clamped to [1, 1000]."""
    v = np.asarray(values, dtype=float)
    q1, q3 = np.percentile(v, [25, 75])
    iqr = q3 - q1
    span = float(v.max() - v.min())
    if iqr <= 0 or span <= 0:
        return 1
    width = 2.0 * iqr / v.size ** (1.0 / 3.0)
    return int(np.clip(np.ceil(span / width), 1, 1000))


def esd(s: Spectrum, bins: int | None = None) -> ESDHistogram:
    """Empirical spectral density as a unit-mass histogram.

    ``bins=None`` selects a Freedman-Diaconis bin count.
    """
    vals = s.eigenvalues
    if bins is None:
        bins = freedman_diaconis_bins(vals)
    if bins < 1:
        raise InputError("bins must be >= 1")
    lo = float(vals.min())
    hi = float(vals.max())
    if hi <= lo:  # degenerate spectrum: one bin of unit mass around the value
        lo, hi = lo - 0.5, hi + 0.5
    dens, edges = np.histogram(vals, bins=bins, range=(lo, hi), density=True)
    return ESDHistogram(bin_edges=edges, densities=dens)
