"""Scalar observables on latent vectors and eigenvalue spectra.

Implements the sparsity-like order parameter on single vectors plus the
three dimension proxies on covariance spectra (spectral entropy, effective
rank, participation-ratio dimension).
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DomainError, InputError


def _eig_zero_tol(lam_max: float) -> float:
    # eigensolvers return tiny negatives for PSD input; clamp below this
    return 1e-12 * max(lam_max, 1.0)


@dataclass(frozen=True)
class Spectrum:
    """Descending nonnegative eigenvalue sequence with its trace cached.

    Eigenvalues within round-off of zero (below ``1e-12 * max(lambda_1, 1)``)
    are clamped to 0 at construction.
    """

    eigenvalues: np.ndarray
    trace: float = field(init=False)

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise InputError("spectrum must be a nonempty 1-D sequence")
        if not np.all(np.isfinite(vals)):
            raise InputError("spectrum contains non-finite eigenvalues")
        vals = np.sort(vals)[::-1].copy()
        tol = _eig_zero_tol(vals[0] if vals.size else 0.0)
        if np.any(vals < -tol):
            raise InputError(
                f"eigenvalue {vals.min():g} below -{tol:g}; spectrum must be nonnegative"
            )
        vals[vals < tol] = 0.0
        vals.setflags(write=False)
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "trace", float(vals.sum()))

    def __len__(self):
        return self.eigenvalues.size

    @property
    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.eigenvalues))


def omega(h) -> float:
    """Order parameter 1 - ||h||_1 / (sqrt(d) ||h||_2).

    0 for vectors of equal magnitude entries, maximal (1 - 1/sqrt(d)) for
    1-sparse vectors. Undefined (DomainError) at the origin.
    """
    v = np.asarray(h, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise InputError("expected a nonempty 1-D vector")
    if not np.all(np.isfinite(v)):
        raise InputError("vector contains NaN/Inf entries")
    l2 = float(np.linalg.norm(v))
    if l2 == 0.0:
        raise DomainError("order parameter undefined at origin")
    l1 = float(np.abs(v).sum())
    return 1.0 - l1 / (np.sqrt(v.size) * l2)


def omega_rows(X) -> np.ndarray:
    """Row-wise order parameter of a T x d matrix.

    Zero rows raise DomainError. Uses the numba kernel when enabled.
    """
    M = np.ascontiguousarray(X, dtype=float)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise InputError("expected a T x d matrix")
    if not np.all(np.isfinite(M)):
        raise InputError("matrix contains NaN/Inf entries")
    out = _kernels.omega_rows(M)
    if np.any(np.isnan(out)):
        raise DomainError("order parameter undefined at origin (zero row present)")
    return out


def spectral_entropy(s: Spectrum) -> float:
    """Shannon entropy of the trace-normalized eigenvalues (0 log 0 := 0)."""
    if s.trace <= 0.0:
        raise DomainError("spectral entropy undefined for zero trace")
    lam = s.eigenvalues[s.eigenvalues > 0.0] / s.trace
    return float(-(lam * np.log(lam)).sum())


def effective_rank(s: Spectrum) -> float:
    """exp of the spectral entropy; a smooth dimension proxy in [1, d]."""
    return float(np.exp(spectral_entropy(s)))


def pr_dimension(s: Spectrum) -> float:
    """Participation-ratio dimension (sum lambda)^2 / sum lambda^2."""
    if s.trace <= 0.0:
        raise DomainError("PR dimension undefined for zero trace")
    lam = s.eigenvalues
    return float(s.trace**2 / (lam @ lam))
