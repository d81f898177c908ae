"""Spectral and order-parameter diagnostics for depth phase transitions in
latent activation data, with random-matrix null models and synthetic
verifiers for the underlying structural results."""

from .core import Spectrum, effective_rank, omega, omega_rows, pr_dimension, spectral_entropy
from .eig import (
    ActivationMatrix,
    CovarianceMatrix,
    ESDHistogram,
    eigendecompose,
    esd,
    estimate_covariance,
    gram_spectrum,
)
from .errors import (
    DomainError,
    FitError,
    FormatError,
    InputError,
    LatentPhaseError,
    NumericalError,
)
from .phase import (
    DepthProfile,
    FSSFit,
    PhaseReport,
    build_profile,
    classify_phase,
    critical_depth,
    fss_collapse,
    susceptibility_peak,
)
from .rmt import (
    MPModel,
    SpikeSet,
    bbp_predict,
    detect_spikes,
    fit_sigma2,
    ks_statistic,
    mp_cdf,
    mp_density,
    mp_quantile,
)

__version__ = "0.1.0"
