"""Depth profiles, critical-depth estimation, and finite-size scaling collapse.

A depth profile carries per-layer mean and variance of the order parameter
at normalized depth gamma = l / L. The critical depth is the largest jump
between consecutive layers; the variance (susceptibility) peak is the
alternative estimator.
"""

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import _kernels
from .core import omega_rows
from .errors import FitError, InputError

DEFAULT_TAU_C = 0.75
FSS_BINS = 20


@dataclass(frozen=True)
class ProfilePoint:
    layer: int
    gamma: float
    mean_omega: float
    var_omega: float
    n: int


@dataclass(frozen=True)
class DepthProfile:
    model_id: str
    L: int
    points: tuple  # of ProfilePoint, layers strictly increasing

    def __post_init__(self):
        if self.L < 1:
            raise InputError("total layer count L must be >= 1")
        layers = [p.layer for p in self.points]
        if any(b <= a for a, b in zip(layers, layers[1:])):
            raise InputError("layers must be strictly increasing")
        for p in self.points:
            if not (0 <= p.layer <= self.L):
                raise InputError(f"layer {p.layer} outside [0, {self.L}]")
            if abs(p.gamma - p.layer / self.L) > 1e-12:
                raise InputError(f"gamma must equal layer/L at layer {p.layer}")
            if not (0.0 <= p.mean_omega < 1.0):
                raise InputError(f"mean omega {p.mean_omega} outside [0, 1)")
            if p.var_omega < 0.0:
                raise InputError("variance must be >= 0")

    def means(self) -> np.ndarray:
        return np.array([p.mean_omega for p in self.points])

    def gammas(self) -> np.ndarray:
        return np.array([p.gamma for p in self.points])


def make_profile(model_id, L, rows):
    """Build a DepthProfile from (layer, mean, var, n) tuples."""
    pts = tuple(
        ProfilePoint(layer=int(l), gamma=int(l) / L, mean_omega=float(m),
                     var_omega=float(v), n=int(n))
        for l, m, v, n in sorted(rows)
    )
    return DepthProfile(model_id=model_id, L=L, points=pts)


@dataclass(frozen=True)
class PhaseReport:
    model_id: str
    gamma_c_hat: float
    jump_layer_pair: tuple  # (l, l+1)
    jump_magnitude: float
    susceptibility_peak_gamma: float | None
    exceeds_threshold: bool
    tau_c: float
    onset_layer: int | None


@dataclass(frozen=True)
class FSSFit:
    beta_over_nu: float
    one_over_nu: float
    gamma_c: float
    collapse_residual: float


def build_profile(batches, L: int | None = None, model_id: str | None = None) -> DepthProfile:
    """Per-layer mean/variance of the row-wise order parameter.

    ``batches`` is a sequence of ActivationMatrix with distinct layer
    indices. L defaults to max layer + 1.
    """
    if len(batches) < 2:
        raise InputError("need at least 2 layers to build a profile")
    d = batches[0].d
    for b in batches:
        if b.d != d:
            raise InputError("inconsistent hidden dimension across layers")
    layers = [b.layer for b in batches]
    if len(set(layers)) != len(layers):
        raise InputError("duplicate layer indices")
    if L is None:
        L = max(layers) + 1
    rows = []
    for b in sorted(batches, key=lambda b: b.layer):
        w = omega_rows(b.data)
        rows.append((b.layer, float(w.mean()), float(w.var()), w.size))
    return make_profile(model_id or batches[0].model_id, L, rows)


def classify_phase(p: DepthProfile, tau_c: float = DEFAULT_TAU_C):
    """(exceeds, onset_layer): does any layer's mean exceed tau_c, and where first."""
    if not (0.0 < tau_c < 1.0):
        raise InputError("tau_c must be in (0, 1)")
    for pt in p.points:
        if pt.mean_omega > tau_c:
            return True, pt.layer
    return False, None


def susceptibility_peak(p: DepthProfile):
    """gamma of the variance peak; None when all variances vanish."""
    best = None
    for pt in p.points:
        if pt.var_omega > 0.0 and (best is None or pt.var_omega > best.var_omega):
            best = pt
    return None if best is None else best.gamma


def critical_depth(p: DepthProfile, tau_c: float = DEFAULT_TAU_C) -> PhaseReport:
    """Largest consecutive-layer jump of the mean profile.

    The reported critical depth is (l+1)/L, the first post-jump layer;
    ties break toward the smallest layer index.
    """
    pairs = [
        (a, b)
        for a, b in zip(p.points, p.points[1:])
        if b.layer == a.layer + 1
    ]
    if not pairs:
        raise InputError("need at least one pair of consecutive layers")
    best = max(pairs, key=lambda ab: (abs(ab[1].mean_omega - ab[0].mean_omega), -ab[0].layer))
    jump = abs(best[1].mean_omega - best[0].mean_omega)
    exceeds, onset = classify_phase(p, tau_c)
    return PhaseReport(
        model_id=p.model_id,
        gamma_c_hat=(best[0].layer + 1) / p.L,
        jump_layer_pair=(best[0].layer, best[1].layer),
        jump_magnitude=jump,
        susceptibility_peak_gamma=susceptibility_peak(p),
        exceeds_threshold=exceeds,
        tau_c=tau_c,
        onset_layer=onset,
    )


def collapse_residual(curves, beta_over_nu, one_over_nu, gamma_c, n_bins=FSS_BINS):
    """Dispersion of the scaled curves: mean within-bin variance of
    y = m * N^(beta/nu) over bins of x = (gamma - gamma_c) * N^(1/nu),
    normalized by the total variance of y (scale invariance)."""
    xs, ys = [], []
    try:
        for N, prof in curves:
            g = prof.gammas()
            m = prof.means()
            xs.append((g - gamma_c) * N**one_over_nu)
            ys.append(m * N**beta_over_nu)
    except OverflowError:  # Python-float powers raise instead of yielding inf
        return float("inf")
    x = np.ascontiguousarray(np.concatenate(xs))
    y = np.ascontiguousarray(np.concatenate(ys))
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        return float("inf")
    with np.errstate(over="raise"):
        try:
            total = float(np.var(y))
            within = float(_kernels.collapse_objective(x, y, n_bins))
        except FloatingPointError:
            return float("inf")
    if not np.isfinite(total) or not np.isfinite(within):
        return float("inf")
    if total <= 0.0:
        return 0.0
    return within / total


def fss_collapse(curves, n_bins: int = FSS_BINS, max_fev: int = 4000) -> FSSFit:
    """Fit (beta/nu, 1/nu, gamma_c) by minimizing the collapse dispersion.

    Derivative-free Nelder-Mead from a grid of starts; the best (lowest
    residual, then lexicographic parameters) wins deterministically.
    """
    curves = list(curves)
    if len(curves) < 3:
        raise InputError("need at least 3 scales for a collapse fit")
    for N, prof in curves:
        if N <= 0:
            raise InputError("scale N must be positive")
        if len(prof.points) < 5:
            raise InputError("each curve needs at least 5 points")

    gam = np.concatenate([prof.gammas() for _, prof in curves])
    g_lo, g_hi = float(gam.min()), float(gam.max())
    g_span = max(g_hi - g_lo, 1e-12)

    # gamma_c is searched in units of the observed gamma window so the
    # simplex steps are O(1) in every coordinate; exponents are confined to
    # an O(1) box, which walls off a degenerate large-exponent regime where
    # all but the largest scale squash onto y = 0
    def objective(params):
        b, s, t = params
        if not np.all(np.isfinite(params)):
            return 1e6
        if not (0.0 <= b <= 3.0 and 0.0 < s <= 3.0 and -1.0 <= t <= 2.0):
            return 1e6
        gc = g_lo + t * g_span
        r = collapse_residual(curves, b, s, gc, n_bins)
        return r if np.isfinite(r) else 1e6

    starts = [
        (b0, s0, t0)
        for b0 in (0.0, 0.1, 0.3)
        for s0 in (0.25, 0.5, 1.0)
        for t0 in np.linspace(0.1, 0.9, 5)
    ]
    best = None
    any_converged = False
    for x0 in starts:
        res = optimize.minimize(
            objective,
            x0=np.array(x0),
            method="Nelder-Mead",
            options={"maxfev": max_fev, "xatol": 1e-9, "fatol": 1e-12},
        )
        any_converged = any_converged or bool(res.success)
        key = (res.fun, tuple(res.x))
        if best is None or key < best[0]:
            best = (key, res)
    fit = FSSFit(
        beta_over_nu=float(best[1].x[0]),
        one_over_nu=float(best[1].x[1]),
        gamma_c=g_lo + float(best[1].x[2]) * g_span,
        collapse_residual=float(best[1].fun),
    )
    if not any_converged:
        raise FitError("collapse search exhausted max evaluations", fit)
    return fit
