"""Hot numeric kernels with optional numba acceleration.

Each kernel has a pure-numpy implementation and an @njit twin. numba is
imported lazily on first kernel use (keeping CLI startup fast) and can be
disabled entirely with ``LATENTPHASE_NUMBA=0``, which selects the numpy
fallback path — the baseline in ``benchmarks/bench_kernels.py``.
"""

import os

import numpy as np


def numba_requested() -> bool:
    env = os.environ.get("LATENTPHASE_NUMBA", "1").strip().lower()
    return env not in ("0", "false", "off", "no")


def _omega_rows_numpy(X):
    l1 = np.abs(X).sum(axis=1)
    l2 = np.sqrt((X * X).sum(axis=1))
    d = X.shape[1]
    out = np.empty(X.shape[0])
    nz = l2 > 0.0
    out[nz] = 1.0 - l1[nz] / (np.sqrt(d) * l2[nz])
    out[~nz] = np.nan
    return out


def _collapse_objective_numpy(x, y, n_bins):
    lo = x.min()
    hi = x.max()
    if hi <= lo:
        return float(np.var(y))
    idx = np.minimum(((x - lo) / (hi - lo) * n_bins).astype(np.int64), n_bins - 1)
    total = 0.0
    used = 0
    for b in range(n_bins):
        yb = y[idx == b]
        if yb.size >= 2:
            total += float(np.var(yb)) * yb.size
            used += yb.size
    if used == 0:
        return float(np.var(y))
    return total / used


def _build_njit_kernels():
    from numba import njit

    @njit(cache=True)
    def omega_rows_njit(X):
        T, d = X.shape
        sqrt_d = np.sqrt(d)
        out = np.empty(T)
        for t in range(T):
            l1 = 0.0
            l2sq = 0.0
            for j in range(d):
                v = X[t, j]
                l1 += abs(v)
                l2sq += v * v
            if l2sq > 0.0:
                out[t] = 1.0 - l1 / (sqrt_d * np.sqrt(l2sq))
            else:
                out[t] = np.nan
        return out

    @njit(cache=True)
    def collapse_objective_njit(x, y, n_bins):
        n = x.shape[0]
        lo = x[0]
        hi = x[0]
        for i in range(n):
            if x[i] < lo:
                lo = x[i]
            if x[i] > hi:
                hi = x[i]
        fallback = hi <= lo
        total = 0.0
        used = 0
        if not fallback:
            counts = np.zeros(n_bins, dtype=np.int64)
            sums = np.zeros(n_bins)
            sqsums = np.zeros(n_bins)
            scale = n_bins / (hi - lo)
            for i in range(n):
                b = int((x[i] - lo) * scale)
                if b >= n_bins:
                    b = n_bins - 1
                counts[b] += 1
                sums[b] += y[i]
                sqsums[b] += y[i] * y[i]
            for b in range(n_bins):
                c = counts[b]
                if c >= 2:
                    mean = sums[b] / c
                    total += sqsums[b] - c * mean * mean
                    used += c
        if fallback or used == 0:
            m = 0.0
            for i in range(n):
                m += y[i]
            m /= n
            v = 0.0
            for i in range(n):
                v += (y[i] - m) ** 2
            return v / n
        return total / used

    return {
        "omega_rows": omega_rows_njit,
        "collapse_objective": collapse_objective_njit,
    }


_NUMPY_KERNELS = {
    "omega_rows": _omega_rows_numpy,
    "collapse_objective": _collapse_objective_numpy,
}
_active = None


def _resolve():
    global _active
    if _active is None:
        if numba_requested():
            try:
                _active = _build_njit_kernels()
            except ImportError:
                _active = _NUMPY_KERNELS
        else:
            _active = _NUMPY_KERNELS
    return _active


def get_impl(name: str, path: str):
    """Fetch a specific implementation ("numpy" or "numba") for benchmarks."""
    if path == "numpy":
        return _NUMPY_KERNELS[name]
    if path == "numba":
        return _build_njit_kernels()[name]
    raise ValueError(f"unknown kernel path {path!r}")


def omega_rows(X):
    return _resolve()["omega_rows"](X)


def collapse_objective(x, y, n_bins):
    return _resolve()["collapse_objective"](x, y, n_bins)
