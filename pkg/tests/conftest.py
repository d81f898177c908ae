import numpy as np

from latentphase import phase


def synthetic_collapse_curves(beta_over_nu, one_over_nu, gamma_c,
                              scales, npts, noise, seed):
    """Depth profiles exactly obeying the scaling ansatz.

    The noise is applied to the scaling function before the N^(-beta/nu)
    envelope so every scale carries the same relative perturbation.
    """
    rng = np.random.default_rng(seed)
    L = 10_000_000
    curves = []
    for N, width in scales:
        g = np.linspace(gamma_c - width, gamma_c + width, npts)
        layers = np.unique(np.round(g * L).astype(int))
        g = layers / L
        x = (g - gamma_c) * N**one_over_nu
        f = 0.5 * (1.0 + np.tanh(x)) + noise * rng.standard_normal(x.size)
        m = np.clip(f * N**(-beta_over_nu), 0.0, 0.999)
        rows = [(int(l), float(v), 0.0, 1) for l, v in zip(layers, m)]
        curves.append((float(N), phase.make_profile(f"synthetic-{N:g}", L, rows)))
    return curves
