"""Acceptance gate: one test per release criterion.

Each test prints a single PASS/FAIL line on the terminal (bypassing
capture) so the run log shows the full scorecard.
"""

import subprocess
import sys
import time

import numpy as np
import pytest
import scipy.sparse.linalg

from latentphase import attn, phase, rmt, synth
from latentphase.core import (
    Spectrum,
    effective_rank,
    omega,
    omega_rows,
    pr_dimension,
    spectral_entropy,
)
from latentphase.dataset import embedded_models, embedded_profile
from latentphase.eig import ActivationMatrix, eigendecompose, estimate_covariance
from latentphase.fileio import add_quantization_noise


@pytest.fixture
def scorecard(request):
    """Report one criterion line on the live terminal, then assert."""
    reporter = request.config.pluginmanager.getplugin("terminalreporter")

    def report(name: str, ok: bool, detail: str = ""):
        line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  [{detail}]" if detail else "")
        if reporter is not None:
            reporter.write_line(line)
        else:  # pragma: no cover - plain pytest always has the reporter
            print(line)
        assert ok, line

    return report


# --- embedded-signature reproduction ---------------------------------------


def test_criterion_01_largest_model_critical_depth(scorecard):
    t0 = time.perf_counter()
    rep = phase.critical_depth(embedded_profile("MiroThinker-30B"))
    elapsed = time.perf_counter() - t0
    ok = (
        rep.jump_layer_pair == (19, 20)
        and abs(rep.jump_magnitude - 0.21) <= 0.005
        and abs(rep.gamma_c_hat - 20 / 48) < 1e-12
        and elapsed < 1.0
    )
    scorecard(
        "criterion 01: MiroThinker-30B critical depth",
        ok,
        f"pair={rep.jump_layer_pair} jump={rep.jump_magnitude:.3f} "
        f"gamma_c={rep.gamma_c_hat:.4f} {elapsed:.3f}s",
    )


def test_criterion_01_cli_runtime():
    # the end-to-end command must also finish inside the 1 s budget
    t0 = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "latentphase.cli", "critical-depth",
         "--embedded", "MiroThinker-30B"],
        capture_output=True, text=True, timeout=30,
    )
    elapsed = time.perf_counter() - t0
    assert proc.returncode == 0, proc.stderr
    assert elapsed < 1.0, f"CLI took {elapsed:.2f}s"


def test_criterion_02_medium_model_critical_depth(scorecard):
    prof = embedded_profile("Fimbulvetr-11B")
    rep = phase.critical_depth(prof)
    means = {p.layer: p.mean_omega for p in prof.points}
    ok = (
        rep.jump_layer_pair == (19, 20)
        and abs(means[19] - 0.63) < 1e-12
        and abs(means[20] - 0.81) < 1e-12
        and abs(rep.gamma_c_hat - 20 / 48) < 1e-12
    )
    scorecard(
        "criterion 02: Fimbulvetr-11B critical depth",
        ok,
        f"pair={rep.jump_layer_pair} 0.63->0.81 gamma_c={rep.gamma_c_hat:.4f}",
    )


def test_criterion_03_threshold_classification(scorecard):
    expected = {
        "MiroThinker-30B": True,
        "Fimbulvetr-11B": True,
        "Llama-3-8B": True,
        "Qwen-1.5B": False,
        "Gemma-2-2B": False,
    }
    got = {}
    for model in embedded_models():
        exceeds, _ = phase.classify_phase(embedded_profile(model), tau_c=0.75)
        got[model] = exceeds
    max_small = {
        m: max(p.mean_omega for p in embedded_profile(m).points)
        for m in ("Qwen-1.5B", "Gemma-2-2B")
    }
    ok = (
        got == expected
        and abs(max_small["Qwen-1.5B"] - 0.68) < 1e-12
        and abs(max_small["Gemma-2-2B"] - 0.66) < 1e-12
    )
    scorecard("criterion 03: threshold classification (tau_c=0.75)", ok, str(got))


# --- variational identity ---------------------------------------------------


def test_criterion_04_free_energy_identity(scorecard):
    rng = np.random.default_rng(42)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        V = int(rng.integers(2, 21))
        ev = attn.EnergyVector(energies=rng.standard_normal(V) * 3.0,
                               beta=float(rng.uniform(0.1, 10.0)))
        p_star = attn.gibbs(ev)
        raw = rng.random(V)
        p = raw / raw.sum()
        gap = attn.free_energy(p, ev) - attn.free_energy(p_star, ev)
        kl = attn.kl_divergence(p, p_star) / ev.beta
        worst = max(worst, abs(gap - kl))
        if attn.free_energy(p_star, ev) > attn.free_energy(p, ev) + 1e-12:
            worst = np.inf
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 5.0
    scorecard("criterion 04: free-energy gap equals scaled KL (1000 cases)",
              ok, f"worst={worst:.2e} {elapsed:.2f}s")


# --- mixture rank theorem ----------------------------------------------------


def test_criterion_05_mixture_spike_counts(scorecard):
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    analytic_ok = True
    matches = 0
    n_cfg = 50
    for i in range(n_cfg):
        k = int(rng.integers(1, 9))
        d = int(rng.integers(8, 65))
        raw = rng.random(k) + 0.1
        cfg = synth.MixtureConfig(
            k=k, d=d, probs=raw / raw.sum(),
            prototypes=rng.standard_normal((k, d)) * 2.0,
            sigma2=1.0, samples=100_000, seed=1000 + i,
        )
        pop = synth.mixture_population_cov(cfg)
        pop_eigs = np.linalg.eigvalsh(pop.entries)
        analytic_count = int(np.sum(pop_eigs > cfg.sigma2 + 1e-9))
        if analytic_count > k - 1:
            analytic_ok = False
        X = synth.sample_mixture(cfg)
        spec = eigendecompose(estimate_covariance(X))
        # MP-edge-corrected fence for the sampled spectrum
        fence = cfg.sigma2 * (1 + np.sqrt(d / cfg.samples)) ** 2 * 1.05
        sampled_count = int(np.sum(spec.eigenvalues > fence))
        if sampled_count == analytic_count:
            matches += 1
    elapsed = time.perf_counter() - t0
    ok = analytic_ok and matches >= 48 and elapsed < 60.0
    scorecard("criterion 05: mixture covariance rank vs sampled spikes",
              ok, f"matches={matches}/{n_cfg} {elapsed:.1f}s")


# --- transverse contraction ---------------------------------------------------


def test_criterion_06_contraction_runs(scorecard):
    t0 = time.perf_counter()
    qs = (0.3, 0.5, 0.7)
    all_ok = True
    fail = None
    for seed in range(100):
        cfg = synth.ContractionConfig(
            d=32, k=4, q=qs[seed % 3],
            sigma_perp2=(0.0 if seed % 2 == 0 else 0.01),
            steps=50, seed=seed,
        )
        checks = synth.check_contraction(synth.run_contraction(cfg))
        run_ok = (
            checks["norm_bound"]
            and checks["psd_recursion"]
            and checks["trace_bound"]
            and checks["rank_convergence"] in (True, None)
        )
        if not run_ok and fail is None:
            fail = (seed, checks)
        all_ok = all_ok and run_ok
    elapsed = time.perf_counter() - t0
    ok = all_ok and elapsed < 30.0
    scorecard("criterion 06: contraction recursion/trace/rank checks (100 runs)",
              ok, f"{elapsed:.1f}s" + (f" first_fail={fail}" if fail else ""))


# --- null-model validation ----------------------------------------------------


def test_criterion_07_mp_null_gaussian_batch(scorecard):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    d, T = 1024, 4096
    X = ActivationMatrix(data=rng.standard_normal((T, d)), layer=0, model_id="null")
    spec = eigendecompose(estimate_covariance(X))
    fit = rmt.fit_sigma2(spec, d / T)
    ks = rmt.ks_statistic(spec, fit)
    elapsed = time.perf_counter() - t0
    ok = abs(fit.sigma2 - 1.0) <= 0.03 and ks < 0.05 and elapsed < 60.0
    scorecard("criterion 07: Gaussian batch matches the null model",
              ok, f"sigma2={fit.sigma2:.4f} KS={ks:.4f} {elapsed:.1f}s")


def test_criterion_08_spike_detectability_sweep(scorecard):
    t0 = time.perf_counter()
    d, T, sigma2 = 1000, 4000, 1.0
    c = d / T
    null = rmt.MPModel(sigma2=sigma2, c=c)
    thr = sigma2 * np.sqrt(c)
    thetas = np.linspace(0.1 * thr, 10.0 * thr, 20)
    agree = 0
    loc_ok = True
    worst_rel = 0.0
    for i, theta in enumerate(thetas):
        detectable, loc = rmt.bbp_predict(null, float(theta))
        tops = []
        for s in range(3):
            cfg = synth.SpikedConfig(
                sigma2=sigma2, thetas=np.array([theta]),
                directions=synth.random_unit_vectors(1, d, 10_000 + 10 * i + s),
                d=d, T=T, seed=100 * i + s,
            )
            X = synth.sample_spiked(cfg)
            Xc = X.data - X.data.mean(axis=0)
            top_sv = scipy.sparse.linalg.svds(Xc, k=1, return_singular_vectors=False)
            tops.append(float(top_sv[0] ** 2 / (T - 1)))
        top = float(np.mean(tops))
        empirically_detected = top > null.lambda_plus * 1.02
        if empirically_detected == detectable:
            agree += 1
        if detectable and empirically_detected:
            rel = abs(top - loc) / loc
            worst_rel = max(worst_rel, rel)
            loc_ok = loc_ok and rel <= 0.05
    elapsed = time.perf_counter() - t0
    ok = agree >= 18 and loc_ok and elapsed < 120.0
    scorecard("criterion 08: spike detectability and outlier location sweep",
              ok, f"agree={agree}/20 worst_loc_err={worst_rel:.3f} {elapsed:.1f}s")


# --- Fisher metric -------------------------------------------------------------


def test_criterion_09_fisher_metric_oracle(scorecard):
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    W = rng.standard_normal((10, 6))
    b = rng.standard_normal(10)
    h = rng.standard_normal(6)
    head = attn.LinearHead(weight=W, bias=b)
    G = attn.fisher_linear_head(head, h)
    G_mc = attn.fisher_monte_carlo(head, h, 10**6, seed=1)
    rel = np.linalg.norm(G - G_mc) / np.linalg.norm(G)
    eigs = np.linalg.eigvalsh(G)
    rank = int(np.sum(eigs > 1e-10 * eigs.max()))
    elapsed = time.perf_counter() - t0
    ok = rel <= 0.01 and eigs.min() >= -1e-10 and rank <= 9 and elapsed < 30.0
    scorecard("criterion 09: Fisher metric vs Monte-Carlo oracle",
              ok, f"rel={rel:.4f} min_eig={eigs.min():.1e} rank={rank} {elapsed:.1f}s")


# --- order-parameter / dimension-proxy bounds ----------------------------------


def test_criterion_10_bound_property_suite(scorecard):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    ok = True
    detail = []
    for d in (2, 8, 64, 1024):
        X = rng.standard_normal((10_000, d))
        w = omega_rows(X)
        cap = 1.0 - 1.0 / np.sqrt(d)
        ok = ok and bool(np.all(w >= 0.0) and np.all(w <= cap + 1e-15))
        # extremizers attain the bounds
        equal = np.full(d, 3.0) * np.sign(rng.standard_normal(d) + 0.5)
        sparse = np.zeros(d)
        sparse[int(rng.integers(d))] = -2.5
        ok = ok and abs(omega(equal) - 0.0) <= 1e-12
        ok = ok and abs(omega(sparse) - cap) <= 1e-12
        lam = rng.exponential(size=(10_000, d))
        for row in lam:
            s = Spectrum(row)
            pr = pr_dimension(s)
            re = effective_rank(s)
            se = spectral_entropy(s)
            nz = s.nonzero_count
            if not (1.0 - 1e-12 <= pr <= nz + 1e-9 and nz <= d):
                ok = False
            if not (1.0 - 1e-12 <= re <= d + 1e-9):
                ok = False
            if not (-1e-12 <= se <= np.log(d) + 1e-9):
                ok = False
        detail.append(f"d={d}")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 5.0
    scorecard("criterion 10: order-parameter and dimension-proxy bounds",
              ok, f"{' '.join(detail)} {elapsed:.1f}s")


# --- finite-size-scaling recovery -----------------------------------------------
#
# NOTE on scope: synthetic data only.  The embedded depth profiles provide a
# single curve per model scale, which is not enough for a collapse fit (the
# fit needs >= 3 scales with overlapping scaled windows), so exponent
# recovery on the real signatures is documented as not reproducible.


def test_criterion_11_fss_exponent_recovery(scorecard):
    from conftest import synthetic_collapse_curves

    t0 = time.perf_counter()
    true = (0.2, 0.5, 0.42)  # beta/nu, 1/nu, gamma_c
    scales = [(1e9, 2.0e-4), (1e10, 8.0e-5), (3e10, 5.0e-5)]
    curves = synthetic_collapse_curves(*true, scales=scales, npts=61,
                                       noise=1e-3, seed=11)
    fit = phase.fss_collapse(curves)
    rel = (
        abs(fit.beta_over_nu - true[0]) / true[0],
        abs(fit.one_over_nu - true[1]) / true[1],
        abs(fit.gamma_c - true[2]) / true[2],
    )
    elapsed = time.perf_counter() - t0
    ok = max(rel) <= 0.10 and elapsed < 30.0
    scorecard("criterion 11: scaling-collapse exponent recovery (synthetic)",
              ok,
              f"rel_err=({rel[0]:.3f},{rel[1]:.3f},{rel[2]:.3f}) {elapsed:.1f}s")


# --- quantization robustness -----------------------------------------------------


def test_criterion_12_quantization_robustness(scorecard):
    t0 = time.perf_counter()
    d, T, sigma2 = 512, 2048, 1.0
    s2 = 0.25 * sigma2
    cfg = synth.SpikedConfig(
        sigma2=sigma2, thetas=np.array([20.0]),
        directions=synth.random_unit_vectors(1, d, 1005), d=d, T=T, seed=5,
    )
    X = synth.sample_spiked(cfg)
    spec = eigendecompose(estimate_covariance(X))
    fit = rmt.fit_sigma2(spec, d / T)
    n_before = rmt.detect_spikes(spec, fit).count

    Xn = add_quantization_noise(X, s2, seed=99)
    spec_n = eigendecompose(estimate_covariance(Xn))
    fit_n = rmt.fit_sigma2(spec_n, d / T)
    n_after = rmt.detect_spikes(spec_n, fit_n).count

    shift = fit_n.sigma2 - fit.sigma2  # bulk-edge shift via the fitted scale
    rel = abs(shift - s2) / s2
    elapsed = time.perf_counter() - t0
    ok = n_before == n_after == 1 and rel <= 0.10 and elapsed < 30.0
    scorecard("criterion 12: spike detection robust to isotropic noise",
              ok, f"spikes {n_before}->{n_after} shift={shift:.4f} "
                  f"rel_err={rel:.3f} {elapsed:.1f}s")
