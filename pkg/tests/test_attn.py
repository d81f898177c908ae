import math

import numpy as np
import pytest

from latentphase import attn
from latentphase.errors import DomainError, InputError


def test_energy_vector_validation():
    with pytest.raises(InputError):
        attn.EnergyVector(energies=np.array([]))
    with pytest.raises(InputError):
        attn.EnergyVector(energies=np.array([1.0, np.inf]))
    with pytest.raises(InputError):
        attn.EnergyVector(energies=np.array([1.0]), beta=0.0)


def test_gibbs_matches_naive_softmax():
    rng = np.random.default_rng(0)
    E = rng.standard_normal(9)
    ev = attn.EnergyVector(energies=E, beta=2.5)
    naive = np.exp(-2.5 * E) / np.exp(-2.5 * E).sum()
    np.testing.assert_allclose(attn.gibbs(ev), naive, atol=1e-14)


def test_gibbs_stable_at_extreme_energies():
    ev = attn.EnergyVector(energies=np.array([-1000.0, 0.0, 1000.0]), beta=1.0)
    p = attn.gibbs(ev)
    assert np.all(np.isfinite(p)) and p.sum() == pytest.approx(1.0)
    assert p[0] == pytest.approx(1.0)


def test_log_partition_two_point():
    ev = attn.EnergyVector(energies=np.array([0.0, math.log(2.0)]), beta=1.0)
    assert attn.log_partition(ev) == pytest.approx(math.log(1.5), abs=1e-14)


def test_free_energy_at_gibbs_is_minus_log_partition_over_beta():
    rng = np.random.default_rng(1)
    ev = attn.EnergyVector(energies=rng.standard_normal(7), beta=3.0)
    p_star = attn.gibbs(ev)
    assert attn.free_energy(p_star, ev) == pytest.approx(
        -attn.log_partition(ev) / ev.beta, abs=1e-13
    )


def test_free_energy_handles_zero_probabilities():
    ev = attn.EnergyVector(energies=np.array([1.0, 2.0, 3.0]), beta=1.0)
    assert attn.free_energy([1.0, 0.0, 0.0], ev) == pytest.approx(1.0)


def test_free_energy_validates_simplex():
    ev = attn.EnergyVector(energies=np.array([1.0, 2.0]), beta=1.0)
    with pytest.raises(InputError):
        attn.free_energy([0.3, 0.3], ev)
    with pytest.raises(InputError):
        attn.free_energy([0.5, 0.5, 0.0], ev)


def test_kl_properties_and_support():
    p = np.array([0.5, 0.5, 0.0])
    q = np.array([0.25, 0.25, 0.5])
    assert attn.kl_divergence(p, p) == 0.0
    assert attn.kl_divergence(p, q) > 0.0
    with pytest.raises(DomainError):
        attn.kl_divergence(q, p)  # q puts mass where p has none


def test_attention_weights_scaling():
    rng = np.random.default_rng(2)
    q = rng.standard_normal(16)
    K = rng.standard_normal((5, 16))
    w = attn.attention_weights(q, K)
    logits = K @ q / math.sqrt(16)
    naive = np.exp(logits - logits.max())
    np.testing.assert_allclose(w, naive / naive.sum(), atol=1e-14)


def test_linear_head_validation():
    with pytest.raises(InputError):
        attn.LinearHead(weight=np.ones((1, 4)), bias=np.zeros(1))  # V >= 2
    with pytest.raises(InputError):
        attn.LinearHead(weight=np.ones((3, 4)), bias=np.zeros(2))


def test_fisher_matches_per_class_score_oracle():
    rng = np.random.default_rng(3)
    W = rng.standard_normal((7, 4))
    head = attn.LinearHead(weight=W, bias=rng.standard_normal(7))
    h = rng.standard_normal(4)
    p = head.probabilities(h)
    oracle = np.zeros((4, 4))
    for y in range(7):
        s = W.T @ (np.eye(7)[y] - p)
        oracle += p[y] * np.outer(s, s)
    np.testing.assert_allclose(attn.fisher_linear_head(head, h), oracle,
                               atol=1e-12)


def test_fisher_annihilates_uniform_logit_direction():
    # adding a constant to every logit does not change the distribution, so
    # any h-direction producing uniform logit shifts is a null direction
    rng = np.random.default_rng(4)
    W = np.outer(np.ones(5), rng.standard_normal(3)) + rng.standard_normal((5, 3))
    W[:, 0] = 1.0  # first input coordinate shifts all logits equally
    head = attn.LinearHead(weight=W, bias=np.zeros(5))
    G = attn.fisher_linear_head(head, rng.standard_normal(3))
    e0 = np.zeros(3)
    e0[0] = 1.0
    assert np.abs(G @ e0).max() < 1e-12


def test_fisher_monte_carlo_converges():
    rng = np.random.default_rng(5)
    head = attn.LinearHead(weight=rng.standard_normal((6, 3)),
                           bias=rng.standard_normal(6))
    h = rng.standard_normal(3)
    G = attn.fisher_linear_head(head, h)
    G_mc = attn.fisher_monte_carlo(head, h, 200_000, seed=7)
    assert np.linalg.norm(G - G_mc) / np.linalg.norm(G) < 0.02


def test_sharpness_probe_entropy_decreases_with_scale():
    ev = attn.EnergyVector(energies=np.array([0.0, 1.0, 2.0]), beta=1.0)
    ents = [attn.effective_sharpness_probe(s, ev) for s in (0.5, 1.0, 2.0, 4.0)]
    assert all(a > b for a, b in zip(ents, ents[1:]))
    with pytest.raises(InputError):
        attn.effective_sharpness_probe(0.0, ev)
