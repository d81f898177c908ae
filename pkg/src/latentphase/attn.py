"""Attention as a Gibbs distribution: softmax weights, the free-energy
functional they minimize, the KL identity behind that minimality, and the
Fisher information metric of a linear readout head.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InputError


@dataclass(frozen=True)
class EnergyVector:
    """Per-key energies E_j = -<q, k_j> at inverse temperature beta."""

    energies: np.ndarray
    beta: float = 1.0

    def __post_init__(self):
        e = np.atleast_1d(np.asarray(self.energies, dtype=float))
        if e.size < 1 or not np.all(np.isfinite(e)):
            raise InputError("energies must be a nonempty finite vector")
        if not (self.beta > 0 and np.isfinite(self.beta)):
            raise InputError("beta must be positive and finite")
        object.__setattr__(self, "energies", e)


def _as_simplex(p) -> np.ndarray:
    v = np.atleast_1d(np.asarray(p, dtype=float))
    if np.any(v < 0) or abs(v.sum() - 1.0) > 1e-12:
        raise InputError("probabilities must be nonnegative and sum to 1")
    return v


def log_partition(e: EnergyVector) -> float:
    """log Z = log sum_j exp(-beta E_j), computed with max-subtraction."""
    a = -e.beta * e.energies
    mx = a.max()
    return float(mx + np.log(np.exp(a - mx).sum()))


def gibbs(e: EnergyVector) -> np.ndarray:
    """The softmax weights p_j proportional to exp(-beta E_j)."""
    a = -e.beta * e.energies
    a -= a.max()
    w = np.exp(a)
    return w / w.sum()


def free_energy(p, e: EnergyVector) -> float:
    """Energy plus scaled negative entropy: sum p E + (1/beta) sum p log p."""
    probs = _as_simplex(p)
    if probs.size != e.energies.size:
        raise InputError("probability and energy vectors must have equal length")
    nz = probs > 0
    entropy_term = float((probs[nz] * np.log(probs[nz])).sum())
    return float(probs @ e.energies) + entropy_term / e.beta


def kl_divergence(p, q) -> float:
    """sum p log(p/q) with 0 log(0/q) = 0; requires supp(p) within supp(q)."""
    pv = _as_simplex(p)
    qv = _as_simplex(q)
    if pv.size != qv.size:
        raise InputError("distributions must have equal length")
    nz = pv > 0
    if np.any(qv[nz] == 0):
        raise DomainError("KL undefined: p puts mass where q vanishes")
    return float((pv[nz] * np.log(pv[nz] / qv[nz])).sum())


def attention_weights(query, keys, d_k: int | None = None) -> np.ndarray:
    """Softmax of scaled dot products with beta = 1/sqrt(d_k)."""
    q = np.atleast_1d(np.asarray(query, dtype=float))
    K = np.atleast_2d(np.asarray(keys, dtype=float))
    if d_k is None:
        d_k = q.size
    if q.size != d_k or K.shape[1] != d_k:
        raise InputError("query and keys must all have length d_k")
    energies = -(K @ q)
    return gibbs(EnergyVector(energies=energies, beta=1.0 / np.sqrt(d_k)))


@dataclass(frozen=True)
class LinearHead:
    """Readout producing logits W h + b over V classes."""

    weight: np.ndarray  # V x d
    bias: np.ndarray | None = None

    def __post_init__(self):
        W = np.asarray(self.weight, dtype=float)
        if W.ndim != 2 or W.shape[0] < 2:
            raise InputError("weight must be V x d with V >= 2")
        if not np.all(np.isfinite(W)):
            raise InputError("weight contains non-finite entries")
        b = self.bias
        b = np.zeros(W.shape[0]) if b is None else np.asarray(b, dtype=float)
        if b.shape != (W.shape[0],) or not np.all(np.isfinite(b)):
            raise InputError("bias must be a finite length-V vector")
        object.__setattr__(self, "weight", W)
        object.__setattr__(self, "bias", b)

    def probabilities(self, h) -> np.ndarray:
        logits = self.weight @ np.asarray(h, dtype=float) + self.bias
        logits -= logits.max()
        w = np.exp(logits)
        return w / w.sum()


def fisher_linear_head(head: LinearHead, h) -> np.ndarray:
    """Fisher metric of the readout at h: W^T (diag(p) - p p^T) W.

    Symmetric PSD with rank at most min(d, V - 1); the all-ones logit
    direction is annihilated.
    """
    hv = np.asarray(h, dtype=float)
    if hv.shape != (head.weight.shape[1],):
        raise InputError("h must have length d matching the head")
    p = head.probabilities(hv)
    M = np.diag(p) - np.outer(p, p)
    G = head.weight.T @ M @ head.weight
    return 0.5 * (G + G.T)


def fisher_monte_carlo(head: LinearHead, h, n: int, seed: int = 0) -> np.ndarray:
    """Monte-Carlo estimate (1/n) sum s(y) s(y)^T with score
    s(y) = W^T (e_y - p), y drawn from the head's distribution.

    The score takes only V distinct values, so class counts suffice."""
    p = head.probabilities(np.asarray(h, dtype=float))
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(n, p)
    # column y of `scores` is W^T (e_y - p)
    scores = head.weight.T @ (np.eye(p.size) - p[:, None])
    G = (scores * counts) @ scores.T / n
    return 0.5 * (G + G.T)


def effective_sharpness_probe(scale: float, e: EnergyVector) -> float:
    """Shannon entropy of the Gibbs weights at scaled energies.

    Growing energy scale mimics depth-wise cooling: entropy decreases
    monotonically for non-constant energies."""
    if scale <= 0:
        raise InputError("scale must be positive")
    p = gibbs(EnergyVector(energies=scale * e.energies, beta=e.beta))
    nz = p > 0
    return float(-(p[nz] * np.log(p[nz])).sum())
