"""Bayesian posterior learners and the KL distributional regularizer."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ComponentZeroEvidence, NumericNonconvergence, ZeroEvidence
from .problem import FiniteProblem, Sample, consistent_set, to_fraction


def as_distribution(weights: Sequence) -> tuple:
    """Validate an exact probability vector and return it as fractions."""
    out = tuple(to_fraction(w) for w in weights)
    if not out or any(w < 0 for w in out) or sum(out) != 1:
        raise ValueError(f"not a probability vector: {out}")
    return out


def total_variation(p: Sequence, q: Sequence):
    return sum(abs(a - b) for a, b in zip(p, q)) / 2


def _restrict(prior: Sequence[Fraction], allowed: Sequence[int]) -> tuple:
    mass = sum(prior[h] for h in allowed)
    if mass == 0:
        raise ZeroEvidence("prior assigns zero mass to every consistent hypothesis")
    keep = set(allowed)
    return tuple(w / mass if h in keep else Fraction(0) for h, w in enumerate(prior))


def evidence(prior: Sequence[Fraction], sample: Sample, problem: FiniteProblem) -> Fraction:
    return sum((prior[h] for h in consistent_set(sample, problem)), Fraction(0))


def posterior(prior: Sequence[Fraction], sample: Sample, problem: FiniteProblem) -> tuple:
    """Condition ``prior`` on the hypotheses consistent with ``sample``."""
    if not sample:
        return tuple(prior)
    return _restrict(prior, consistent_set(sample, problem))


def kl_divergence(p: Sequence, q: Sequence) -> float:
    """Relative entropy in nats, with ``0 log 0 = 0`` and ``inf`` off-support."""
    total = 0.0
    for a, b in zip(p, q):
        if a == 0:
            continue
        if b == 0:
            return math.inf
        total += float(a) * (math.log(a) - math.log(b))
    return total


def _srm_numeric(prior, allowed, max_iter: int, tol: float) -> tuple:
    q = np.array([float(w) for w in prior])
    idx = np.array([h for h in allowed if prior[h] > 0], dtype=int)
    if idx.size == 0:
        raise ZeroEvidence("prior assigns zero mass to every consistent hypothesis")
    log_q = np.log(q[idx])
    # Entropic mirror descent on the face of the simplex spanned by ``idx``;
    # the objective's gradient there is log(p/q) + 1.
    step = 0.5
    log_p = np.full(idx.size, -math.log(idx.size))
    p = np.exp(log_p)
    for it in range(1, max_iter + 1):
        log_p = (1 - step) * log_p + step * log_q
        log_p -= np.logaddexp.reduce(log_p)
        new = np.exp(log_p)
        moved = np.abs(new - p).sum()
        p = new
        if moved <= tol:
            break
    grad = log_p - log_q + 1.0
    grad_norm = float(np.linalg.norm(grad - grad.mean()))
    if moved > tol:
        raise NumericNonconvergence(grad_norm, it)
    out = np.zeros(len(prior))
    out[idx] = p
    return tuple(float(v) for v in out)


def distributional_srm(
    prior: Sequence[Fraction],
    sample: Sample,
    problem: FiniteProblem,
    mode: str = "closed_form",
    max_iter: int = 10_000,
    tol: float = 1e-10,
) -> tuple:
    """Minimize ``KL(P || prior)`` over ``P`` with zero empirical risk on ``sample``.

    ``closed_form`` returns the exact posterior; ``numeric`` runs an
    iterative solver and returns floats.
    """
    allowed = consistent_set(sample, problem)
    if mode == "closed_form":
        return _restrict(prior, allowed)
    if mode == "numeric":
        return _srm_numeric(prior, allowed, max_iter, tol)
    raise ValueError(f"unknown mode {mode!r}")


def pushforward(dist: Sequence[Fraction], x: int, problem: FiniteProblem) -> tuple:
    out = [Fraction(0)] * problem.n_labels
    for h, w in enumerate(dist):
        if w:
            out[problem.hypotheses[h][x]] += w
    return tuple(out)


def bayes_predictive(prior, sample: Sample, x: int, problem: FiniteProblem) -> tuple:
    """Label distribution at ``x`` obtained by drawing from the posterior."""
    return pushforward(posterior(prior, sample, problem), x, problem)


@dataclass(frozen=True)
class MixtureReport:
    mixture_of_posteriors: tuple
    posterior_of_mixture: tuple
    distance: Fraction
    evidences: tuple

    @property
    def verdict(self) -> str:
        return "equal" if self.distance == 0 else "unequal"

    @property
    def equal_evidence(self) -> bool:
        return len(set(self.evidences)) <= 1


def mix_bayesians_compare(priors, weights, sample: Sample, problem: FiniteProblem) -> MixtureReport:
    """Compare the mixture of posteriors with the posterior of the mixed prior."""
    priors = [tuple(to_fraction(w) for w in q) for q in priors]
    weights = as_distribution(weights)
    if len(priors) != len(weights):
        raise ValueError("one weight per prior is required")
    allowed = consistent_set(sample, problem)
    evidences = tuple(sum((q[h] for h in allowed), Fraction(0)) for q in priors)
    bad = [i for i, e in enumerate(evidences) if e == 0]
    if bad:
        raise ComponentZeroEvidence(bad)
    size = problem.n_hypotheses
    mixed_post = [Fraction(0)] * size
    for p, q in zip(weights, priors):
        for h, w in enumerate(_restrict(q, allowed)):
            mixed_post[h] += p * w
    mixed_prior = [sum((p * q[h] for p, q in zip(weights, priors)), Fraction(0)) for h in range(size)]
    post_mixed = _restrict(mixed_prior, allowed)
    return MixtureReport(
        tuple(mixed_post), post_mixed, total_variation(mixed_post, post_mixed), evidences
    )
