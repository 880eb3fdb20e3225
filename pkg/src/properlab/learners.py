"""Finitely described learners and their expected error.

Every learner here is distribution-fixed: :func:`predict` receives the
marginal alongside the sample, though only :class:`Properized` uses it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Union

import numpy as np

from .bayes import posterior, pushforward
from .errors import UndefinedSample
from .problem import (
    FiniteProblem,
    Marginal,
    Predictor,
    Sample,
    deterministic_predictor,
    enumerate_weighted_samples,
    hypothesis_predictor,
    true_error,
)


@dataclass(frozen=True)
class Bayesian:
    """Emits the posterior of ``prior`` given the sample (predicts by sampling it)."""

    prior: tuple


@dataclass(frozen=True)
class Constant:
    hypothesis: int


@dataclass(frozen=True)
class Table:
    """Explicit map from labeled samples to predictors."""

    mapping: Mapping = field(hash=False)

    @classmethod
    def from_labels(cls, mapping: Mapping, n_labels: int) -> "Table":
        return cls({s: deterministic_predictor(row, n_labels) for s, row in mapping.items()})


@dataclass(frozen=True)
class Properized:
    """Replaces the inner learner's output with its nearest hypothesis."""

    inner: "LearnerSpec"


LearnerSpec = Union[Bayesian, Constant, Table, Properized]


def dist_between(f: Predictor, g: Predictor, marg: Marginal, problem: FiniteProblem) -> Fraction:
    """Expected loss between the labels of ``f`` and ``g`` at a point drawn from ``marg``."""
    loss = problem.loss
    total = Fraction(0)
    for x in marg.support:
        inner = Fraction(0)
        for a, pa in enumerate(f[x]):
            if pa:
                for b, pb in enumerate(g[x]):
                    if pb:
                        inner += pa * pb * loss[a][b]
        total += marg[x] * inner
    return total


def properize(pred: Predictor, marg: Marginal, problem: FiniteProblem) -> int:
    """Index of the hypothesis nearest to ``pred`` under ``marg`` (lowest index on ties)."""
    best, best_d = 0, None
    for h in range(problem.n_hypotheses):
        d = dist_between(hypothesis_predictor(problem, h), pred, marg, problem)
        if best_d is None or d < best_d:
            best, best_d = h, d
    return best


def predict(learner: LearnerSpec, sample: Sample, problem: FiniteProblem, marg: Marginal | None = None) -> Predictor:
    if isinstance(learner, Constant):
        return hypothesis_predictor(problem, learner.hypothesis)
    if isinstance(learner, Bayesian):
        post = posterior(learner.prior, sample, problem)
        return tuple(pushforward(post, x, problem) for x in range(problem.n_points))
    if isinstance(learner, Table):
        try:
            return learner.mapping[tuple(sample)]
        except KeyError:
            raise UndefinedSample(f"table learner undefined on sample {sample}") from None
    if isinstance(learner, Properized):
        if marg is None:
            raise ValueError("a properized learner needs the marginal")
        inner = predict(learner.inner, sample, problem, marg)
        return hypothesis_predictor(problem, properize(inner, marg, problem))
    raise TypeError(f"unknown learner {learner!r}")


def expected_error_exact(
    learner: LearnerSpec,
    marg: Marginal,
    truth: int,
    n: int,
    problem: FiniteProblem,
    cap: int | None = None,
    collapse: bool = False,
) -> Fraction:
    """Exact expected true error after training on ``n`` i.i.d. points."""
    total = Fraction(0)
    for sample, prob in enumerate_weighted_samples(marg, truth, n, problem, cap, collapse):
        total += prob * true_error(predict(learner, sample, problem, marg), marg, truth, problem)
    return total


def expected_error_mc(
    learner: LearnerSpec,
    marg: Marginal,
    truth: int,
    n: int,
    problem: FiniteProblem,
    trials: int,
    seed: int,
) -> tuple:
    """Monte-Carlo estimate of :func:`expected_error_exact` and its 95% half-width.

    Samples are drawn at random; the error of each trained predictor is
    integrated exactly, which keeps the estimator unbiased.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    probs = np.array([float(w) for w in marg.weights])
    draws = rng.choice(len(probs), size=(trials, n), p=probs / probs.sum())
    uniq, inverse = np.unique(draws, axis=0, return_inverse=True)
    errors = np.array(
        [
            float(true_error(predict(learner, problem.label_sample(tuple(int(x) for x in row), truth), problem, marg), marg, truth, problem))
            for row in uniq
        ]
    )
    values = errors[np.asarray(inverse).reshape(-1)]
    estimate = float(values.mean())
    if trials == 1:
        return estimate, math.inf
    half_width = 1.96 * float(values.std(ddof=1)) / math.sqrt(trials)
    return estimate, half_width
