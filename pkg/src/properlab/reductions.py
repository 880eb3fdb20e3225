"""Model reductions: properization, transductive learning and confidence boosting."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .bayes import posterior
from .errors import EnumerationCapExceeded
from .game import SolverConfig, solve_game
from .learners import (
    Bayesian,
    LearnerSpec,
    Properized,
    dist_between,
    expected_error_exact,
    predict,
    properize,
)
from .problem import (
    FiniteProblem,
    Marginal,
    Predictor,
    default_cap,
    enumerate_weighted_samples,
    true_error,
    weighted_point_sequences,
)

__all__ = [
    "dist_between",
    "properize",
    "properization_bound_check",
    "TransductiveInstance",
    "transductive_error",
    "loo_bound_check",
    "df_to_transductive",
    "factor_e_check",
    "avoidance_probability",
    "confidence_boost",
    "SampleComplexityQuery",
    "sample_complexity_df",
    "classic_bracket",
]


def _point_loss(pred: Predictor, x: int, target: int, problem: FiniteProblem) -> Fraction:
    return sum((p * problem.loss[y][target] for y, p in enumerate(pred[x]) if p), Fraction(0))


def _ratio(num, den):
    if den == 0:
        return Fraction(1) if num == 0 else math.inf
    return num / den


@dataclass
class ProperizationReport:
    max_ratio: Fraction | float
    checked: int
    violations: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.violations


def properization_bound_check(
    inner: LearnerSpec, marg: Marginal, n: int, problem: FiniteProblem, cap: int | None = None
) -> ProperizationReport:
    """Check, sample by sample, that properizing at most doubles the true error."""
    wrapped = Properized(inner)
    worst = Fraction(0)
    checked = 0
    violations = []
    for truth in range(problem.n_hypotheses):
        for sample, _ in enumerate_weighted_samples(marg, truth, n, problem, cap):
            base = true_error(predict(inner, sample, problem, marg), marg, truth, problem)
            proper = true_error(predict(wrapped, sample, problem, marg), marg, truth, problem)
            checked += 1
            if proper > 2 * base:
                violations.append((truth, sample, proper, base))
            worst = max(worst, _ratio(proper, base))
    return ProperizationReport(worst, checked, violations)


@dataclass(frozen=True)
class TransductiveInstance:
    points: tuple
    truth: int

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if len(self.points) < 2:
            raise ValueError("a transductive instance needs at least two points")

    @property
    def m(self) -> int:
        return len(self.points)


def _check_instance(inst: TransductiveInstance, problem: FiniteProblem):
    if not 0 <= inst.truth < problem.n_hypotheses or any(not 0 <= x < problem.n_points for x in inst.points):
        raise IndexError("transductive instance index out of range")


def _leave_one_out(points: Sequence[int], i: int) -> tuple:
    return tuple(points[:i]) + tuple(points[i + 1:])


def transductive_error(
    learner: LearnerSpec, inst: TransductiveInstance, problem: FiniteProblem, marg: Marginal | None = None
) -> Fraction:
    """Average leave-one-out loss over the instance's points.

    ``marg`` is handed to the learner; it defaults to the uniform
    distribution over the instance's positions.
    """
    _check_instance(inst, problem)
    marg = marg or Marginal.empirical(inst.points, problem.n_points)
    row = problem.hypotheses[inst.truth]
    total = Fraction(0)
    for i, x in enumerate(inst.points):
        train = problem.label_sample(_leave_one_out(inst.points, i), inst.truth)
        total += _point_loss(predict(learner, train, problem, marg), x, row[x], problem)
    return total / inst.m


@dataclass
class LooReport:
    expected_error: Fraction
    leave_one_out: Fraction
    transductive_max: Fraction
    argmax: tuple

    @property
    def identity_holds(self) -> bool:
        return self.expected_error == self.leave_one_out

    @property
    def bound_holds(self) -> bool:
        return self.expected_error <= self.transductive_max


def loo_bound_check(
    learner: LearnerSpec, marg: Marginal, truth: int, m: int, problem: FiniteProblem, cap: int | None = None
) -> LooReport:
    """Compare expected error at size ``m`` with leave-one-out error at size ``m + 1``.

    The learner receives ``marg`` throughout.  The transductive maximum runs
    over all size ``m + 1`` sequences from the support of ``marg``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    lhs = expected_error_exact(learner, marg, truth, m, problem, cap)
    loo = Fraction(0)
    worst, arg = Fraction(-1), ()
    for points, prob in weighted_point_sequences(marg, m + 1, cap):
        err = transductive_error(learner, TransductiveInstance(points, truth), problem, marg)
        loo += prob * err
        if err > worst:
            worst, arg = err, points
    return LooReport(lhs, loo, worst, arg)


def _b_prediction_loss(
    df_learner: LearnerSpec,
    inst: TransductiveInstance,
    i: int,
    problem: FiniteProblem,
    unif: Marginal,
    mode: str,
    trials: int,
    seed: int,
):
    x = inst.points[i]
    rest = _leave_one_out(inst.points, i)
    target = problem.hypotheses[inst.truth][x]
    if x in rest:
        # the held-out point's label was observed in the training data
        return Fraction(0)
    k = len(rest)
    if mode == "exact":
        total = Fraction(0)
        for idx in itertools.product(range(k), repeat=k):
            train = problem.label_sample(tuple(rest[j] for j in idx), inst.truth)
            total += _point_loss(predict(df_learner, train, problem, unif), x, target, problem)
        return total / k**k
    rng = np.random.default_rng([seed, i])
    draws = rng.integers(0, k, size=(trials, k))
    total = 0.0
    cache = {}
    for idx in map(tuple, draws):
        if idx not in cache:
            train = problem.label_sample(tuple(rest[j] for j in idx), inst.truth)
            cache[idx] = float(_point_loss(predict(df_learner, train, problem, unif), x, target, problem))
        total += cache[idx]
    return total / trials


def df_to_transductive(
    df_learner: LearnerSpec,
    inst: TransductiveInstance,
    problem: FiniteProblem,
    mode: str = "exact",
    trials: int = 1000,
    seed: int = 0,
    cap: int | None = None,
):
    """Transductive error of the learner that simulates ``df_learner`` on resamples.

    To predict a held-out point that does not reappear in the training
    part, it averages ``df_learner``'s prediction over training sets of
    ``m - 1`` draws from the remaining labeled points, with the uniform
    distribution over the instance's positions as the marginal.
    """
    _check_instance(inst, problem)
    if mode not in ("exact", "mc"):
        raise ValueError(f"unknown mode {mode!r}")
    cap = default_cap() if cap is None else cap
    k = inst.m - 1
    if mode == "exact" and inst.m * k**k > cap:
        raise EnumerationCapExceeded(inst.m * k**k, cap)
    unif = Marginal.empirical(inst.points, problem.n_points)
    parts = [
        _b_prediction_loss(df_learner, inst, i, problem, unif, mode, trials, seed) for i in range(inst.m)
    ]
    return sum(parts) / inst.m


@dataclass
class FactorEReport:
    transductive: Fraction | float
    expected_error: Fraction

    @property
    def bound(self) -> float:
        return math.e * float(self.expected_error)

    @property
    def slack(self) -> float:
        return float(self.transductive) - self.bound

    def holds(self, tol: float = 1e-12) -> bool:
        return self.slack <= tol


def factor_e_check(df_learner: LearnerSpec, inst: TransductiveInstance, problem: FiniteProblem, cap: int | None = None) -> FactorEReport:
    """Transductive error of the simulating learner against ``e`` times the expected error."""
    lhs = df_to_transductive(df_learner, inst, problem, "exact", cap=cap)
    unif = Marginal.empirical(inst.points, problem.n_points)
    rhs = expected_error_exact(df_learner, unif, inst.truth, inst.m - 1, problem, cap)
    return FactorEReport(lhs, rhs)


def _coprime_fraction(num: int, den: int) -> Fraction:
    # Skips the gcd, which dominates the cost for huge coprime powers.
    make = getattr(Fraction, "_from_coprime_ints", None)
    if make is not None:
        return make(num, den)
    return Fraction(num, den, _normalize=False)


def avoidance_probability(m: int) -> Fraction:
    """Chance that ``m - 1`` uniform draws from ``m`` items all miss a given item."""
    if m < 2:
        raise ValueError("m must be >= 2")
    # gcd(m - 1, m) = 1, so the powers are coprime as well
    return _coprime_fraction((m - 1) ** (m - 1), m ** (m - 1))


@dataclass
class BoostReport:
    failure_rate: float
    failures: int
    trials: int
    epsilon: Fraction

    @property
    def std_error(self) -> float:
        p = self.failure_rate
        return math.sqrt(p * (1 - p) / self.trials)


def _realize(learner: LearnerSpec, sample, problem, marg, rng, cache) -> Predictor:
    """One draw of the learner's output, as a deterministic predictor."""
    key = tuple(sample)
    if isinstance(learner, Bayesian):
        if key not in cache:
            cache[key] = np.array([float(w) for w in posterior(learner.prior, sample, problem)])
        weights = cache[key]
        h = int(rng.choice(len(weights), p=weights))
        return h, None
    if key not in cache:
        cache[key] = predict(learner, sample, problem, marg)
    pred = cache[key]
    labels = tuple(int(rng.choice(len(row), p=[float(p) for p in row])) for row in pred)
    return None, labels


def confidence_boost(
    base: LearnerSpec,
    k: int,
    v: int,
    marg: Marginal,
    truth: int,
    n: int,
    trials: int,
    seed: int,
    problem: FiniteProblem,
    epsilon,
) -> BoostReport:
    """Simulate train-``k``-copies-then-validate and count errors above ``epsilon``.

    Each copy is trained on its own fresh size-``n`` sample; the copy with
    the lowest empirical risk on a fresh size-``v`` validation sample is
    kept (lowest index on ties, the first copy when ``v == 0``).  Randomized
    outputs are realized by one draw, so a Bayesian copy commits to a single
    hypothesis from its posterior.  Every trial uses its own seeded stream.
    """
    if k < 1 or trials < 1 or v < 0:
        raise ValueError("k and trials must be >= 1, v >= 0")
    epsilon = Fraction(epsilon)
    probs = np.array([float(w) for w in marg.weights])
    probs /= probs.sum()
    row = problem.hypotheses[truth]
    cache: dict = {}
    err_cache: dict = {}
    failures = 0
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        outputs = []
        for _ in range(k):
            points = rng.choice(len(probs), size=n, p=probs)
            sample = problem.label_sample(tuple(int(x) for x in points), truth)
            h, labels = _realize(base, sample, problem, marg, rng, cache)
            outputs.append(problem.hypotheses[h] if h is not None else labels)
        chosen = outputs[0]
        if v > 0 and k > 1:
            val = rng.choice(len(probs), size=v, p=probs)
            val_sample = problem.label_sample(tuple(int(x) for x in val), truth)
            risks = [
                sum(problem.loss[out[x]][y] for x, y in val_sample) for out in outputs
            ]
            chosen = outputs[min(range(k), key=lambda c: (risks[c], c))]
        if chosen not in err_cache:
            err_cache[chosen] = sum(
                (marg[x] * problem.loss[chosen[x]][row[x]] for x in marg.support), Fraction(0)
            )
        if err_cache[chosen] > epsilon:
            failures += 1
    return BoostReport(failures / trials, failures, trials, epsilon)


@dataclass(frozen=True)
class SampleComplexityQuery:
    epsilon: Fraction
    delta: Fraction = Fraction(1, 2)
    model: str = "distribution_fixed"
    n_max: int = 3

    def __post_init__(self):
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        object.__setattr__(self, "delta", Fraction(self.delta))
        if not (0 < self.epsilon < 1 and 0 < self.delta < 1):
            raise ValueError("epsilon and delta must lie in (0, 1)")
        if self.model not in ("classic", "distribution_fixed"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")


def game_values(problem: FiniteProblem, marg: Marginal, n_max: int, cfg: SolverConfig | None = None) -> tuple:
    """Exact game values for sample sizes ``1 .. n_max``."""
    return tuple(solve_game(problem, marg, n, cfg).value for n in range(1, n_max + 1))


def _threshold(values: Sequence, accept) -> int | None:
    """Smallest n whose value and every later value up to n_max is accepted."""
    found = None
    for n in range(len(values), 0, -1):
        if not accept(values[n - 1]):
            break
        found = n
    return found


def sample_complexity_df(
    problem: FiniteProblem, marg: Marginal, q: SampleComplexityQuery, cfg: SolverConfig | None = None, values=None
) -> int | None:
    """Distribution-fixed expected-error sample complexity, or ``None`` if above ``n_max``.

    Values are checked on the whole window up to ``n_max`` since the game
    value need not be monotone in the sample size.
    """
    if q.model != "distribution_fixed":
        raise ValueError("sample_complexity_df answers distribution-fixed queries")
    values = values if values is not None else game_values(problem, marg, q.n_max, cfg)
    return _threshold(values, lambda v: v <= q.epsilon)


@dataclass
class Bracket:
    lower: int | None
    upper_witness: int | None
    per_marginal: list
    note: str = (
        "upper witness ranges over the grid only; the classic complexity "
        "maximizes over every marginal"
    )


def classic_bracket(problem: FiniteProblem, grid: Sequence[Marginal], q: SampleComplexityQuery, cfg: SolverConfig | None = None) -> Bracket:
    """Bracket the classic expected-error sample complexity using a grid of marginals.

    ``None`` in a bound means it exceeds ``n_max``.
    """
    if q.model != "classic":
        raise ValueError("classic_bracket answers classic-model queries")
    if not grid:
        raise ValueError("the marginal grid is empty")
    eps = q.epsilon
    rows = []
    for marg in grid:
        values = game_values(problem, marg, q.n_max, cfg)
        df = _threshold(values, lambda v: v <= eps)
        df_e = _threshold(values, lambda v: float(v) * math.e <= float(eps))
        rows.append((marg, df, df_e))

    def worst(items):
        items = list(items)
        return None if any(i is None for i in items) else max(items)

    return Bracket(worst(r[1] for r in rows), worst(r[2] for r in rows), rows)
