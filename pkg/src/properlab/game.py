"""The distribution-fixed learning game and its proper Bayesian responses.

The adversary picks the ground-truth hypothesis, the learner picks a map
from size-``n`` samples to predictors, and the learner pays its expected
error under the fixed marginal.  The adversary's payoff against a best
responding learner is a concave piecewise-linear function of its prior;
maximizing it gives the game value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import IterationCapExceeded, ZeroEvidence
from .learners import Bayesian, LearnerSpec, Table, dist_between, expected_error_exact
from .problem import FiniteProblem, Marginal, hypothesis_predictor, realizable_samples
from .simplex import solve_lp

EXACT = "exact_lp"
MW = "multiplicative_weights"
# step size on payoffs rescaled to max entry 1
MW_STEP = 1.0


@dataclass(frozen=True)
class SolverConfig:
    method: str = EXACT
    tolerance: float | None = None
    iteration_cap: int = 100_000
    cap: int | None = None

    def __post_init__(self):
        if self.method not in (EXACT, MW):
            raise ValueError(f"unknown method {self.method!r}")
        if self.tolerance is not None and self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.iteration_cap < 1 or (self.cap is not None and self.cap < 1):
            raise ValueError("caps must be >= 1")

    @property
    def tol(self) -> float:
        if self.tolerance is not None:
            return self.tolerance
        return 1e-9 if self.method == EXACT else 1e-6


@dataclass
class GameSolution:
    value: Fraction | float
    adversary_prior: tuple
    method: str
    duality_gap: Fraction | float
    n: int
    marginal_id: str = "uniform"
    converged: bool = True
    degenerate: bool = False
    iterations: int = 0
    learner_strategy: dict = field(default=None, repr=False, compare=False)


@dataclass
class GameBlocks:
    """Aggregated payoff data of the game.

    Samples that leave the same consistent set are interchangeable, so the
    payoff only depends on ``(consistent set, test point)`` keys.  Entry
    ``coef[k][y][h]`` is the mass of key ``k`` times ``loss(h(x), y)`` for
    ``h`` in the consistent set (zero otherwise).  Keys where every
    consistent hypothesis agrees at ``x`` contribute nothing and are dropped.
    """

    keys: list
    coef: list

    def as_array(self) -> np.ndarray:
        if not self.keys:
            return np.zeros((0, 0, 0))
        return np.array([[[float(v) for v in row] for row in block] for block in self.coef])


def game_blocks(problem: FiniteProblem, marg: Marginal, n: int, cap: int | None = None) -> GameBlocks:
    mass: dict = {}
    for _, prob, cons in realizable_samples(marg, n, problem, cap):
        mass[cons] = mass.get(cons, Fraction(0)) + prob
    keys, coef = [], []
    for cons in sorted(mass):
        for x in marg.support:
            if len({problem.hypotheses[h][x] for h in cons}) < 2:
                continue
            w = mass[cons] * marg[x]
            block = [
                [w * problem.loss[problem.hypotheses[h][x]][y] if h in cons else Fraction(0) for h in range(problem.n_hypotheses)]
                for y in range(problem.n_labels)
            ]
            keys.append((cons, x))
            coef.append(block)
    return GameBlocks(keys, coef)


def adversary_payoff(blocks: GameBlocks, prior) -> Fraction:
    """Value of a best-responding learner against ``prior`` (exact)."""
    total = Fraction(0)
    for block in blocks.coef:
        total += min(sum((a * p for a, p in zip(row, prior) if a), Fraction(0)) for row in block)
    return total


def learner_payoffs(blocks: GameBlocks, strategy: dict) -> tuple:
    """Expected error against each truth of a randomized learner given per key."""
    size = len(blocks.coef[0][0]) if blocks.coef else 0
    out = [Fraction(0)] * size
    for key, block in zip(blocks.keys, blocks.coef):
        for y, py in enumerate(strategy[key]):
            if py:
                for h, a in enumerate(block[y]):
                    out[h] += py * a
    return tuple(out)


def best_response(prior, marg: Marginal, n: int, problem: FiniteProblem, cap: int | None = None):
    """Optimal learner against the adversary prior and its expected error.

    Returns ``(value, Table)``.  Each sample is mapped to the deterministic
    predictor minimizing posterior expected loss pointwise, lowest label on
    ties.
    """
    loss, hyps = problem.loss, problem.hypotheses
    value = Fraction(0)
    table = {}
    for sample, prob, cons in realizable_samples(marg, n, problem, cap):
        row = []
        for x in range(problem.n_points):
            scores = [
                sum((prior[h] * loss[hyps[h][x]][y] for h in cons if prior[h]), Fraction(0))
                for y in range(problem.n_labels)
            ]
            best = min(range(problem.n_labels), key=lambda y: (scores[y], y))
            row.append(best)
            if marg[x]:
                value += prob * marg[x] * scores[best]
        table[sample] = tuple(row)
    return value, Table.from_labels(table, problem.n_labels)


def solve_game(problem: FiniteProblem, marg: Marginal, n: int, cfg: SolverConfig | None = None, marginal_id: str = "uniform") -> GameSolution:
    cfg = cfg or SolverConfig()
    blocks = game_blocks(problem, marg, n, cfg.cap)
    if cfg.method == EXACT:
        sol = _solve_exact(problem, blocks)
    else:
        sol = _solve_mw(problem, blocks, cfg)
    sol.n = n
    sol.marginal_id = marginal_id
    if not sol.converged:
        raise IterationCapExceeded(sol)
    return sol


def _solve_exact(problem: FiniteProblem, blocks: GameBlocks) -> GameSolution:
    size = problem.n_hypotheses
    k = len(blocks.keys)
    n_labels = problem.n_labels
    c = [0] * size + [1] * k
    A_ub, b_ub = [], []
    for i, block in enumerate(blocks.coef):
        for y in range(n_labels):
            row = [-a for a in block[y]] + [0] * k
            row[size + i] = 1
            A_ub.append(row)
            b_ub.append(0)
    A_eq = [[1] * size + [0] * k]
    res = solve_lp(c, A_ub, b_ub, A_eq, [1])
    prior = res.x[:size]
    strategy = {}
    for i, key in enumerate(blocks.keys):
        ys = res.duals_ub[i * n_labels:(i + 1) * n_labels]
        total = sum(ys)
        strategy[key] = tuple(v / total for v in ys)
    value = adversary_payoff(blocks, prior)
    if value != res.value:
        raise AssertionError("LP objective disagrees with the adversary payoff")
    upper = max(learner_payoffs(blocks, strategy)) if blocks.keys else Fraction(0)
    return GameSolution(
        value=value,
        adversary_prior=tuple(prior),
        method=EXACT,
        duality_gap=upper - value,
        n=0,
        degenerate=res.primal_degenerate or res.dual_degenerate,
        iterations=res.pivots,
        learner_strategy=strategy,
    )


def _solve_mw(problem: FiniteProblem, blocks: GameBlocks, cfg: SolverConfig) -> GameSolution:
    size = problem.n_hypotheses
    a = blocks.as_array()
    if a.size == 0:
        prior = tuple([1.0] + [0.0] * (size - 1))
        return GameSolution(0.0, prior, MW, 0.0, 0)
    # Optimistic multiplicative weights for both players: the adversary over
    # hypotheses, the learner independently over labels at every key.
    scale = float(a.max())
    a = a / scale
    n_keys, n_labels, _ = a.shape
    eta = MW_STEP
    log_lam = np.zeros(size)
    log_mu = np.zeros((n_keys, n_labels))
    lam = np.full(size, 1.0 / size)
    mu = np.full((n_keys, n_labels), 1.0 / n_labels)
    prev_g_lam = np.einsum("kyh,ky->h", a, mu)
    prev_g_mu = a @ lam
    best_lower, best_lam = -math.inf, lam
    best_upper, best_mu = math.inf, mu
    gap = math.inf
    it = 0
    for it in range(1, cfg.iteration_cap + 1):
        g_lam = np.einsum("kyh,ky->h", a, mu)
        g_mu = a @ lam
        lower = float(g_mu.min(axis=1).sum())
        upper = float(g_lam.max())
        if lower > best_lower:
            best_lower, best_lam = lower, lam
        if upper < best_upper:
            best_upper, best_mu = upper, mu
        gap = (best_upper - best_lower) * scale
        if gap <= cfg.tol:
            break
        log_lam += eta * (2 * g_lam - prev_g_lam)
        log_lam -= log_lam.max()
        lam = np.exp(log_lam)
        lam /= lam.sum()
        log_mu -= eta * (2 * g_mu - prev_g_mu)
        log_mu -= log_mu.max(axis=1, keepdims=True)
        mu = np.exp(log_mu)
        mu /= mu.sum(axis=1, keepdims=True)
        prev_g_lam, prev_g_mu = g_lam, g_mu
    strategy = {key: tuple(float(v) for v in row) for key, row in zip(blocks.keys, best_mu)}
    return GameSolution(
        value=best_lower * scale,
        adversary_prior=tuple(float(v) for v in best_lam),
        method=MW,
        duality_gap=gap,
        n=0,
        converged=gap <= cfg.tol,
        iterations=it,
        learner_strategy=strategy,
    )


def build_proper_learner(sol: GameSolution) -> Bayesian:
    """The Bayesian learner whose prior is the adversary's optimal mixed strategy."""
    return Bayesian(tuple(Fraction(p) for p in sol.adversary_prior))


@dataclass
class WorstCase:
    errors: tuple
    max: Fraction
    ratio: Fraction | float | None


def _ratio(worst, value):
    if value is None:
        return None
    if value == 0:
        return Fraction(1) if worst == 0 else math.inf
    return worst / value


def evaluate_worstcase(
    learner: LearnerSpec,
    marg: Marginal,
    n: int,
    problem: FiniteProblem,
    value=None,
    cap: int | None = None,
) -> WorstCase:
    errors = tuple(
        expected_error_exact(learner, marg, truth, n, problem, cap) for truth in range(problem.n_hypotheses)
    )
    worst = max(errors)
    return WorstCase(errors, worst, _ratio(worst, value))


class BayesRiskTable:
    """Fast float evaluation of Bayesian learners' per-truth expected error.

    For a prior ``Q`` and truth ``t`` the error is the sum over consistent
    sets ``C`` containing ``t`` of ``mass(C) * sum_{h in C} Q_h d(h, t) / Q(C)``,
    where ``d`` is the marginal distance between hypotheses.
    """

    def __init__(self, problem: FiniteProblem, marg: Marginal, n: int, cap: int | None = None):
        mass: dict = {}
        for _, prob, cons in realizable_samples(marg, n, problem, cap):
            mass[cons] = mass.get(cons, Fraction(0)) + prob
        size = problem.n_hypotheses
        self.masks = np.zeros((len(mass), size))
        self.weights = np.zeros(len(mass))
        for g, cons in enumerate(sorted(mass)):
            self.masks[g, list(cons)] = 1.0
            self.weights[g] = float(mass[cons])
        preds = [hypothesis_predictor(problem, h) for h in range(size)]
        self.dist = np.array(
            [[float(dist_between(preds[h], preds[t], marg, problem)) for h in range(size)] for t in range(size)]
        )

    def errors(self, prior) -> np.ndarray:
        q = np.asarray(prior, dtype=float)
        den = self.masks @ q
        num = self.masks @ (q[:, None] * self.dist.T)
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = num / den[:, None]
        # a truth t only sees the groups that contain it
        contrib = np.where(self.masks > 0, frac, 0.0)
        if np.any((den == 0)[:, None] & (self.masks > 0)):
            bad = (den == 0)[:, None] & (self.masks > 0)
            contrib = np.where(bad, np.inf, contrib)
        return self.weights @ contrib

    def worst(self, prior) -> float:
        return float(self.errors(prior).max())


@dataclass
class PriorSearchResult:
    prior: tuple
    worst: Fraction | float
    ratio: Fraction | float | None
    evaluations: int


def _rationalize(q: np.ndarray) -> tuple:
    approx = []
    for v in q:
        a = Fraction(float(v)).limit_denominator(10**6)
        if a == 0 and v > 0:
            # keep the support: a zero here can create zero-evidence samples
            a = Fraction(float(v)).limit_denominator(10**15)
        approx.append(a)
    total = sum(approx)
    return tuple(v / total for v in approx)


def search_proper_prior(
    problem: FiniteProblem,
    marg: Marginal,
    n: int,
    budget: int,
    seed: int,
    value=None,
    start=None,
    cap: int | None = None,
) -> PriorSearchResult:
    """Derivative-free search for a prior minimizing the Bayesian worst case.

    Seeded multi-start plus pairwise mass-transfer refinement; the returned
    worst case is recomputed exactly for the rationalized best prior.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    size = problem.n_hypotheses
    table = BayesRiskTable(problem, marg, n, cap)
    rng = np.random.default_rng(seed)
    uniform = np.full(size, 1.0 / size)
    seeds = [uniform]
    if start is not None:
        s = np.array([float(v) for v in start])
        seeds.append(s)
        seeds.extend((1 - eta) * s + eta * uniform for eta in (0.5, 0.125, 1 / 32, 1 / 128))

    used = 0
    best_q, best_f = None, math.inf

    def evaluate(q):
        nonlocal used, best_q, best_f
        used += 1
        f = table.worst(q)
        if f < best_f:
            best_q, best_f = q.copy(), f
        return f

    for q in seeds:
        if used >= budget:
            break
        evaluate(q)
    current, current_f, step = best_q, best_f, 0.25
    while used < budget and size > 1:
        improved = False
        for i in range(size):
            for j in range(size):
                if i == j or used >= budget:
                    continue
                amount = min(step, current[i])
                if amount <= 0:
                    continue
                q = current.copy()
                q[i] -= amount
                q[j] += amount
                f = evaluate(q)
                if f < current_f:
                    current, current_f, improved = q, f, True
        if not improved:
            step /= 2
            if step < 1e-7:
                current = rng.dirichlet(np.ones(size))
                if used < budget:
                    current_f = evaluate(current)
                step = 0.25

    prior = _rationalize(best_q)
    try:
        worst = evaluate_worstcase(Bayesian(prior), marg, n, problem, cap=cap).max
    except ZeroEvidence:
        worst = math.inf
    return PriorSearchResult(prior, worst, _ratio(worst, value), used)
