"""Brute-force ground truth for the learning game on tiny instances.

Learners are enumerated explicitly as tables from realizable samples to
deterministic predictors; behavior on unrealizable samples never affects
expected error, so those samples are left out.  The full payoff matrix is
built in scaled integer arithmetic and its value found by an exact LP.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import BudgetExceeded
from .game import SolverConfig, solve_game
from .learners import Table
from .problem import FiniteProblem, Marginal, deterministic_predictor, realizable_samples, true_error
from .simplex import solve_lp


@dataclass(frozen=True)
class OracleBudget:
    max_learners: int = 10**6
    max_samples: int | None = None

    def __post_init__(self):
        if self.max_learners < 1 or (self.max_samples is not None and self.max_samples < 1):
            raise ValueError("oracle budgets must be positive")


def _predictor_rows(problem: FiniteProblem) -> list:
    return list(itertools.product(range(problem.n_labels), repeat=problem.n_points))


def learner_count(problem: FiniteProblem, marg: Marginal, n: int, budget: OracleBudget = OracleBudget()) -> int:
    r = len(realizable_samples(marg, n, problem, budget.max_samples))
    return (problem.n_labels**problem.n_points) ** r


def enumerate_deterministic_learners(problem: FiniteProblem, marg: Marginal, n: int, budget: OracleBudget = OracleBudget()):
    """Yield every deterministic table learner in lexicographic order."""
    samples = [s for s, _, _ in realizable_samples(marg, n, problem, budget.max_samples)]
    rows = _predictor_rows(problem)
    required = len(rows) ** len(samples)
    if required > budget.max_learners:
        raise BudgetExceeded(required, budget.max_learners)
    for choice in itertools.product(rows, repeat=len(samples)):
        yield Table.from_labels(dict(zip(samples, choice)), problem.n_labels)


@dataclass
class PayoffMatrix:
    """``matrix[h, j] / scale`` is the expected error of learner ``j`` against truth ``h``."""

    matrix: np.ndarray
    scale: int
    samples: list
    rows: list

    def learner(self, j: int, n_labels: int) -> Table:
        k = len(self.rows)
        digits = []
        for _ in self.samples:
            j, d = divmod(j, k)
            digits.append(d)
        digits.reverse()
        return Table.from_labels({s: self.rows[d] for s, d in zip(self.samples, digits)}, n_labels)

    def entry(self, h: int, j: int) -> Fraction:
        return Fraction(int(self.matrix[h, j]), self.scale)


def payoff_matrix(problem: FiniteProblem, marg: Marginal, n: int, budget: OracleBudget = OracleBudget()) -> PayoffMatrix:
    """Full truth-by-learner expected error matrix, columns in enumeration order.

    The expected error of a table learner is a sum over samples, so column
    ``j`` is the sum of one per-sample term for each digit of ``j``.
    """
    triples = realizable_samples(marg, n, problem, budget.max_samples)
    rows = _predictor_rows(problem)
    required = len(rows) ** len(triples)
    if required > budget.max_learners:
        raise BudgetExceeded(required, budget.max_learners)
    size = problem.n_hypotheses
    preds = [deterministic_predictor(r, problem.n_labels) for r in rows]
    errs = [[true_error(p, marg, h, problem) for p in preds] for h in range(size)]
    terms = [
        [[prob * errs[h][f] if h in cons else Fraction(0) for f in range(len(rows))] for _, prob, cons in triples]
        for h in range(size)
    ]
    scale = 1
    for block in terms:
        for row in block:
            for v in row:
                scale = math.lcm(scale, v.denominator)
    ints = np.array([[[int(v * scale) for v in row] for row in block] for block in terms], dtype=object)
    if int(ints.max(initial=0)) * max(len(triples), 1) >= 2**62:
        raise OverflowError("payoff matrix does not fit in 64-bit integers")
    ints = ints.astype(np.int64).reshape(size, len(triples), len(rows))
    matrix = np.zeros((size, 1), dtype=np.int64)
    for s in range(len(triples)):
        matrix = (matrix[:, :, None] + ints[:, s, None, :]).reshape(size, -1)
    return PayoffMatrix(matrix, scale, [t[0] for t in triples], rows)


@dataclass
class MatrixGameResult:
    value: Fraction
    adversary: tuple
    learner: dict  # column index -> probability
    dual_value: Fraction
    n_learners: int
    deterministic_minimax: Fraction
    cuts: int = 0
    payoff: PayoffMatrix = field(default=None, repr=False)


def _restricted_adversary_lp(m: np.ndarray, cols: list):
    size = m.shape[0]
    c = [0] * size + [1]
    A_ub = [[-int(m[h, j]) for h in range(size)] + [1] for j in cols]
    res = solve_lp(c, A_ub, [0] * len(cols), [[1] * size + [0]], [1])
    return res.value, res.x[:size]


def _restricted_learner_lp(m: np.ndarray, cols: list):
    size = m.shape[0]
    # variables: y_j for the active columns, then u; maximize -u
    c = [0] * len(cols) + [-1]
    A_ub = [[int(m[h, j]) for j in cols] + [-1] for h in range(size)]
    res = solve_lp(c, A_ub, [0] * size, [[1] * len(cols) + [0]], [1])
    return -res.value, res.x[: len(cols)]


def matrix_game_value(problem: FiniteProblem, marg: Marginal, n: int, budget: OracleBudget = OracleBudget()) -> MatrixGameResult:
    """Exact value of the full matrix game by exact LP with constraint generation.

    The restricted LP over a growing set of learner columns is re-solved
    until no column of the full matrix cuts off the adversary's strategy;
    the learner's LP on the final columns certifies the value from above.
    """
    pay = payoff_matrix(problem, marg, n, budget)
    m = pay.matrix
    size, total = m.shape
    fm = m.astype(float)
    bound = float(np.abs(fm).max(initial=0.0))
    margin = 1e-9 * bound * size + 1e-9
    cols = [int(np.argmin(fm.sum(axis=0)))]
    cuts = 0
    while True:
        cuts += 1
        v, lam = _restricted_adversary_lp(m, cols)
        scores = np.asarray([float(p) for p in lam]) @ fm
        lo = float(scores.min())
        cand = np.flatnonzero(scores <= lo + margin)
        exact = [(sum((lam[h] * int(m[h, j]) for h in range(size) if lam[h]), Fraction(0)), int(j)) for j in cand]
        exact.sort()
        if exact[0][0] >= v:
            break
        new = [j for s, j in exact if s < v and j not in cols][:8]
        cols.extend(new)
    u, y = _restricted_learner_lp(m, cols)
    learner = {j: p for j, p in zip(cols, y) if p}
    det = Fraction(int(m.max(axis=0).min()), pay.scale) if total else Fraction(0)
    return MatrixGameResult(
        value=v / pay.scale,
        adversary=tuple(lam),
        learner=learner,
        dual_value=u / pay.scale,
        n_learners=total,
        deterministic_minimax=det,
        cuts=cuts,
        payoff=pay,
    )


@dataclass
class CrossCheckReport:
    checks: list  # (name, passed, detail)
    game_value: Fraction
    oracle_value: Fraction
    deterministic_minimax: Fraction

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)


def cross_check(problem: FiniteProblem, marg: Marginal, n: int, budget: OracleBudget = OracleBudget()) -> CrossCheckReport:
    sol = solve_game(problem, marg, n, SolverConfig())
    res = matrix_game_value(problem, marg, n, budget)
    pay = res.payoff
    learner_rows = [
        sum((p * pay.entry(h, j) for j, p in res.learner.items()), Fraction(0)) for h in range(problem.n_hypotheses)
    ]
    checks = [
        ("oracle_equals_solver", res.value == sol.value, f"{res.value} vs {sol.value}"),
        ("lp_duality", res.value == res.dual_value == max(learner_rows), f"{res.value} vs {res.dual_value}"),
        (
            "deterministic_not_below_value",
            res.deterministic_minimax >= res.value,
            f"deterministic {res.deterministic_minimax}, mixed {res.value}",
        ),
        (
            "learner_count",
            res.n_learners == learner_count(problem, marg, n, budget),
            f"{res.n_learners} learners",
        ),
    ]
    return CrossCheckReport(checks, sol.value, res.value, res.deterministic_minimax)
