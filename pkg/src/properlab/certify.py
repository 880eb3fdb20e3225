"""Per-instance certification: one report row per checked property.

Mandatory rows end in ``pass``, ``fail`` or ``skip``.  Observation rows
(mixture identity, monotonicity of the value in ``n``) carry a descriptive
verdict instead and never fail a run.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .bayes import mix_bayesians_compare
from .errors import BudgetExceeded, ZeroEvidence
from .game import (
    EXACT,
    GameSolution,
    SolverConfig,
    best_response,
    evaluate_worstcase,
    search_proper_prior,
    solve_game,
)
from .learners import Bayesian, expected_error_exact
from .oracle import OracleBudget, cross_check, learner_count
from .problem import FiniteProblem, Marginal, enumerate_weighted_samples, fraction_str
from .reductions import (
    TransductiveInstance,
    df_to_transductive,
    loo_bound_check,
    properization_bound_check,
)

PASS, FAIL, SKIP = "pass", "fail", "skip"
OBSERVATIONS = ("equal", "unequal", "monotone", "nonmonotone")
FIELDS = ("instance", "quantity", "lhs", "rhs", "ratio", "verdict")
# factor-e checks enumerate every multiset of up to this many points
FACTOR_E_MAX_M = 3
FACTOR2_SLACK = Fraction(1, 10**9)
FACTOR_E_SLACK = 1e-12


@dataclass(frozen=True)
class Row:
    quantity: str
    lhs: object
    rhs: object
    ratio: object
    verdict: str


@dataclass(frozen=True)
class CertifyOptions:
    budget: int = 300
    seed: int = 0
    max_learners: int = 10**6
    cap: int | None = None


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, Fraction):
        return fraction_str(v)
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return repr(float(v))


def ratio(num, den):
    if den == 0:
        return Fraction(1) if num == 0 else math.inf
    return num / den


def _verdict(ok: bool) -> str:
    return PASS if ok else FAIL


def _value_rows(problem, sol, marg, exact) -> list:
    rows = []
    if sol.method == EXACT:
        rows.append(Row("game_value", sol.value, exact.value, None, _verdict(sol.value == exact.value)))
        rows.append(Row("duality_gap", sol.duality_gap, Fraction(0), None, _verdict(sol.duality_gap == 0)))
    else:
        diff = abs(float(sol.value) - float(exact.value))
        tol = float(sol.duality_gap) + 1e-12
        rows.append(Row("game_value", sol.value, exact.value, None, _verdict(diff <= tol)))
        rows.append(Row("duality_gap", sol.duality_gap, None, None, _verdict(sol.converged)))
    return rows


def proper_witness(problem, marg, n, value, prior, opts: CertifyOptions):
    """A positive-evidence Bayesian learner within factor 2 of the value, if one is found.

    Tries the adversary's optimal prior first and falls back to prior search
    when that prior has zero-evidence samples or misses the factor.
    """
    try:
        worst = evaluate_worstcase(Bayesian(prior), marg, n, problem, cap=opts.cap).max
        if worst <= 2 * value:
            return "bayes_prior", Bayesian(prior), worst
    except ZeroEvidence:
        worst = math.inf
    found = search_proper_prior(problem, marg, n, opts.budget, opts.seed, value=value, start=prior, cap=opts.cap)
    if found.worst < worst:
        return "prior_search", Bayesian(found.prior), found.worst
    return "bayes_prior", Bayesian(prior), worst


def reduction_learner(learner: Bayesian) -> Bayesian:
    """Full-support Bayesian used by the reduction checks.

    Transductive resamples can be consistent only with hypotheses outside a
    sparse prior's support, so zero entries are smoothed toward uniform.
    """
    prior = learner.prior
    if all(p > 0 for p in prior):
        return learner
    size = len(prior)
    return Bayesian(tuple((p + Fraction(1, size)) / 2 for p in prior))


def _oracle_rows(problem, marg, n, opts) -> list:
    budget = OracleBudget(max_learners=opts.max_learners)
    try:
        count = learner_count(problem, marg, n, budget)
        if count > budget.max_learners:
            raise BudgetExceeded(count, budget.max_learners)
        report = cross_check(problem, marg, n, budget)
    except (BudgetExceeded, OverflowError):
        return [Row("oracle", None, None, None, SKIP)]
    rows = []
    for name, ok, _ in report.checks:
        if name == "oracle_equals_solver":
            rows.append(Row(f"oracle:{name}", report.oracle_value, report.game_value, None, _verdict(ok)))
        elif name == "deterministic_not_below_value":
            rows.append(
                Row(f"oracle:{name}", report.deterministic_minimax, report.oracle_value, None, _verdict(ok))
            )
        else:
            rows.append(Row(f"oracle:{name}", None, None, None, _verdict(ok)))
    return rows


def _factor_e_row(learner, problem, marg, opts) -> Row:
    """Worst slack of the factor-e bound; the ratio column is the largest ratio seen."""
    support = marg.support
    worst, top = None, None
    for m in range(2, FACTOR_E_MAX_M + 1):
        # B's transductive error does not depend on the order of the points
        for points in itertools.combinations_with_replacement(support, m):
            for truth in range(problem.n_hypotheses):
                inst = TransductiveInstance(points, truth)
                lhs = df_to_transductive(learner, inst, problem, "exact", cap=opts.cap)
                base = expected_error_exact(
                    learner, Marginal.empirical(points, problem.n_points), truth, m - 1, problem, opts.cap
                )
                slack = float(lhs) - math.e * float(base)
                if worst is None or slack > worst[0]:
                    worst = (slack, lhs, base)
                r = ratio(lhs, base)
                if top is None or r > top:
                    top = r
    if worst is None:
        return Row("factor_e", None, None, None, SKIP)
    slack, lhs, base = worst
    return Row("factor_e", lhs, math.e * float(base), top, _verdict(slack <= FACTOR_E_SLACK))


def certify(problem: FiniteProblem, sol: GameSolution, marg: Marginal, opts: CertifyOptions = CertifyOptions()) -> list:
    n = sol.n
    cfg = SolverConfig(cap=opts.cap)
    exact = solve_game(problem, marg, n, cfg, sol.marginal_id)
    value = exact.value
    prior = exact.adversary_prior
    rows = _value_rows(problem, sol, marg, exact)

    witness, learner, worst = proper_witness(problem, marg, n, value, prior, opts)
    rows.append(
        Row(f"factor2:{witness}", worst, 2 * value, ratio(worst, value), _verdict(worst <= 2 * value + FACTOR2_SLACK))
    )
    rows.extend(_oracle_rows(problem, marg, n, opts))

    _, table = best_response(prior, marg, n, problem, opts.cap)
    prop = properization_bound_check(table, marg, n, problem, opts.cap)
    rows.append(Row("properization", prop.max_ratio, Fraction(2), None, _verdict(prop.holds)))

    if isinstance(worst, Fraction):
        learner = reduction_learner(learner)
        for truth in range(problem.n_hypotheses):
            loo = loo_bound_check(learner, marg, truth, n, problem, opts.cap)
            rows.append(
                Row(f"loo_identity:h{truth}", loo.expected_error, loo.leave_one_out, None, _verdict(loo.identity_holds))
            )
            rows.append(
                Row(
                    f"loo_bound:h{truth}",
                    loo.expected_error,
                    loo.transductive_max,
                    ratio(loo.expected_error, loo.transductive_max),
                    _verdict(loo.bound_holds),
                )
            )
        rows.append(_factor_e_row(learner, problem, marg, opts))
    else:
        learner = reduction_learner(Bayesian(tuple(Fraction(p) for p in prior)))
        rows.append(Row("loo", None, None, None, SKIP))
        rows.append(Row("factor_e", None, None, None, SKIP))

    rows.extend(_observation_rows(problem, marg, n, value, learner, cfg, opts))
    return rows


def _observation_rows(problem, marg, n, value, learner, cfg, opts) -> list:
    rows = []
    size = problem.n_hypotheses
    uniform = tuple(Fraction(1, size) for _ in range(size))
    sample = enumerate_weighted_samples(marg, 0, n, problem, opts.cap)[0][0]
    try:
        mix = mix_bayesians_compare([learner.prior, uniform], [Fraction(1, 2), Fraction(1, 2)], sample, problem)
        rows.append(Row("mixture", mix.distance, Fraction(0), None, mix.verdict))
    except ZeroEvidence:
        rows.append(Row("mixture", None, None, None, SKIP))
    following = solve_game(problem, marg, n + 1, cfg).value
    rows.append(Row("value_monotone", following, value, None, "monotone" if following <= value else "nonmonotone"))
    return rows


def rows_failed(rows) -> list:
    return [r for r in rows if r.verdict == FAIL]


def rows_to_csv(instance: str, rows, header: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header:
        writer.writerow(FIELDS)
    for r in rows:
        writer.writerow([instance, r.quantity, fmt(r.lhs), fmt(r.rhs), fmt(r.ratio), r.verdict])
    return buf.getvalue()
