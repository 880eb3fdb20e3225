import random
from fractions import Fraction as F

import numpy as np
import pytest

from properlab.errors import IterationCapExceeded
from properlab.game import (
    EXACT,
    MW,
    BayesRiskTable,
    SolverConfig,
    best_response,
    build_proper_learner,
    evaluate_worstcase,
    game_blocks,
    adversary_payoff,
    search_proper_prior,
    solve_game,
)
from properlab.learners import Bayesian, Constant, Table, expected_error_exact
from properlab.problem import Marginal, realizable_samples

HALF = (F(1, 2), F(1, 2))


def test_best_response_examples(p1, uniform2, skewed):
    value, table = best_response((1, 0), uniform2, 1, p1)
    assert value == 0
    assert all(row == ((1, 0), (1, 0)) for row in table.mapping.values())
    assert best_response(HALF, uniform2, 1, p1)[0] == F(1, 8)
    assert best_response(HALF, skewed, 1, p1)[0] == F(2, 25)


def test_solve_game_examples(p1, uniform2, skewed, single):
    sol = solve_game(p1, uniform2, 1)
    assert (sol.value, sol.adversary_prior, sol.duality_gap) == (F(1, 8), HALF, 0)
    sol = solve_game(p1, skewed, 1, marginal_id="skewed")
    assert (sol.value, sol.adversary_prior, sol.marginal_id) == (F(2, 25), HALF, "skewed")
    sol = solve_game(single, Marginal.uniform(3), 2)
    assert sol.value == 0 and sol.adversary_prior == (1,)


def test_closed_form_payoff(p1, uniform2):
    # on P1 the adversary payoff is min(l1, l2) / 4
    blocks = game_blocks(p1, uniform2, 1)
    for a in range(11):
        lam = (F(a, 10), F(10 - a, 10))
        assert adversary_payoff(blocks, lam) == min(lam) / 4


def test_multiplicative_weights(p1, skewed):
    sol = solve_game(p1, skewed, 1, SolverConfig(method=MW, tolerance=1e-6))
    assert sol.method == MW and sol.converged
    assert sol.duality_gap <= 1e-6
    assert abs(sol.value - 0.08) <= 1e-6


def test_iteration_cap(corpus):
    inst = corpus[2]
    with pytest.raises(IterationCapExceeded) as err:
        solve_game(inst.problem, inst.marginal, inst.n, SolverConfig(method=MW, tolerance=1e-12, iteration_cap=5))
    assert not err.value.solution.converged and err.value.solution.duality_gap > 1e-12


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(method="simplex")
    with pytest.raises(ValueError):
        SolverConfig(tolerance=0)
    assert SolverConfig().tol == 1e-9 and SolverConfig(method=MW).tol == 1e-6


def test_build_proper_learner(p1, uniform2, single):
    assert build_proper_learner(solve_game(p1, uniform2, 1)) == Bayesian(HALF)
    learner = build_proper_learner(solve_game(single, Marginal.uniform(3), 1))
    assert isinstance(learner, Bayesian) and learner.prior == (1,)


def test_evaluate_worstcase(p1, uniform2):
    wc = evaluate_worstcase(Bayesian(HALF), uniform2, 1, p1, value=F(1, 8))
    assert (wc.errors, wc.max, wc.ratio) == ((F(1, 8), F(1, 8)), F(1, 8), 1)
    wc = evaluate_worstcase(Constant(0), uniform2, 1, p1)
    assert (wc.errors, wc.max) == ((0, F(1, 2)), F(1, 2))
    # all mass on the separating point: every sample pins the truth
    wc = evaluate_worstcase(Bayesian(HALF), Marginal((0, 1)), 1, p1, value=0)
    assert wc.max == 0 and wc.ratio == 1


def test_search_proper_prior(p1, uniform2, single):
    res = search_proper_prior(p1, uniform2, 1, budget=100, seed=0, value=F(1, 8))
    assert res.ratio == 1 and res.worst == F(1, 8)
    res = search_proper_prior(single, Marginal.uniform(3), 1, budget=5, seed=0, value=0)
    assert res.ratio == 1
    a = search_proper_prior(p1, uniform2, 1, budget=1, seed=3)
    b = search_proper_prior(p1, uniform2, 1, budget=1, seed=3)
    assert a == b and a.evaluations == 1


def test_risk_table_matches_exact(corpus):
    rng = np.random.default_rng(11)
    for inst in corpus[:15]:
        size = inst.problem.n_hypotheses
        table = BayesRiskTable(inst.problem, inst.marginal, inst.n)
        prior = tuple(F(int(k), 100) for k in rng.multinomial(100 - size, np.ones(size) / size) + 1)
        exact = [float(expected_error_exact(Bayesian(prior), inst.marginal, t, inst.n, inst.problem)) for t in range(size)]
        assert np.allclose(table.errors(prior), exact, atol=1e-12)


def _random_prior(rng, size):
    w = [rng.randint(0, 9) for _ in range(size)]
    if sum(w) == 0:
        w[0] = 1
    return tuple(F(v, sum(w)) for v in w)


def test_concavity(corpus):
    rng = random.Random(3)
    for k in range(100):
        inst = corpus[k % len(corpus)]
        blocks = game_blocks(inst.problem, inst.marginal, inst.n)
        a = _random_prior(rng, inst.problem.n_hypotheses)
        b = _random_prior(rng, inst.problem.n_hypotheses)
        mid = tuple((x + y) / 2 for x, y in zip(a, b))
        assert adversary_payoff(blocks, mid) >= (adversary_payoff(blocks, a) + adversary_payoff(blocks, b)) / 2


def test_best_response_dominance(corpus):
    rng = random.Random(4)
    for inst in corpus[:10]:
        prob, marg, n = inst.problem, inst.marginal, inst.n
        prior = _random_prior(rng, prob.n_hypotheses)
        value, _ = best_response(prior, marg, n, prob)
        samples = [s for s, _, _ in realizable_samples(marg, n, prob)]
        for _ in range(20):
            rows = {s: tuple(rng.randrange(prob.n_labels) for _ in range(prob.n_points)) for s in samples}
            table = Table.from_labels(rows, prob.n_labels)
            avg = sum(
                (lam * expected_error_exact(table, marg, t, n, prob) for t, lam in enumerate(prior) if lam), F(0)
            )
            assert value <= avg


def test_exact_and_mw_agree_on_corpus(corpus):
    for inst in corpus:
        exact = solve_game(inst.problem, inst.marginal, inst.n)
        assert exact.method == EXACT and exact.duality_gap == 0 and 0 <= exact.value <= 1
        mw = solve_game(inst.problem, inst.marginal, inst.n, SolverConfig(method=MW))
        assert abs(mw.value - float(exact.value)) <= 1e-6
