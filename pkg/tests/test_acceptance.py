"""Acceptance criteria 1-9; each test prints one PASS/FAIL line."""

import math
import random
from fractions import Fraction as F

import pytest

from properlab.bayes import distributional_srm, evidence, mix_bayesians_compare, posterior, total_variation
from properlab.certify import CertifyOptions, _factor_e_row, proper_witness, reduction_learner
from properlab.cli import run_corpus
from properlab.corpus import CorpusSpec
from properlab.game import MW, SolverConfig, best_response, evaluate_worstcase, solve_game
from properlab.learners import Bayesian, Table
from properlab.oracle import OracleBudget, learner_count, matrix_game_value
from properlab.problem import Marginal, realizable_samples
from properlab.reductions import (
    SampleComplexityQuery,
    avoidance_probability,
    classic_bracket,
    confidence_boost,
    game_values,
    loo_bound_check,
    properization_bound_check,
    sample_complexity_df,
)


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'} {title}: {detail}")
        assert ok, detail

    return emit


def _random_prior(rng, size):
    w = [rng.randint(1, 12) for _ in range(size)]
    return tuple(F(v, sum(w)) for v in w)


def test_1_game_value_matches_oracle(corpus, report):
    budget = OracleBudget(max_learners=10**6)
    exact_ok = mw_ok = total = 0
    worst_mw = 0.0
    for inst in corpus:
        if learner_count(inst.problem, inst.marginal, inst.n, budget) > budget.max_learners:
            continue
        total += 1
        oracle = matrix_game_value(inst.problem, inst.marginal, inst.n, budget).value
        exact = solve_game(inst.problem, inst.marginal, inst.n).value
        mw = solve_game(inst.problem, inst.marginal, inst.n, SolverConfig(method=MW, tolerance=1e-6)).value
        exact_ok += exact == oracle
        diff = abs(mw - float(oracle))
        worst_mw = max(worst_mw, diff)
        mw_ok += diff <= 1e-6
    ok = total > 0 and exact_ok == mw_ok == total
    report(1, "game value vs oracle", ok, f"{exact_ok}/{total} exact equal, {mw_ok}/{total} MW within 1e-6 (max {worst_mw:.2e})")


def test_2_factor_two(corpus, p1, uniform2, report):
    p1_sol = solve_game(p1, uniform2, 1)
    wc = evaluate_worstcase(Bayesian(p1_sol.adversary_prior), uniform2, 1, p1, value=p1_sol.value)
    fixture_ok = p1_sol.value == F(1, 8) and wc.ratio == 1
    worst_ratio, passed, witnesses = F(0), 0, {"bayes_prior": 0, "prior_search": 0}
    for inst in corpus:
        sol = solve_game(inst.problem, inst.marginal, inst.n)
        kind, _, worst = proper_witness(inst.problem, inst.marginal, inst.n, sol.value, sol.adversary_prior, CertifyOptions())
        witnesses[kind] += 1
        passed += worst <= 2 * sol.value + F(1, 10**9)
        if sol.value:
            worst_ratio = max(worst_ratio, worst / sol.value)
    ok = fixture_ok and passed == len(corpus)
    detail = f"P1 value {p1_sol.value} ratio {wc.ratio}; {passed}/{len(corpus)} within 2x, max ratio {float(worst_ratio):.4f}, witnesses {witnesses}"
    report(2, "proper learner within factor 2", ok, detail)


def test_3_srm_equals_posterior(corpus, report):
    rng = random.Random(21)
    pairs = exact_ok = 0
    for inst in corpus:
        size = inst.problem.n_hypotheses
        sol = solve_game(inst.problem, inst.marginal, inst.n)
        priors = [tuple(F(1, size) for _ in range(size)), sol.adversary_prior, _random_prior(rng, size)]
        for prior in priors:
            for sample, _, _ in realizable_samples(inst.marginal, inst.n, inst.problem):
                if evidence(prior, sample, inst.problem) == 0:
                    continue
                pairs += 1
                exact_ok += distributional_srm(prior, sample, inst.problem) == posterior(prior, sample, inst.problem)
    worst_tv, numeric = 0.0, 0
    while numeric < 500:
        inst = corpus[rng.randrange(len(corpus))]
        prior = _random_prior(rng, inst.problem.n_hypotheses)
        truth = rng.randrange(inst.problem.n_hypotheses)
        points = [rng.choice(inst.marginal.support) for _ in range(rng.randint(0, 3))]
        sample = inst.problem.label_sample(points, truth)
        approx = distributional_srm(prior, sample, inst.problem, mode="numeric")
        exact = posterior(prior, sample, inst.problem)
        worst_tv = max(worst_tv, float(total_variation(approx, [float(v) for v in exact])))
        numeric += 1
    ok = exact_ok == pairs and worst_tv <= 1e-8
    report(3, "distributional SRM equals posterior", ok, f"{exact_ok}/{pairs} exact pairs, numeric max TV {worst_tv:.2e} over {numeric}")


def test_4_properization_pointwise(corpus, report):
    rng = random.Random(8)
    checked, violations, worst = 0, 0, F(0)
    for inst in corpus:
        prob, marg, n = inst.problem, inst.marginal, inst.n
        sol = solve_game(prob, marg, n)
        _, br = best_response(sol.adversary_prior, marg, n, prob)
        samples = [s for s, _, _ in realizable_samples(marg, n, prob)]
        rand = Table.from_labels(
            {s: tuple(rng.randrange(prob.n_labels) for _ in range(prob.n_points)) for s in samples}, prob.n_labels
        )
        for inner in (br, rand):
            rep = properization_bound_check(inner, marg, n, prob)
            checked += rep.checked
            violations += len(rep.violations)
            worst = max(worst, rep.max_ratio)
    ok = violations == 0 and worst <= 2
    report(4, "properization at most doubles error", ok, f"{checked} (truth, sample) cases, max ratio {worst}, {violations} violations")


def test_5_appendix_chain(corpus, report):
    identity_cases = identity_ok = bound_ok = 0
    for inst in corpus:
        size = inst.problem.n_hypotheses
        learners = [Bayesian(tuple(F(1, size) for _ in range(size)))]
        sol = solve_game(inst.problem, inst.marginal, inst.n)
        learners.append(reduction_learner(Bayesian(sol.adversary_prior)))
        for learner in learners:
            for truth in range(size):
                rep = loo_bound_check(learner, inst.marginal, truth, inst.n, inst.problem)
                identity_cases += 1
                identity_ok += rep.identity_holds
                bound_ok += rep.bound_holds
    a_ok = identity_ok == bound_ok == identity_cases

    rows = []
    for inst in corpus:
        sol = solve_game(inst.problem, inst.marginal, inst.n)
        learner = reduction_learner(Bayesian(sol.adversary_prior))
        rows.append(_factor_e_row(learner, inst.problem, Marginal.uniform(inst.problem.n_points), CertifyOptions()))
    b_ok = all(r.verdict == "pass" for r in rows)
    max_ratio = max(r.ratio for r in rows)

    prev = avoidance_probability(2)
    c_ok = prev == F(1, 2)
    for m in range(3, 10**4 + 1):
        cur = avoidance_probability(m)
        c_ok = c_ok and cur <= prev and float(cur) >= 1 / math.e
        prev = cur
    c_ok = c_ok and float(avoidance_probability(2)) >= 1 / math.e
    detail = (
        f"(a) LOO identity {identity_ok}/{identity_cases}, bound {bound_ok}/{identity_cases}; "
        f"(b) factor-e {sum(r.verdict == 'pass' for r in rows)}/{len(rows)} instances, max ratio {float(max_ratio):.4f}; "
        f"(c) f(m) monotone and >= 1/e on [2, 10^4]: {c_ok}"
    )
    report(5, "leave-one-out and factor-e chain", a_ok and b_ok and c_ok, detail)


def test_6_df_below_classic(corpus, p1, uniform2, skewed, report):
    p1_ok = sample_complexity_df(p1, uniform2, SampleComplexityQuery(F(1, 8))) == 1
    p1_ok = p1_ok and classic_bracket(p1, [uniform2, skewed], SampleComplexityQuery(F(1, 8), model="classic")).lower == 1
    rng = random.Random(13)
    cases = ok_cases = 0
    for inst in corpus[:20]:
        k = inst.problem.n_points
        grid = [Marginal.uniform(k), inst.marginal, Marginal(_random_prior(rng, k))]
        values = [game_values(inst.problem, m, 3) for m in grid]
        for eps in (F(1, 20), F(1, 8), F(1, 4)):
            q = SampleComplexityQuery(eps, model="classic")
            lower = classic_bracket(inst.problem, grid, q).lower
            for m, vals in zip(grid, values):
                df = sample_complexity_df(inst.problem, m, SampleComplexityQuery(eps, n_max=3), values=vals)
                cases += 1
                # None means "above n_max", which is only below an also-None lower bound
                ok_cases += lower is None or (df is not None and df <= lower)
    ok = p1_ok and ok_cases == cases
    report(6, "DF complexity below classic grid bound", ok, f"P1 gives 1: {p1_ok}; {ok_cases}/{cases} grid checks")


def test_7_mixture_probe(corpus, three, report):
    rng = random.Random(17)
    equal_cases = equal_ok = 0
    for inst in corpus:
        prob, size = inst.problem, inst.problem.n_hypotheses
        for sample, _, cons in realizable_samples(inst.marginal, inst.n, prob):
            q1 = _random_prior(rng, size)
            raw = _random_prior(rng, size)
            inside = sum(raw[h] for h in cons)
            target = sum(q1[h] for h in cons)
            if len(cons) == size:
                q2 = raw
            else:
                # rescale inside and outside the consistent set to match q1's evidence
                outside = 1 - inside
                q2 = tuple(raw[h] * (target / inside if h in cons else (1 - target) / outside) for h in range(size))
            rep = mix_bayesians_compare([q1, q2], [F(1, 3), F(2, 3)], sample, prob)
            assert rep.equal_evidence
            equal_cases += 1
            equal_ok += rep.verdict == "equal"
    fixture = mix_bayesians_compare(
        [(F(1, 3),) * 3, (F(1, 10), F(3, 10), F(3, 5))], [F(1, 2), F(1, 2)], ((0, 0),), three
    )
    fixture_ok = fixture.verdict == "unequal" and fixture.distance == F(1, 32)
    ok = equal_ok == equal_cases and fixture_ok
    report(7, "mixture identity probe", ok, f"{equal_ok}/{equal_cases} equal-evidence cases equal; fixture distance {fixture.distance}")


def test_8_confidence_boost(p1, uniform2, report):
    bayes = Bayesian((F(1, 2), F(1, 2)))
    eps = F(1, 4)
    one = confidence_boost(bayes, 1, 20, uniform2, 0, 1, 10**4, 2024, p1, eps)
    five = confidence_boost(bayes, 5, 20, uniform2, 0, 1, 10**4, 2025, p1, eps)
    sigma = math.hypot(one.std_error, five.std_error)
    ok = five.failure_rate + 3 * sigma < one.failure_rate
    report(8, "confidence boost lowers failure rate", ok, f"k=1 rate {one.failure_rate:.4f}, k=5 rate {five.failure_rate:.4f}, 3 sigma {3 * sigma:.4f}")


def test_9_reproducible_corpus(tmp_path, report):
    spec = CorpusSpec(count=10, seed=7)
    run_corpus(spec, tmp_path / "first", CertifyOptions())
    run_corpus(spec, tmp_path / "second", CertifyOptions(), jobs=2)
    first = sorted(p.relative_to(tmp_path / "first") for p in (tmp_path / "first").rglob("*") if p.is_file())
    second = sorted(p.relative_to(tmp_path / "second") for p in (tmp_path / "second").rglob("*") if p.is_file())
    same = first == second and all(
        (tmp_path / "first" / rel).read_bytes() == (tmp_path / "second" / rel).read_bytes() for rel in first
    )
    report(9, "byte-identical corpus reruns", same and len(first) == 31, f"{len(first)} files compared")
