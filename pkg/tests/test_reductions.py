import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from properlab.errors import EnumerationCapExceeded
from properlab.learners import Bayesian, Constant, Table
from properlab.problem import Marginal, validate_problem
from properlab.reductions import (
    SampleComplexityQuery,
    TransductiveInstance,
    avoidance_probability,
    classic_bracket,
    confidence_boost,
    df_to_transductive,
    factor_e_check,
    game_values,
    loo_bound_check,
    properization_bound_check,
    sample_complexity_df,
    transductive_error,
)

HALF = (F(1, 2), F(1, 2))
BAYES = Bayesian(HALF)
INST = TransductiveInstance((0, 1), truth=1)


def test_properization_examples(p1, uniform2):
    rep = properization_bound_check(Constant(1), uniform2, 1, p1)
    assert rep.holds and rep.max_ratio == 1
    improper = Table.from_labels({((0, 0),): (1, 1), ((1, 0),): (1, 1), ((1, 1),): (1, 1)}, 2)
    rep = properization_bound_check(improper, uniform2, 1, p1)
    assert rep.holds and rep.max_ratio <= 2


def test_transductive_instance_checks(p1):
    with pytest.raises(ValueError):
        TransductiveInstance((0,), 0)
    with pytest.raises(IndexError):
        transductive_error(BAYES, TransductiveInstance((0, 5), 0), p1)


def test_transductive_examples(p1):
    assert transductive_error(Constant(1), INST, p1) == 0
    table = Table.from_labels({((1, 1),): (0, 1), ((0, 0),): (0, 0)}, 2)
    assert transductive_error(table, INST, p1) == F(1, 2)
    assert transductive_error(BAYES, INST, p1) == F(1, 4)


def test_loo_examples(p1, uniform2):
    rep = loo_bound_check(Constant(0), uniform2, 0, 1, p1)
    assert rep.expected_error == rep.transductive_max == 0
    rep = loo_bound_check(BAYES, uniform2, 0, 1, p1)
    assert rep.expected_error == F(1, 8) == rep.leave_one_out
    assert rep.bound_holds and rep.transductive_max >= F(1, 8)


def test_df_to_transductive_examples(p1):
    assert df_to_transductive(Constant(1), INST, p1) == 0
    assert df_to_transductive(BAYES, INST, p1) == F(1, 4)
    rep = factor_e_check(BAYES, INST, p1)
    assert rep.transductive == F(1, 4) and rep.expected_error == F(1, 8)
    assert rep.holds() and rep.bound >= 0.25
    # a repeated point is answered from the training data
    assert df_to_transductive(BAYES, TransductiveInstance((1, 1), 0), p1) == 0


def test_df_to_transductive_mc(p1, three):
    inst = TransductiveInstance((0, 1, 1, 0, 1), 1)
    prior = (F(1, 3),) * 3
    exact = df_to_transductive(Bayesian(prior), TransductiveInstance((0, 1, 0), 2), three)
    mc = df_to_transductive(Bayesian(prior), TransductiveInstance((0, 1, 0), 2), three, "mc", trials=4000, seed=1)
    assert abs(mc - float(exact)) < 0.03
    assert df_to_transductive(BAYES, inst, p1, "mc", 50, 2) == df_to_transductive(BAYES, inst, p1, "mc", 50, 2)
    with pytest.raises(EnumerationCapExceeded):
        df_to_transductive(BAYES, TransductiveInstance((0,) * 9, 0), p1, cap=100)


def test_avoidance_probability():
    assert avoidance_probability(2) == F(1, 2)
    assert avoidance_probability(3) == F(4, 9)
    assert avoidance_probability(7) == F(6**6, 7**6)
    assert abs(float(avoidance_probability(10**5)) - 1 / math.e) < 1e-5
    with pytest.raises(ValueError):
        avoidance_probability(1)


@pytest.mark.slow
def test_avoidance_probability_large():
    assert abs(float(avoidance_probability(10**6)) - 1 / math.e) <= 1e-6


@given(st.integers(2, 3000))
@settings(max_examples=60, deadline=None)
def test_avoidance_monotone(m):
    f, g = avoidance_probability(m), avoidance_probability(m + 1)
    assert g <= f and float(g) >= 1 / math.e


def test_confidence_boost(p1, uniform2):
    rep = confidence_boost(Constant(0), 3, 5, uniform2, 0, 1, 200, 0, p1, F(1, 100))
    assert rep.failures == 0
    single = confidence_boost(BAYES, 1, 0, uniform2, 0, 1, 4000, 5, p1, F(1, 4))
    assert abs(single.failure_rate - 0.25) < 0.03
    again = confidence_boost(BAYES, 1, 0, uniform2, 0, 1, 4000, 5, p1, F(1, 4))
    assert again == single
    # at epsilon 1/2 no copy can fail: the largest possible error is 1/2
    assert confidence_boost(BAYES, 5, 10, uniform2, 0, 1, 500, 1, p1, F(1, 2)).failures == 0
    with pytest.raises(ValueError):
        confidence_boost(BAYES, 0, 1, uniform2, 0, 1, 10, 0, p1, F(1, 4))


def test_sample_complexity(p1, uniform2, skewed, single):
    assert sample_complexity_df(single, Marginal.uniform(3), SampleComplexityQuery(F(1, 10))) == 1
    assert sample_complexity_df(p1, uniform2, SampleComplexityQuery(F(1, 8))) == 1
    assert sample_complexity_df(p1, uniform2, SampleComplexityQuery(F(1, 100), n_max=3)) is None
    # P1 values halve with every extra point: 1/8, 1/16, 1/32
    assert game_values(p1, uniform2, 3) == (F(1, 8), F(1, 16), F(1, 32))
    assert sample_complexity_df(p1, uniform2, SampleComplexityQuery(F(1, 20), n_max=3)) == 3
    with pytest.raises(ValueError):
        SampleComplexityQuery(F(1))
    with pytest.raises(ValueError):
        sample_complexity_df(p1, uniform2, SampleComplexityQuery(F(1, 8), model="classic"))


def test_non_monotone_values_use_the_whole_window(p1, uniform2):
    q = SampleComplexityQuery(F(1, 8), n_max=3)
    assert sample_complexity_df(p1, uniform2, q, values=(F(1, 10), F(1, 4), F(1, 10))) == 3
    assert sample_complexity_df(p1, uniform2, q, values=(F(1, 10), F(1, 10), F(1, 4))) is None


def test_classic_bracket(p1, uniform2, skewed):
    q = SampleComplexityQuery(F(1, 8), model="classic")
    assert classic_bracket(p1, [uniform2], q).lower == 1
    br = classic_bracket(p1, [uniform2, skewed], q)
    assert br.lower == 1
    assert br.upper_witness is None or br.upper_witness >= br.lower
    with pytest.raises(ValueError):
        classic_bracket(p1, [], q)


def test_factor_e_on_small_problem():
    prob = validate_problem(
        {"domain": 3, "labels": ["0", "1"], "hypotheses": [["0", "0", "0"], ["0", "1", "1"], ["1", "1", "0"]], "loss": "zero_one"}
    )
    learner = Bayesian((F(1, 2), F(1, 3), F(1, 6)))
    for points in [(0, 1, 2), (0, 0, 2), (1, 2, 2, 0)]:
        for truth in range(3):
            assert factor_e_check(learner, TransductiveInstance(points, truth), prob).holds()
