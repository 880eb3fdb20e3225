from fractions import Fraction as F
from pathlib import Path

import pytest

from properlab.corpus import CorpusSpec, generate_corpus
from properlab.problem import Marginal, validate_problem

DATA = Path(__file__).parent / "data"


def p1_raw():
    return {
        "domain": ["x1", "x2"],
        "labels": ["0", "1"],
        "hypotheses": [["0", "0"], ["0", "1"]],
        "loss": "zero_one",
        "marginals": {"skewed": ["4/5", "1/5"]},
    }


@pytest.fixture
def p1():
    return validate_problem(p1_raw())


@pytest.fixture
def uniform2():
    return Marginal.uniform(2)


@pytest.fixture
def skewed():
    return Marginal((F(4, 5), F(1, 5)))


@pytest.fixture
def three():
    # x1 keeps h1, h2 and drops h3; x2 separates h1 from h2
    return validate_problem(
        {
            "domain": ["x1", "x2"],
            "labels": ["0", "1"],
            "hypotheses": [["0", "0"], ["0", "1"], ["1", "1"]],
            "loss": "zero_one",
        }
    )


@pytest.fixture
def single():
    return validate_problem({"domain": 3, "labels": ["0", "1"], "hypotheses": [["0", "1", "0"]], "loss": "zero_one"})


@pytest.fixture(scope="session")
def corpus():
    return generate_corpus(CorpusSpec())


@pytest.fixture
def data_dir():
    return DATA
