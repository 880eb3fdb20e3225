"""Exact tools for proper learning on finite realizable problems."""

from .errors import ProperLabError
from .game import GameSolution, SolverConfig, build_proper_learner, evaluate_worstcase, solve_game
from .learners import Bayesian, Constant, Properized, Table, expected_error_exact, predict
from .problem import FiniteProblem, Marginal, validate_problem

__all__ = [
    "Bayesian",
    "Constant",
    "FiniteProblem",
    "GameSolution",
    "Marginal",
    "ProperLabError",
    "Properized",
    "SolverConfig",
    "Table",
    "build_proper_learner",
    "evaluate_worstcase",
    "expected_error_exact",
    "predict",
    "solve_game",
    "validate_problem",
]

__version__ = "0.1.0"
